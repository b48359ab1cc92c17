#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hfl/scenario.hpp"
#include "json.hpp"

using namespace hfl;

namespace {

struct Options {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    double t_end = 0.0;
    double dt = 0.0;
    double tolerance = 1.0;
    std::string param;
    std::vector<double> values;
};

ScenarioConfig load(const Options& o) {
    if (o.config.empty()) throw Error(ErrorKind::config, "--config is required");
    ScenarioConfig c = load_config(o.config);
    if (o.seed_set) c.seed = o.seed;
    if (o.t_end > 0.0) c.flow.t_end = o.t_end;
    if (o.dt > 0.0) {
        c.flow.dt_initial = o.dt;
        c.flow.dt_max = o.dt;
    }
    if (!o.out.empty()) c.output_dir = o.out;
    const auto errs = validate_config(c);
    if (!errs.empty()) {
        std::string msg = "after command-line overrides:";
        for (const auto& e : errs) msg += "\n  " + e;
        throw Error(ErrorKind::config, msg);
    }
    return c;
}

void apply_threads(const Options& o) {
    int t = o.threads;
    if (t <= 0)
        if (const char* env = std::getenv("HFL_THREADS")) t = std::atoi(env);
    set_threads(t > 0 ? t : 1);
}

void summary(const ScenarioResult& r) {
    const auto& f = r.flow;
    std::printf("%s: %s (%s) after %ld steps, t = %.6g\n", r.cfg.name.c_str(), to_string(f.outcome), f.reason.c_str(),
                f.steps, f.t_final);
    if (!f.samples.empty())
        std::printf("  sup|Phi| = %.6e  sup|Phi|*t = %.6e  cond(H) = %.3e\n", f.samples.back().sup_phi,
                    f.samples.back().sup_phi * f.t_final, f.samples.back().cond_H);
    std::printf("  class: %s\n", r.classify_kind.c_str());
    if (r.destabilizer)
        std::printf("  destabilizer: %s, nu = %.6f\n", to_string(r.destabilizer->status), r.destabilizer->nu);
    if (r.bogomolov)
        std::printf("  bogomolov: wedge %.3e, norm difference %.3e\n", r.bogomolov->wedge, r.bogomolov->norm_difference);
    std::printf("  wall time %.2f s\n", r.wall_seconds);
}

int cmd_run(const Options& o) {
    const ScenarioConfig c = load(o);
    const ScenarioResult r = run_scenario(c);
    write_outputs(r, c.output_dir);
    summary(r);
    std::printf("  outputs in %s\n", c.output_dir.c_str());
    return 0;
}

int cmd_check(const Options& o) {
    const ScenarioConfig c = load(o);
    ScenarioResult r = run_scenario(c);
    r.identities = identity_checks(r, o.tolerance);
    write_outputs(r, c.output_dir);
    summary(r);
    std::printf("%s", identity_table(r.identities).c_str());
    if (!all_pass(r.identities)) {
        for (const auto& id : r.identities)
            if (!id.pass) std::fprintf(stderr, "identity failed: %s\n", id.name.c_str());
        return 3;
    }
    return 0;
}

int cmd_sweep(const Options& o) {
    const ScenarioConfig base = load(o);
    if (o.param.empty() || o.values.empty()) throw Error(ErrorKind::config, "sweep needs --param and --values");
    std::vector<SweepRow> rows;
    for (double v : o.values) {
        ScenarioConfig c = sweep_variant(base, o.param, v);
        std::ostringstream tag;
        tag << o.param << "_" << v;
        c.output_dir = (std::filesystem::path(base.output_dir) / tag.str()).string();
        SweepRow row{v, run_scenario(c)};
        write_outputs(row.result, c.output_dir);
        std::printf("%s = %g: %s, donaldson derivative defect %.3e\n", o.param.c_str(), v,
                    to_string(row.result.flow.outcome), row.result.f5.max_rel_defect);
        rows.push_back(std::move(row));
    }
    const std::string csv = sweep_csv(o.param, rows);
    std::filesystem::create_directories(base.output_dir);
    const auto path = std::filesystem::path(base.output_dir) / ("sweep_" + o.param + ".csv");
    std::ofstream(path, std::ios::binary) << csv;
    std::printf("%s", csv.c_str());
    return 0;
}

int cmd_report(const Options& o) {
    std::string dir = o.out;
    if (dir.empty() && !o.config.empty()) dir = load_config(o.config).output_dir;
    if (dir.empty()) throw Error(ErrorKind::config, "report needs --out or --config");
    std::ifstream in(std::filesystem::path(dir) / "report.json");
    if (!in) throw Error(ErrorKind::config, "no report.json in " + dir);
    const auto j = nlohmann::ordered_json::parse(in);
    std::printf("%s: %s (%s), t = %s, steps %s\n", j["name"].get<std::string>().c_str(),
                j["outcome"].get<std::string>().c_str(), j["reason"].get<std::string>().c_str(),
                j["t_final"].dump().c_str(), j["steps"].dump().c_str());
    if (j.contains("final"))
        for (auto it = j["final"].begin(); it != j["final"].end(); ++it)
            std::printf("  %-24s %s\n", it.key().c_str(), it.value().dump().c_str());
    std::printf("  class: %s\n", j["classify"].dump().c_str());
    bool ok = true;
    for (const auto& id : j["identities"]) {
        const bool pass = id["pass"].get<bool>();
        ok = ok && pass;
        std::printf("  %-22s %-24s %s\n", id["name"].get<std::string>().c_str(), id["measured"].dump().c_str(),
                    !id["applicable"].get<bool>() ? "SKIP" : pass ? "PASS" : "FAIL");
    }
    return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hitchin-Simpson heat flow on flat tori"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* sc) {
        sc->add_option("--config", o.config, "scenario JSON");
        sc->add_option("--out", o.out, "output directory (overrides the config)");
        sc->add_option("--seed", o.seed, "RNG seed override")->each([&](const std::string&) { o.seed_set = true; });
        sc->add_option("--threads", o.threads, "worker threads (falls back to HFL_THREADS)");
        sc->add_option("--t-end", o.t_end, "final time override")->check(CLI::PositiveNumber);
        sc->add_option("--dt", o.dt, "sets dt_initial and dt_max")->check(CLI::PositiveNumber);
        sc->add_option("--tolerance", o.tolerance, "multiplier on the identity tolerances")->check(CLI::PositiveNumber);
    };
    CLI::App* run = app.add_subcommand("run", "run a scenario and write its report");
    CLI::App* check = app.add_subcommand("check", "run a scenario and evaluate the identity suite");
    CLI::App* sweep = app.add_subcommand("sweep", "run a scenario over a list of parameter values");
    CLI::App* report = app.add_subcommand("report", "print a stored report");
    for (CLI::App* sc : {run, check, sweep, report}) common(sc);
    sweep->add_option("--param", o.param, "dt_initial, N or amplitude")->check(CLI::IsMember({"dt_initial", "N", "amplitude"}));
    sweep->add_option("--values", o.values, "parameter values")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        apply_threads(o);
        if (*run) return cmd_run(o);
        if (*check) return cmd_check(o);
        if (*sweep) return cmd_sweep(o);
        if (*report) return cmd_report(o);
    } catch (const Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        switch (e.kind()) {
            case ErrorKind::numerical:
            case ErrorKind::metric:
            case ErrorKind::degeneracy: return 2;
            default: return 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
