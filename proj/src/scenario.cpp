#include "hfl/scenario.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "json.hpp"

namespace hfl {

using Json = nlohmann::ordered_json;

namespace {

// Uniform doubles from mt19937_64 without going through the implementation-defined distributions.
struct Uniform {
    std::mt19937_64 eng;
    explicit Uniform(std::uint64_t seed) : eng(seed) {}
    double operator()(double a, double b) { return a + (b - a) * static_cast<double>(eng() >> 11) * 0x1.0p-53; }
};

// Real random field on the wavevectors 0 < |m| ≤ band (m ∈ Z^{2n}, m_a counts periods along axis a).
Field disc_band_field(const TorusGeometry& geo, int band, double amp, Uniform& rng) {
    const int D = geo.dims();
    Field u = geo.zeros();
    std::vector<int> m(D, -band);
    std::vector<std::pair<std::vector<int>, cplx>> modes;
    while (true) {
        int q = 0;
        for (int x : m) q += x * x;
        if (q > 0 && q <= band * band) {
            const double re = rng(-amp / 4.0, amp / 4.0), im = rng(-amp / 4.0, amp / 4.0);
            modes.push_back({m, cplx(re, im)});
        }
        int a = D - 1;
        while (a >= 0 && m[a] == band) m[a--] = -band;
        if (a < 0) break;
        ++m[a];
    }
    for (std::size_t p = 0; p < geo.points(); ++p) {
        double s = 0.0;
        for (const auto& [k, c] : modes) {
            double ph = 0.0;
            for (int a = 0; a < D; ++a) ph += 2.0 * kPi * k[a] * geo.coord(p, a) / geo.periods()[a];
            s += (c * std::polar(1.0, ph)).real();
        }
        u.v[p] = s;
    }
    return u;
}

HiggsBundleSpec spec_of(const ScenarioConfig& c) {
    HiggsBundleSpec s;
    s.rank = c.bundle.rank;
    s.fluxes = c.bundle.fluxes;
    s.amplitude = 1.0;
    const double a = c.higgs.amplitude;
    if (c.higgs.recipe == "nilpotent") {
        s.higgs.push_back(HiggsEntry{0, 0, 1, cplx(a, 0.0)});
    } else if (c.higgs.recipe == "entries") {
        for (const auto& x : c.higgs.entries)
            s.higgs.push_back(HiggsEntry{x.component, x.row, x.col, a * cplx(x.re, x.im), x.theta_index});
    }
    return s;
}

bool any_entry(const HiggsBundleSpec& s) {
    for (const auto& h : s.higgs)
        if (h.value != cplx(0.0)) return true;
    return false;
}

// First summand e_k with φ_i e_k ∈ span(e_k) for every component.
int invariant_summand(const HiggsBundleSpec& s) {
    for (int k = 0; k < s.rank; ++k) {
        bool ok = true;
        for (const auto& h : s.higgs)
            if (h.value != cplx(0.0) && h.col == k && h.row != k) ok = false;
        if (ok) return k;
    }
    return -1;
}

Json num_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

BuiltScenario build_scenario(const ScenarioConfig& cfg, double lambda_factor) {
    const std::vector<std::string> errs = validate_config(cfg);
    if (!errs.empty()) {
        std::string msg = std::to_string(errs.size()) + " problem(s):";
        for (const auto& s : errs) msg += "\n  " + s;
        throw Error(ErrorKind::config, msg);
    }
    const GeometryBlock& g = cfg.geometry;
    Eigen::MatrixXcd gm;
    if (!g.g.empty()) {
        gm.resize(g.n, g.n);
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j) gm(i, j) = cplx(g.g[i][j], g.g_imag.empty() ? 0.0 : g.g_imag[i][j]);
    }
    TorusGeometry geo = TorusGeometry::make(g.n, g.N, g.periods, gm);
    if (lambda_factor > 0.0) geo = geo.with_lambda_factor(lambda_factor);

    HiggsBundleSpec spec = spec_of(cfg);
    HiggsField phi = make_higgs(spec, geo);
    MetricField Hhat = reference_metric(spec, geo);
    MetricField H0 = Hhat;
    std::vector<Field> conf;
    const InitialMetricBlock& m = cfg.initial_metric;
    if (m.kind == "conformal") {
        Uniform rng(cfg.seed);
        for (int a = 0; a < spec.rank; ++a) {
            Field u = disc_band_field(geo, m.band, m.amplitude, rng);
            for (std::size_t p = 0; p < geo.points(); ++p) H0(a, a)[p] *= std::exp(2.0 * u.v[p].real());
            conf.push_back(std::move(u));
        }
    } else if (m.kind == "explicit") {
        for (int a = 0; a < spec.rank; ++a)
            for (std::size_t p = 0; p < geo.points(); ++p) H0(a, a)[p] *= m.diag[a];
    }
    return BuiltScenario{std::move(geo), std::move(spec), std::move(phi), std::move(Hhat), std::move(H0), std::move(conf)};
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, double lambda_factor) {
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioResult res;
    res.cfg = cfg;
    const BuiltScenario b = build_scenario(cfg, lambda_factor);

    res.flow = run(b.spec, b.phi, b.H0, b.geo, cfg.flow);

    if (cfg.flow.donaldson) {
        std::vector<double> t, mu, l2;
        for (const auto& s : res.flow.samples) {
            t.push_back(s.t);
            mu.push_back(s.donaldson);
            l2.push_back(s.l2_phi_sq);
        }
        if (t.size() >= 3) res.f5 = donaldson_derivative_check(t, mu, l2);
    }

    res.classify_kind = "skipped";
    if (cfg.analysis.classify) {
        try {
            res.cls = classify(b.spec);
            res.classify_kind = to_string(res.cls->kind);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::unsupported) throw;
            res.classify_kind = "unsupported";
        }
    }

    if (cfg.analysis.destabilizer &&
        (res.flow.outcome == Outcome::plateau || res.flow.outcome == Outcome::degenerating ||
         res.flow.outcome == Outcome::converged))
        res.destabilizer = extract_destabilizer(res.flow.H_final, b.Hhat, b.phi, b.spec, b.geo);

    if (cfg.analysis.bogomolov) res.bogomolov = bogomolov(res.flow.H_final, b.phi, b.spec, b.geo);

    if (cfg.analysis.weitzenbock) {
        const int k = invariant_summand(b.spec);
        if (k >= 0) {
            std::vector<CVec> s(b.spec.rank, CVec(b.geo.points(), cplx(0.0)));
            for (auto& x : s[k]) x = 1.0;
            res.weitzenbock = weitzenbock_check(s, b.phi, res.flow.H_final, b.geo);
            res.weitzenbock_section = k;
        }
    }

    if (cfg.analysis.heat_oracle && b.spec.rank == 1 && !any_entry(b.spec)) {
        // log(H/Ĥ) = 2u solves the heat equation when the reference metric has constant curvature
        Field u0 = b.conformal.empty() ? b.geo.zeros() : b.conformal[0];
        const Field u = heat_smooth(u0, res.flow.t_final, b.geo);
        double err = 0.0;
        for (std::size_t p = 0; p < b.geo.points(); ++p)
            err = std::max(err, std::abs(res.flow.H_final(0, 0)[p] - b.Hhat(0, 0)[p] * std::exp(2.0 * u.v[p].real())));
        res.heat_oracle_error = err;
    }

    res.identities = identity_checks(res);
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

std::vector<IdentityCheck> identity_checks(const ScenarioResult& res, double scale) {
    std::vector<IdentityCheck> out;
    auto le = [&](const char* name, double v, double tol, bool applicable = true) {
        out.push_back({name, "<=", v, tol * scale, applicable, !applicable || v <= tol * scale});
    };
    const FlowReport& f = res.flow;
    le("trace_heat", f.trace_heat_defect, 1e-6);
    out.push_back({"heat_domination", ">=", f.heat_domination_margin, -1e-6 * scale, true,
                   f.heat_domination_margin >= -1e-6 * scale});
    out.push_back({"sup_monotone", "==", static_cast<double>(f.sup_violations), 0.0, true, f.sup_violations == 0});
    out.push_back({"l1_monotone", "==", static_cast<double>(f.l1_violations), 0.0, true, f.l1_violations == 0});
    out.push_back({"higgs_norm_monotone", "==", static_cast<double>(f.higgs_norm_violations), 0.0, true,
                   f.higgs_norm_violations == 0});
    le("donaldson_derivative", res.f5.max_rel_defect, 1e-4, res.f5.samples_used > 0);
    le("det_normalization", f.max_logdet_residual, 1e-10);
    if (res.bogomolov && !res.bogomolov->degenerate) {
        le("bogomolov_routes", std::abs(res.bogomolov->wedge - res.bogomolov->norm_difference), 1e-8);
        out.push_back({"bogomolov_sign", ">=", res.bogomolov->wedge, -1e-8 * scale, true,
                       res.bogomolov->wedge >= -1e-8 * scale});
    } else {
        le("bogomolov_routes", 0.0, 1e-8, false);
    }
    le("weitzenbock", res.weitzenbock ? res.weitzenbock->max_defect : 0.0, 1e-10, res.weitzenbock.has_value());
    le("heat_oracle", res.heat_oracle_error, 1e-6, res.heat_oracle_error >= 0.0);
    return out;
}

bool all_pass(const std::vector<IdentityCheck>& checks) {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string identity_table(const std::vector<IdentityCheck>& checks) {
    std::ostringstream os;
    os << std::left << std::setw(22) << "identity" << std::setw(16) << "measured" << std::setw(4) << ""
       << std::setw(14) << "tolerance" << "result\n";
    for (const auto& c : checks) {
        os << std::setw(22) << c.name;
        if (!c.applicable) {
            os << std::setw(34) << "n/a" << "SKIP\n";
            continue;
        }
        std::ostringstream m, t;
        m << std::setprecision(4) << c.measured;
        t << std::setprecision(4) << c.tolerance;
        os << std::setw(16) << m.str() << std::setw(4) << c.relation << std::setw(14) << t.str()
           << (c.pass ? "PASS" : "FAIL") << "\n";
    }
    return os.str();
}

std::string report_json(const ScenarioResult& res) {
    const FlowReport& f = res.flow;
    Json j;
    j["name"] = res.cfg.name;
    j["schema_version"] = kSchemaVersion;
    j["seed"] = res.cfg.seed;
    j["outcome"] = to_string(f.outcome);
    j["reason"] = f.reason;
    j["steps"] = f.steps;
    j["t_final"] = f.t_final;
    j["monitor_csv"] = "monitor.csv";
    if (!f.samples.empty()) {
        const MonitorSample& s = f.samples.back();
        j["final"] = {{"sup_phi", s.sup_phi}, {"l1_phi", s.l1_phi}, {"l2_phi_sq", s.l2_phi_sq},
                      {"donaldson", s.donaldson}, {"sup_higgs_norm", s.sup_higgs_norm},
                      {"min_eig_H", s.min_eig_H}, {"cond_H", s.cond_H}, {"sup_phi_times_t", s.sup_phi * s.t}};
    }
    j["monitors"] = {{"trace_heat_defect", f.trace_heat_defect},
                     {"heat_domination_margin", f.heat_domination_margin},
                     {"sup_violations", f.sup_violations},
                     {"l1_violations", f.l1_violations},
                     {"higgs_norm_violations", f.higgs_norm_violations},
                     {"max_logdet_residual", f.max_logdet_residual},
                     {"donaldson_derivative_max_defect", res.f5.max_rel_defect},
                     {"donaldson_derivative_samples", res.f5.samples_used}};
    j["heat_oracle_error"] = num_or_null(res.heat_oracle_error);
    Json cls = {{"kind", res.classify_kind}};
    if (res.cls) {
        cls["slope"] = std::to_string(res.cls->slope.numerator()) + "/" + std::to_string(res.cls->slope.denominator());
        if (res.cls->witness) {
            const Witness& w = *res.cls->witness;
            cls["witness"] = {{"summands", w.summands}, {"rank", w.rank}, {"degree", w.degree},
                              {"slope", std::to_string(w.slope.numerator()) + "/" +
                                            std::to_string(w.slope.denominator())}};
        }
    }
    j["classify"] = cls;
    if (res.bogomolov)
        j["bogomolov"] = {{"degenerate", res.bogomolov->degenerate}, {"wedge", res.bogomolov->wedge},
                          {"norm_difference", res.bogomolov->norm_difference}};
    else
        j["bogomolov"] = nullptr;
    if (res.weitzenbock)
        j["weitzenbock"] = {{"section", res.weitzenbock_section}, {"max_defect", res.weitzenbock->max_defect},
                            {"min_rhs", res.weitzenbock->min_rhs}};
    else
        j["weitzenbock"] = nullptr;
    if (res.destabilizer)
        j["destabilizer"] = {{"path", "destabilizer.json"},
                             {"status", to_string(res.destabilizer->status)},
                             {"nu", res.destabilizer->nu}};
    else
        j["destabilizer"] = nullptr;
    Json ids = Json::array();
    for (const auto& c : res.identities)
        ids.push_back({{"name", c.name}, {"relation", c.relation}, {"measured", num_or_null(c.measured)},
                       {"tolerance", c.tolerance}, {"applicable", c.applicable}, {"pass", c.pass}});
    j["identities"] = ids;
    return j.dump(2) + "\n";
}

void write_outputs(const ScenarioResult& res, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto put = [&](const std::string& name, const std::string& text) {
        std::ofstream out(fs::path(dir) / name, std::ios::binary);
        if (!out) throw Error(ErrorKind::config, "cannot write " + (fs::path(dir) / name).string());
        out << text;
    };
    put("report.json", report_json(res));
    put("monitor.csv", monitor_csv(res.flow.samples));
    Json t;
    t["wall_seconds"] = res.wall_seconds;
    t["threads"] = threads();
    put("timing.json", t.dump(2) + "\n");
    if (res.destabilizer) put("destabilizer.json", to_json(*res.destabilizer) + "\n");
}

ScenarioConfig sweep_variant(const ScenarioConfig& base, const std::string& parameter, double value) {
    ScenarioConfig c = base;
    if (parameter == "dt_initial") {
        if (!(value > 0.0)) throw Error(ErrorKind::config, "sweep: dt_initial values must be positive");
        const double s = value / base.flow.dt_initial;
        c.flow.dt_initial = value;
        c.flow.dt_max = base.flow.dt_max * s;
        c.flow.safety = base.flow.safety * s;
    } else if (parameter == "N") {
        if (value != std::round(value)) throw Error(ErrorKind::config, "sweep: N values must be integers");
        c.geometry.N = static_cast<int>(std::lround(value));
    } else if (parameter == "amplitude") {
        c.higgs.amplitude = value;
    } else {
        throw Error(ErrorKind::config, "sweep: parameter must be dt_initial, N or amplitude");
    }
    const auto errs = validate_config(c);
    if (!errs.empty()) throw Error(ErrorKind::config, "sweep variant: " + errs.front());
    return c;
}

std::string sweep_csv(const std::string& parameter, const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << std::setprecision(10);
    os << parameter
       << ",outcome,steps,t_final,sup_phi,sup_phi_times_t,trace_heat,heat_domination,donaldson_derivative,"
          "det_residual,heat_oracle,derivative_ratio,derivative_order\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const ScenarioResult& r = rows[i].result;
        const double sup = r.flow.samples.empty() ? 0.0 : r.flow.samples.back().sup_phi;
        os << rows[i].value << "," << to_string(r.flow.outcome) << "," << r.flow.steps << "," << r.flow.t_final << ","
           << sup << "," << sup * r.flow.t_final << "," << r.flow.trace_heat_defect << ","
           << r.flow.heat_domination_margin << "," << r.f5.max_rel_defect << "," << r.flow.max_logdet_residual << ","
           << r.heat_oracle_error << ",";
        if (i > 0 && r.f5.max_rel_defect > 0.0 && rows[i - 1].result.f5.max_rel_defect > 0.0) {
            const double ratio = rows[i - 1].result.f5.max_rel_defect / r.f5.max_rel_defect;
            const double h = rows[i - 1].value / rows[i].value;
            os << ratio << "," << (h > 0.0 && h != 1.0 ? std::log(ratio) / std::log(h) : 0.0);
        } else {
            os << ",";
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace hfl
