#include "hfl/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace hfl {

using Json = nlohmann::ordered_json;

namespace {

// Collects every problem instead of stopping at the first.
struct Reader {
    std::vector<std::string> errors;

    void keys(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
        if (!obj.is_object()) {
            errors.push_back(where + ": expected an object");
            return;
        }
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!ok.count(it.key())) errors.push_back(where + "." + it.key() + ": unknown field");
    }

    const Json* field(const Json& obj, const std::string& where, const char* key, bool required) {
        if (!obj.is_object()) return nullptr;
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) errors.push_back(where + "." + key + ": missing");
            return nullptr;
        }
        return &*it;
    }

    void get(const Json& obj, const std::string& where, const char* key, double& out, bool required = false) {
        if (const Json* v = field(obj, where, key, required)) {
            if (v->is_number()) out = v->get<double>();
            else errors.push_back(where + "." + key + ": expected a number");
        }
    }
    void get(const Json& obj, const std::string& where, const char* key, int& out, bool required = false) {
        if (const Json* v = field(obj, where, key, required)) {
            if (v->is_number_integer()) out = v->get<int>();
            else errors.push_back(where + "." + key + ": expected an integer");
        }
    }
    void get(const Json& obj, const std::string& where, const char* key, long& out, bool required = false) {
        if (const Json* v = field(obj, where, key, required)) {
            if (v->is_number_integer()) out = v->get<long>();
            else errors.push_back(where + "." + key + ": expected an integer");
        }
    }
    void get(const Json& obj, const std::string& where, const char* key, std::uint64_t& out, bool required = false) {
        if (const Json* v = field(obj, where, key, required)) {
            if (v->is_number_unsigned()) out = v->get<std::uint64_t>();
            else errors.push_back(where + "." + key + ": expected a nonnegative integer");
        }
    }
    void get(const Json& obj, const std::string& where, const char* key, bool& out, bool required = false) {
        if (const Json* v = field(obj, where, key, required)) {
            if (v->is_boolean()) out = v->get<bool>();
            else errors.push_back(where + "." + key + ": expected true or false");
        }
    }
    void get(const Json& obj, const std::string& where, const char* key, std::string& out, bool required = false) {
        if (const Json* v = field(obj, where, key, required)) {
            if (v->is_string()) out = v->get<std::string>();
            else errors.push_back(where + "." + key + ": expected a string");
        }
    }
    template <class T>
    void get_list(const Json& obj, const std::string& where, const char* key, std::vector<T>& out) {
        if (const Json* v = field(obj, where, key, false)) {
            if (!v->is_array()) {
                errors.push_back(where + "." + key + ": expected an array");
                return;
            }
            out.clear();
            for (const auto& x : *v) {
                const bool ok = std::is_integral_v<T> ? x.is_number_integer() : x.is_number();
                if (!ok) {
                    errors.push_back(where + "." + key + ": expected an array of numbers");
                    return;
                }
                out.push_back(x.get<T>());
            }
        }
    }
    void get_matrix(const Json& obj, const std::string& where, const char* key, std::vector<std::vector<double>>& out) {
        if (const Json* v = field(obj, where, key, false)) {
            if (!v->is_array()) {
                errors.push_back(where + "." + key + ": expected an array of rows");
                return;
            }
            out.clear();
            for (const auto& row : *v) {
                if (!row.is_array()) {
                    errors.push_back(where + "." + key + ": expected an array of rows");
                    return;
                }
                std::vector<double> r;
                for (const auto& x : row) {
                    if (!x.is_number()) {
                        errors.push_back(where + "." + key + ": expected numbers");
                        return;
                    }
                    r.push_back(x.get<double>());
                }
                out.push_back(std::move(r));
            }
        }
    }
};

bool finite_pos(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

std::vector<std::string> validate_config(const ScenarioConfig& c) {
    std::vector<std::string> e;
    if (c.schema_version != kSchemaVersion)
        e.push_back("schema_version: expected " + std::to_string(kSchemaVersion));
    if (c.name.empty()) e.push_back("name: must not be empty");
    for (char ch : c.name)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-')) {
            e.push_back("name: only letters, digits, '_' and '-'");
            break;
        }

    const GeometryBlock& g = c.geometry;
    bool geo_ok = true;
    if (g.n != 1 && g.n != 2) {
        e.push_back("geometry.n: must be 1 or 2");
        geo_ok = false;
    }
    if (g.N < 4 || g.N > 4096 || (g.N & (g.N - 1))) {
        e.push_back("geometry.N: must be a power of two in [4, 4096]");
        geo_ok = false;
    }
    if (!g.periods.empty()) {
        if (static_cast<int>(g.periods.size()) != 2 * g.n) {
            e.push_back("geometry.periods: expected 2n entries");
            geo_ok = false;
        }
        for (double L : g.periods)
            if (!finite_pos(L)) {
                e.push_back("geometry.periods: entries must be positive");
                geo_ok = false;
                break;
            }
    }
    auto square = [&](const std::vector<std::vector<double>>& m, const char* name) {
        if (m.empty()) return true;
        bool ok = static_cast<int>(m.size()) == g.n;
        for (const auto& row : m) ok = ok && static_cast<int>(row.size()) == g.n;
        if (!ok) e.push_back(std::string("geometry.") + name + ": expected an n×n matrix");
        return ok;
    };
    geo_ok = square(g.g, "g") && geo_ok;
    geo_ok = square(g.g_imag, "g_imag") && geo_ok;
    if (!g.g_imag.empty() && g.g.empty()) {
        e.push_back("geometry.g_imag: needs geometry.g");
        geo_ok = false;
    }

    const BundleBlock& b = c.bundle;
    bool bundle_ok = true;
    if (b.rank < 1 || b.rank > kMaxRank) {
        e.push_back("bundle.rank: must be between 1 and " + std::to_string(kMaxRank));
        bundle_ok = false;
    }
    if (static_cast<int>(b.fluxes.size()) != b.rank) {
        e.push_back("bundle.fluxes: expected one flux per summand");
        bundle_ok = false;
    }

    const HiggsBlock& h = c.higgs;
    if (h.recipe != "zero" && h.recipe != "nilpotent" && h.recipe != "entries")
        e.push_back("higgs.recipe: must be zero, nilpotent or entries");
    if (!std::isfinite(h.amplitude)) e.push_back("higgs.amplitude: must be finite");
    if (h.recipe == "nilpotent" && b.rank < 2) e.push_back("higgs.recipe: nilpotent needs rank at least 2");
    if (h.recipe == "nilpotent" && bundle_ok && b.fluxes[0] != b.fluxes[1])
        e.push_back("higgs.recipe: nilpotent needs equal fluxes on the first two summands");
    if (h.recipe != "entries" && !h.entries.empty()) e.push_back("higgs.entries: only used by the entries recipe");
    for (std::size_t k = 0; k < h.entries.size(); ++k) {
        const auto& x = h.entries[k];
        const std::string w = "higgs.entries[" + std::to_string(k) + "]";
        if (x.component < 0 || x.component >= g.n) e.push_back(w + ".component: out of range");
        if (x.row < 0 || x.row >= b.rank || x.col < 0 || x.col >= b.rank) e.push_back(w + ": row/col out of range");
        if (!std::isfinite(x.re) || !std::isfinite(x.im)) e.push_back(w + ": value must be finite");
        if (x.theta_index < -1) e.push_back(w + ".theta_index: must be -1 or a section index");
    }

    const InitialMetricBlock& m = c.initial_metric;
    if (m.kind != "reference" && m.kind != "conformal" && m.kind != "explicit")
        e.push_back("initial_metric.kind: must be reference, conformal or explicit");
    if (!(m.amplitude >= 0.0) || !std::isfinite(m.amplitude)) e.push_back("initial_metric.amplitude: must be nonnegative");
    if (m.band < 1 || m.band > 8) e.push_back("initial_metric.band: must be between 1 and 8");
    if (m.kind == "explicit") {
        if (static_cast<int>(m.diag.size()) != b.rank) e.push_back("initial_metric.diag: expected rank entries");
        for (double d : m.diag)
            if (!finite_pos(d)) {
                e.push_back("initial_metric.diag: entries must be positive");
                break;
            }
    } else if (!m.diag.empty()) {
        e.push_back("initial_metric.diag: only used by the explicit kind");
    }

    const FlowConfig& f = c.flow;
    auto pos = [&](double v, const char* name) {
        if (!finite_pos(v)) e.push_back(std::string("flow.") + name + ": must be positive");
    };
    pos(f.dt_initial, "dt_initial");
    pos(f.dt_max, "dt_max");
    pos(f.safety, "safety");
    pos(f.t_end, "t_end");
    pos(f.target, "target");
    pos(f.degeneracy_cap, "degeneracy_cap");
    pos(f.plateau_tol, "plateau_tol");
    if (!(f.plateau_t_min >= 0.0)) e.push_back("flow.plateau_t_min: must be nonnegative");
    if (f.cadence < 1) e.push_back("flow.cadence: must be at least 1");
    if (f.max_steps < 1) e.push_back("flow.max_steps: must be at least 1");
    if (f.scheme != "etd2" && f.scheme != "etd1" && f.scheme != "exp_euler")
        e.push_back("flow.scheme: must be etd2, etd1 or exp_euler");
    for (double t : f.checkpoints)
        if (!finite_pos(t)) {
            e.push_back("flow.checkpoints: entries must be positive");
            break;
        }

    if (c.analysis.bogomolov && g.n != 2) e.push_back("analysis.bogomolov: needs n = 2");
    if (c.output_dir.empty()) e.push_back("output.dir: must not be empty");

    // geometry and flux admissibility through the library's own checks
    if (geo_ok && bundle_ok) {
        try {
            Eigen::MatrixXcd gm;
            if (!g.g.empty()) {
                gm.resize(g.n, g.n);
                for (int i = 0; i < g.n; ++i)
                    for (int j = 0; j < g.n; ++j)
                        gm(i, j) = cplx(g.g[i][j], g.g_imag.empty() ? 0.0 : g.g_imag[i][j]);
            }
            const TorusGeometry geo = TorusGeometry::make(g.n, 4, g.periods, gm);
            HiggsBundleSpec s;
            s.rank = b.rank;
            s.fluxes = b.fluxes;
            for (const auto& x : h.entries)
                s.higgs.push_back(HiggsEntry{x.component, x.row, x.col, cplx(x.re, x.im), x.theta_index});
            s.validate(geo);
        } catch (const Error& err) {
            e.push_back(std::string("geometry/bundle/higgs: ") + err.what());
        }
    }
    return e;
}

ScenarioConfig parse_config(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const std::exception& ex) {
        throw Error(ErrorKind::config, std::string("malformed JSON: ") + ex.what());
    }
    ScenarioConfig c;
    Reader r;
    r.keys(j, "config", {"schema_version", "name", "seed", "geometry", "bundle", "higgs", "initial_metric", "flow",
                         "analysis", "output"});
    if (!j.is_object()) throw Error(ErrorKind::config, "config: expected an object");
    r.get(j, "config", "schema_version", c.schema_version, true);
    r.get(j, "config", "name", c.name, true);
    r.get(j, "config", "seed", c.seed);

    static const Json empty = Json::object();
    auto block = [&](const char* key) -> const Json& {
        auto it = j.find(key);
        return it == j.end() ? empty : *it;
    };

    const Json& g = block("geometry");
    r.keys(g, "geometry", {"n", "N", "periods", "g", "g_imag"});
    r.get(g, "geometry", "n", c.geometry.n, true);
    r.get(g, "geometry", "N", c.geometry.N, true);
    r.get_list(g, "geometry", "periods", c.geometry.periods);
    r.get_matrix(g, "geometry", "g", c.geometry.g);
    r.get_matrix(g, "geometry", "g_imag", c.geometry.g_imag);

    const Json& b = block("bundle");
    r.keys(b, "bundle", {"rank", "fluxes"});
    r.get(b, "bundle", "rank", c.bundle.rank, true);
    r.get_list(b, "bundle", "fluxes", c.bundle.fluxes);

    const Json& h = block("higgs");
    r.keys(h, "higgs", {"recipe", "amplitude", "entries"});
    r.get(h, "higgs", "recipe", c.higgs.recipe);
    r.get(h, "higgs", "amplitude", c.higgs.amplitude);
    if (const Json* es = r.field(h, "higgs", "entries", false)) {
        if (!es->is_array()) {
            r.errors.push_back("higgs.entries: expected an array");
        } else {
            for (std::size_t k = 0; k < es->size(); ++k) {
                const std::string w = "higgs.entries[" + std::to_string(k) + "]";
                const Json& x = (*es)[k];
                HiggsEntryConfig ec;
                r.keys(x, w, {"component", "row", "col", "re", "im", "theta_index"});
                r.get(x, w, "component", ec.component);
                r.get(x, w, "row", ec.row, true);
                r.get(x, w, "col", ec.col, true);
                r.get(x, w, "re", ec.re);
                r.get(x, w, "im", ec.im);
                r.get(x, w, "theta_index", ec.theta_index);
                c.higgs.entries.push_back(ec);
            }
        }
    }

    const Json& m = block("initial_metric");
    r.keys(m, "initial_metric", {"kind", "amplitude", "band", "diag"});
    r.get(m, "initial_metric", "kind", c.initial_metric.kind);
    r.get(m, "initial_metric", "amplitude", c.initial_metric.amplitude);
    r.get(m, "initial_metric", "band", c.initial_metric.band);
    r.get_list(m, "initial_metric", "diag", c.initial_metric.diag);

    const Json& f = block("flow");
    r.keys(f, "flow", {"dt_initial", "dt_max", "safety", "t_end", "target", "degeneracy_cap", "cadence", "scheme",
                       "max_steps", "plateau_tol", "plateau_t_min", "checkpoints", "donaldson"});
    r.get(f, "flow", "dt_initial", c.flow.dt_initial);
    r.get(f, "flow", "dt_max", c.flow.dt_max);
    r.get(f, "flow", "safety", c.flow.safety);
    r.get(f, "flow", "t_end", c.flow.t_end);
    r.get(f, "flow", "target", c.flow.target);
    r.get(f, "flow", "degeneracy_cap", c.flow.degeneracy_cap);
    r.get(f, "flow", "cadence", c.flow.cadence);
    r.get(f, "flow", "scheme", c.flow.scheme);
    r.get(f, "flow", "max_steps", c.flow.max_steps);
    r.get(f, "flow", "plateau_tol", c.flow.plateau_tol);
    r.get(f, "flow", "plateau_t_min", c.flow.plateau_t_min);
    r.get_list(f, "flow", "checkpoints", c.flow.checkpoints);
    r.get(f, "flow", "donaldson", c.flow.donaldson);

    const Json& a = block("analysis");
    r.keys(a, "analysis", {"classify", "destabilizer", "bogomolov", "weitzenbock", "heat_oracle"});
    r.get(a, "analysis", "classify", c.analysis.classify);
    r.get(a, "analysis", "destabilizer", c.analysis.destabilizer);
    r.get(a, "analysis", "bogomolov", c.analysis.bogomolov);
    r.get(a, "analysis", "weitzenbock", c.analysis.weitzenbock);
    r.get(a, "analysis", "heat_oracle", c.analysis.heat_oracle);

    const Json& o = block("output");
    r.keys(o, "output", {"dir"});
    r.get(o, "output", "dir", c.output_dir);

    std::vector<std::string> all = r.errors;
    if (all.empty()) all = validate_config(c);
    if (!all.empty()) {
        std::string msg = std::to_string(all.size()) + " problem(s):";
        for (const auto& s : all) msg += "\n  " + s;
        throw Error(ErrorKind::config, msg);
    }
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::config, "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& c) {
    Json j;
    j["schema_version"] = c.schema_version;
    j["name"] = c.name;
    j["seed"] = c.seed;
    j["geometry"] = {{"n", c.geometry.n}, {"N", c.geometry.N}, {"periods", c.geometry.periods},
                     {"g", c.geometry.g}, {"g_imag", c.geometry.g_imag}};
    j["bundle"] = {{"rank", c.bundle.rank}, {"fluxes", c.bundle.fluxes}};
    Json entries = Json::array();
    for (const auto& x : c.higgs.entries)
        entries.push_back({{"component", x.component}, {"row", x.row}, {"col", x.col},
                           {"re", x.re}, {"im", x.im}, {"theta_index", x.theta_index}});
    j["higgs"] = {{"recipe", c.higgs.recipe}, {"amplitude", c.higgs.amplitude}, {"entries", entries}};
    j["initial_metric"] = {{"kind", c.initial_metric.kind}, {"amplitude", c.initial_metric.amplitude},
                           {"band", c.initial_metric.band}, {"diag", c.initial_metric.diag}};
    const FlowConfig& f = c.flow;
    j["flow"] = {{"dt_initial", f.dt_initial}, {"dt_max", f.dt_max}, {"safety", f.safety}, {"t_end", f.t_end},
                 {"target", f.target}, {"degeneracy_cap", f.degeneracy_cap}, {"cadence", f.cadence},
                 {"scheme", f.scheme}, {"max_steps", f.max_steps}, {"plateau_tol", f.plateau_tol},
                 {"plateau_t_min", f.plateau_t_min}, {"checkpoints", f.checkpoints}, {"donaldson", f.donaldson}};
    j["analysis"] = {{"classify", c.analysis.classify}, {"destabilizer", c.analysis.destabilizer},
                     {"bogomolov", c.analysis.bogomolov}, {"weitzenbock", c.analysis.weitzenbock},
                     {"heat_oracle", c.analysis.heat_oracle}};
    j["output"] = {{"dir", c.output_dir}};
    return j.dump(2) + "\n";
}

}  // namespace hfl
