#include "kirflow/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "kirflow/errors.hpp"

namespace kirflow {

namespace fs = std::filesystem;

const SoilParams* SoilTable::find(const std::string& soil) const {
    for (const auto& s : soils)
        if (s.name == soil) return &s;
    return nullptr;
}

namespace {

// ---- reading ---------------------------------------------------------------------------

class Reader {
public:
    Reader(std::string file, std::vector<fs::path> table_dirs) : file_(std::move(file)), dirs_(std::move(table_dirs)) {}

    [[noreturn]] void fail(const YAML::Node& n, const std::string& msg) const {
        const YAML::Mark m = n.Mark();
        throw ParseError(file_, m.line >= 0 ? m.line + 1 : 0, m.column >= 0 ? m.column + 1 : 0, msg);
    }

    void expect_map(const YAML::Node& n, const std::string& what) const {
        if (!n.IsMap()) fail(n, what + " must be a mapping");
    }

    void allow(const YAML::Node& n, const std::string& what, std::initializer_list<const char*> keys) const {
        expect_map(n, what);
        std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& kv : n) {
            const auto key = kv.first.as<std::string>();
            if (!ok.count(key)) fail(kv.first, "unknown key '" + key + "' in " + what);
        }
    }

    YAML::Node need(const YAML::Node& n, const char* key, const std::string& what) const {
        const YAML::Node v = n[key];
        if (!v) fail(n, "missing required key '" + std::string(key) + "' in " + what);
        return v;
    }

    double number(const YAML::Node& n) const {
        if (!n.IsScalar()) fail(n, "expected a number");
        const auto& s = n.Scalar();
        double v = 0.0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) {
            // yaml-cpp's own conversion covers forms like ".5" and "+1"
            try {
                v = n.as<double>();
            } catch (const YAML::Exception&) {
                fail(n, "expected a number, got '" + s + "'");
            }
        }
        if (!std::isfinite(v)) fail(n, "number must be finite");
        return v;
    }

    int integer(const YAML::Node& n) const {
        const double v = number(n);
        if (v != std::floor(v) || std::abs(v) > 1e9) fail(n, "expected an integer");
        return static_cast<int>(v);
    }

    std::string text(const YAML::Node& n) const {
        if (!n.IsScalar()) fail(n, "expected a string");
        return n.Scalar();
    }

    std::vector<double> numbers(const YAML::Node& n) const {
        if (!n.IsSequence()) fail(n, "expected a list of numbers");
        std::vector<double> v;
        for (const auto& e : n) v.push_back(number(e));
        return v;
    }

    Units units(const YAML::Node& n) const {
        allow(n, "units", {"length", "time"});
        Units u;
        u.length = text(need(n, "length", "units"));
        u.time = text(need(n, "time", "units"));
        static const std::set<std::string> lengths{"m", "cm"}, times{"day", "h", "min", "s"};
        if (!lengths.count(u.length)) fail(n["length"], "unknown length unit '" + u.length + "'");
        if (!times.count(u.time)) fail(n["time"], "unknown time unit '" + u.time + "'");
        return u;
    }

    // Inline soil record, either Brooks-Corey or van Genuchten.
    SoilParams soil_record(const YAML::Node& n, std::optional<double>* theta0 = nullptr) const {
        allow(n, "soil", {"name", "theta_r", "theta_s", "theta_0", "k_s", "h_d", "lambda", "beta", "van_genuchten"});
        SoilParams p;
        p.name = n["name"] ? text(n["name"]) : std::string("soil");
        p.theta_r = number(need(n, "theta_r", "soil"));
        p.theta_s = number(need(n, "theta_s", "soil"));
        p.k_s = number(need(n, "k_s", "soil"));
        if (const auto vg = n["van_genuchten"]) {
            if (n["h_d"] || n["lambda"]) fail(vg, "give either van_genuchten or h_d/lambda, not both");
            allow(vg, "van_genuchten", {"alpha", "n", "m"});
            const double alpha = number(need(vg, "alpha", "van_genuchten"));
            const double nn = number(need(vg, "n", "van_genuchten"));
            const double m = vg["m"] ? number(vg["m"]) : 1.0 - 1.0 / nn;
            try {
                const auto fit = vg_to_bc(alpha, nn, m);
                p.h_d = fit.h_d;
                p.lambda = fit.lambda;
            } catch (const std::exception& e) {
                fail(vg, e.what());
            }
            p.beta = n["beta"] ? number(n["beta"]) : beta_from_lambda(p.lambda);
        } else {
            p.h_d = number(need(n, "h_d", "soil"));
            p.lambda = number(need(n, "lambda", "soil"));
            p.beta = n["beta"] ? number(n["beta"]) : beta_from_lambda(p.lambda);
        }
        if (n["theta_0"]) {
            const double t0 = number(n["theta_0"]);
            if (theta0) *theta0 = t0;
        }
        try {
            p.validate();
        } catch (const ConfigError& e) {
            fail(n, e.what());
        }
        return p;
    }

    const SoilTable& table(const std::string& name, const YAML::Node& where) {
        if (auto it = tables_.find(name); it != tables_.end()) return it->second;
        for (const auto& d : dirs_) {
            const fs::path p = d / (name + ".yaml");
            std::error_code ec;
            if (fs::is_regular_file(p, ec)) return tables_.emplace(name, parse_soil_table(p)).first->second;
        }
        fail(where, "soil table '" + name + "' not found in the table search path");
    }

    // "table/soil" reference or inline record.
    SoilParams soil(const YAML::Node& n, const Units& units) {
        if (n.IsScalar()) {
            const std::string ref = n.Scalar();
            const auto slash = ref.find('/');
            if (slash == std::string::npos) fail(n, "soil reference must look like 'table/soil', got '" + ref + "'");
            const SoilTable& t = table(ref.substr(0, slash), n);
            const SoilParams* p = t.find(ref.substr(slash + 1));
            if (!p) fail(n, "table '" + t.name + "' has no soil '" + ref.substr(slash + 1) + "'");
            if (!(t.units == units))
                fail(n, "unit mismatch: table '" + t.name + "' is in " + t.units.length + "/" + t.units.time +
                            " but the scenario uses " + units.length + "/" + units.time);
            return *p;
        }
        return soil_record(n);
    }

    const std::string& file() const { return file_; }

private:
    std::string file_;
    std::vector<fs::path> dirs_;
    std::map<std::string, SoilTable> tables_;
};

YAML::Node load(const std::string& text, const std::string& file) {
    try {
        return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(file, e.mark.line + 1, e.mark.column + 1, e.msg);
    }
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class E>
E enum_value(const Reader& r, const YAML::Node& n, std::initializer_list<std::pair<const char*, E>> options) {
    const std::string s = r.text(n);
    std::string names;
    for (const auto& [k, v] : options) {
        if (s == k) return v;
        names += names.empty() ? k : std::string(", ") + k;
    }
    r.fail(n, "unknown value '" + s + "' (expected one of: " + names + ")");
}

Geometry parse_geometry(Reader& r, const YAML::Node& g, const Units& units, const Extents& ext) {
    r.expect_map(g, "geometry");
    const std::string type = r.text(r.need(g, "type", "geometry"));
    if (type == "homogeneous") {
        r.allow(g, "geometry", {"type", "soil"});
        return Homogeneous{r.soil(r.need(g, "soil", "geometry"), units)};
    }
    if (type == "layered_z") {
        r.allow(g, "geometry", {"type", "layers"});
        const auto layers = r.need(g, "layers", "geometry");
        if (!layers.IsSequence() || layers.size() == 0) r.fail(layers, "layers must be a non-empty list");
        LayeredZ lz;
        for (const auto& l : layers) {
            r.allow(l, "layer", {"z_lo", "z_hi", "soil"});
            lz.layers.push_back(Layer{r.number(r.need(l, "z_lo", "layer")), r.number(r.need(l, "z_hi", "layer")),
                                      r.soil(r.need(l, "soil", "layer"), units)});
        }
        return lz;
    }
    if (type == "split_x") {
        r.allow(g, "geometry", {"type", "x_breaks", "z_interface", "upper", "lower"});
        return SplitX{r.numbers(r.need(g, "x_breaks", "geometry")), r.numbers(r.need(g, "z_interface", "geometry")),
                      r.soil(r.need(g, "upper", "geometry"), units), r.soil(r.need(g, "lower", "geometry"), units)};
    }
    if (type == "curvilinear") {
        r.allow(g, "geometry", {"type", "l1", "l2", "upper", "lower"});
        const double l1 = g["l1"] ? r.number(g["l1"]) : ext.l1;
        const double l2 = g["l2"] ? r.number(g["l2"]) : ext.L;
        return Curvilinear{l1, l2, r.soil(r.need(g, "upper", "geometry"), units),
                           r.soil(r.need(g, "lower", "geometry"), units)};
    }
    r.fail(g["type"], "unknown geometry type '" + type + "'");
}

InitialCondition parse_initial(const Reader& r, const YAML::Node& n) {
    r.allow(n, "initial", {"head", "water_content", "linear_head"});
    if (n.size() != 1) r.fail(n, "initial needs exactly one of head, water_content, linear_head");
    InitialCondition ic;
    if (n["head"]) {
        ic.kind = InitialCondition::Kind::head;
        ic.value = r.number(n["head"]);
    } else if (n["water_content"]) {
        ic.kind = InitialCondition::Kind::water_content;
        ic.value = r.number(n["water_content"]);
    } else {
        const auto l = n["linear_head"];
        r.allow(l, "linear_head", {"value", "slope"});
        ic.kind = InitialCondition::Kind::linear_head;
        ic.value = r.number(r.need(l, "value", "linear_head"));
        ic.slope = r.number(r.need(l, "slope", "linear_head"));
    }
    return ic;
}

Scenario parse_root(Reader& r, const YAML::Node& root) {
    r.allow(root, "scenario", {"name", "description", "units", "dims", "domain", "geometry", "initial", "boundary",
                               "lrbf", "grid", "time", "picard", "options", "oracle", "verify"});
    Scenario s;
    s.name = r.text(r.need(root, "name", "scenario"));
    if (root["description"]) s.description = r.text(root["description"]);
    s.units = r.units(r.need(root, "units", "scenario"));

    const auto dims = r.need(root, "dims", "scenario");
    s.extents.dims = r.integer(dims);
    if (s.extents.dims < 1 || s.extents.dims > 3) r.fail(dims, "dims must be 1, 2 or 3");
    const int d = s.extents.dims;

    const auto dom = r.need(root, "domain", "scenario");
    r.allow(dom, "domain", {"L", "l1", "l2"});
    s.extents.L = r.number(r.need(dom, "L", "domain"));
    if (d >= 2) s.extents.l1 = r.number(r.need(dom, "l1", "domain"));
    else if (dom["l1"]) r.fail(dom["l1"], "l1 given for a 1D scenario");
    if (d == 3) s.extents.l2 = r.number(r.need(dom, "l2", "domain"));
    else if (dom["l2"]) r.fail(dom["l2"], "l2 given for a scenario with dims < 3");
    if (!(s.extents.L > 0.0)) r.fail(dom, "L must be positive");
    if (d >= 2 && !(s.extents.l1 > 0.0)) r.fail(dom, "l1 must be positive");
    if (d == 3 && !(s.extents.l2 > 0.0)) r.fail(dom, "l2 must be positive");

    const auto geo = r.need(root, "geometry", "scenario");
    s.geometry = parse_geometry(r, geo, s.units, s.extents);
    try {
        SoilField f(s.geometry, s.extents);
    } catch (const ConfigError& e) {
        r.fail(geo, e.what());
    }

    const auto ini = r.need(root, "initial", "scenario");
    s.initial = parse_initial(r, ini);

    if (const auto b = root["boundary"]) {
        r.allow(b, "boundary", {"top_head", "bottom_head"});
        if (b["top_head"]) s.boundary.top_head = r.number(b["top_head"]);
        if (b["bottom_head"]) s.boundary.bottom_head = r.number(b["bottom_head"]);
    }

    const auto lr = r.need(root, "lrbf", "scenario");
    r.allow(lr, "lrbf", {"c", "n_s"});
    s.c = r.number(r.need(lr, "c", "lrbf"));
    s.n_s = r.integer(r.need(lr, "n_s", "lrbf"));

    const auto grid = r.need(root, "grid", "scenario");
    r.allow(grid, "grid", {"Nx", "Ny", "Nz"});
    s.counts[2] = r.integer(r.need(grid, "Nz", "grid"));
    if (d >= 2) s.counts[0] = r.integer(r.need(grid, "Nx", "grid"));
    else if (grid["Nx"]) r.fail(grid["Nx"], "Nx given for a 1D scenario");
    if (d == 3) s.counts[1] = r.integer(r.need(grid, "Ny", "grid"));
    else if (grid["Ny"]) r.fail(grid["Ny"], "Ny given for a scenario with dims < 3");

    const auto time = r.need(root, "time", "scenario");
    r.allow(time, "time", {"dt", "t_end", "outputs"});
    s.stepper.dt = r.number(r.need(time, "dt", "time"));
    s.t_end = r.number(r.need(time, "t_end", "time"));
    s.output_times = time["outputs"] ? r.numbers(time["outputs"]) : std::vector<double>{s.t_end};

    if (const auto p = root["picard"]) {
        r.allow(p, "picard", {"tol", "max_iterations"});
        if (p["tol"]) s.stepper.tol = r.number(p["tol"]);
        if (p["max_iterations"]) s.stepper.max_picard = r.integer(p["max_iterations"]);
    }
    if (const auto o = root["options"]) {
        r.allow(o, "options", {"scheme", "interface", "solver", "residual_tol"});
        if (o["scheme"])
            s.stepper.scheme = enum_value<TimeScheme>(
                r, o["scheme"], {{"conservative", TimeScheme::conservative}, {"chord", TimeScheme::chord}});
        if (o["interface"])
            s.stepper.interface = enum_value<InterfaceFlux>(
                r, o["interface"], {{"series", InterfaceFlux::series}, {"averaged", InterfaceFlux::averaged}});
        if (o["solver"])
            s.stepper.solver.kind = enum_value<SolverKind>(r, o["solver"],
                                                           {{"automatic", SolverKind::automatic},
                                                            {"direct", SolverKind::direct},
                                                            {"iterative", SolverKind::iterative}});
        if (o["residual_tol"]) s.stepper.solver.residual_tol = r.number(o["residual_tol"]);
    }
    if (const auto o = root["oracle"]) {
        r.allow(o, "oracle", {"nodes", "dt", "tol", "max_iterations", "mean"});
        if (o["nodes"]) s.oracle.nodes = r.integer(o["nodes"]);
        if (o["dt"]) s.oracle.dt = r.number(o["dt"]);
        if (o["tol"]) s.oracle.tol = r.number(o["tol"]);
        if (o["max_iterations"]) s.oracle.max_iterations = r.integer(o["max_iterations"]);
        if (o["mean"])
            s.oracle.mean = enum_value<ConductivityMean>(
                r, o["mean"], {{"integral", ConductivityMean::integral}, {"arithmetic", ConductivityMean::arithmetic}});
    }
    if (const auto v = root["verify"]) {
        r.allow(v, "verify", {"rmse_max", "l1_max", "mass_balance_max", "mass_compare_max", "mass_compare_until"});
        if (v["rmse_max"]) s.thresholds.rmse_max = r.number(v["rmse_max"]);
        if (v["l1_max"]) s.thresholds.l1_max = r.number(v["l1_max"]);
        if (v["mass_balance_max"]) s.thresholds.mass_balance_max = r.number(v["mass_balance_max"]);
        if (v["mass_compare_max"]) s.thresholds.mass_compare_max = r.number(v["mass_compare_max"]);
        if (v["mass_compare_until"]) s.thresholds.mass_compare_until = r.number(v["mass_compare_until"]);
    }

    // Section-level checks with their own locations first, then the whole-scenario pass.
    try {
        s.stepper.validate();
    } catch (const ConfigError& e) {
        r.fail(time, e.what());
    }
    try {
        s.validate();
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        if (msg.find("output") != std::string::npos || msg.find("t_end") != std::string::npos) r.fail(time, msg);
        if (msg.find("initial") != std::string::npos) r.fail(ini, msg);
        if (msg.find("grid") != std::string::npos) r.fail(grid, msg);
        if (msg.find("n_s") != std::string::npos || msg.find("shape") != std::string::npos) r.fail(lr, msg);
        r.fail(root, msg);
    }
    return s;
}

// ---- writing ---------------------------------------------------------------------------

// Shortest text that reads back to the same double.
std::string num(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
}

void emit_soil(YAML::Emitter& e, const SoilParams& p) {
    e << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << p.name;
    e << YAML::Key << "theta_r" << YAML::Value << num(p.theta_r);
    e << YAML::Key << "theta_s" << YAML::Value << num(p.theta_s);
    e << YAML::Key << "k_s" << YAML::Value << num(p.k_s);
    e << YAML::Key << "h_d" << YAML::Value << num(p.h_d);
    e << YAML::Key << "lambda" << YAML::Value << num(p.lambda);
    e << YAML::Key << "beta" << YAML::Value << num(p.beta);
    e << YAML::EndMap;
}

void emit_numbers(YAML::Emitter& e, const std::vector<double>& v) {
    e << YAML::Flow << YAML::BeginSeq;
    for (double x : v) e << num(x);
    e << YAML::EndSeq;
}

const char* name_of(TimeScheme s) { return s == TimeScheme::conservative ? "conservative" : "chord"; }
const char* name_of(InterfaceFlux f) { return f == InterfaceFlux::series ? "series" : "averaged"; }
const char* name_of(SolverKind k) {
    switch (k) {
        case SolverKind::direct: return "direct";
        case SolverKind::iterative: return "iterative";
        default: return "automatic";
    }
}
const char* name_of(ConductivityMean m) { return m == ConductivityMean::integral ? "integral" : "arithmetic"; }

}  // namespace

// ---- public ----------------------------------------------------------------------------

void Scenario::validate() const {
    if (name.empty()) throw ConfigError("scenario name is empty");
    const int d = extents.dims;
    if (d < 1 || d > 3) throw ConfigError("dims must be 1, 2 or 3");
    const SoilField f = field();
    if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
    if (output_times.empty()) throw ConfigError("at least one output time is required");
    for (std::size_t k = 0; k < output_times.size(); ++k) {
        if (!(output_times[k] > 0.0)) throw ConfigError("output times must be positive");
        if (output_times[k] > t_end * (1.0 + 1e-12)) throw ConfigError("output time beyond t_end");
        if (k > 0 && !(output_times[k] > output_times[k - 1])) throw ConfigError("output times must increase");
    }
    const int active[3] = {d >= 2, d == 3, 1};
    for (int a = 0; a < 3; ++a) {
        if (active[a] && counts[static_cast<std::size_t>(a)] < 3) throw ConfigError("grid needs at least 3 nodes per active axis");
        if (!active[a] && counts[static_cast<std::size_t>(a)] != 1) throw ConfigError("grid count on an inactive axis must be 1");
    }
    if (n_s < 2 * d + 1) throw ConfigError("n_s must be at least 2*dims + 1");
    KernelConfig kc;
    kc.c = c;
    kc.validate();
    stepper.validate();
    for (const auto& m : f.materials()) {
        if (initial.kind == InitialCondition::Kind::water_content &&
            !(initial.value > m.theta_r && initial.value <= m.theta_s))
            throw ConfigError("initial water content outside (theta_r, theta_s] of soil '" + m.name + "'");
    }
    if (initial.kind == InitialCondition::Kind::head && initial.value > 0.0)
        throw ConfigError("initial head must be non-positive");
    if (oracle.nodes != 0 && oracle.nodes < 3) throw ConfigError("oracle nodes must be 0 (automatic) or >= 3");
    if (oracle.dt < 0.0) throw ConfigError("oracle dt must be >= 0");
    if (thresholds.mass_compare_until && !(*thresholds.mass_compare_until > 0.0))
        throw ConfigError("mass_compare_until must be positive");
}

std::vector<fs::path> default_table_dirs() {
    std::vector<fs::path> d;
    if (const char* env = std::getenv("KIRFLOW_DATA_DIR")) d.emplace_back(fs::path(env) / "soils");
#ifdef KIRFLOW_SOURCE_DATA_DIR
    d.emplace_back(fs::path(KIRFLOW_SOURCE_DATA_DIR) / "soils");
#endif
#ifdef KIRFLOW_INSTALL_DATA_DIR
    d.emplace_back(fs::path(KIRFLOW_INSTALL_DATA_DIR) / "soils");
#endif
    return d;
}

SoilTable parse_soil_table(const fs::path& path) {
    const std::string file = path.string();
    Reader r(file, {});
    const YAML::Node root = load(read_file(path), file);
    r.allow(root, "soil table", {"name", "description", "units", "soils"});
    SoilTable t;
    t.name = r.text(r.need(root, "name", "soil table"));
    if (root["description"]) t.description = r.text(root["description"]);
    t.units = r.units(r.need(root, "units", "soil table"));
    const auto soils = r.need(root, "soils", "soil table");
    if (!soils.IsSequence() || soils.size() == 0) r.fail(soils, "soils must be a non-empty list");
    for (const auto& s : soils) {
        if (!s["name"]) r.fail(s, "table records need a name");
        std::optional<double> t0;
        SoilParams p = r.soil_record(s, &t0);
        if (t.find(p.name)) r.fail(s, "duplicate soil name '" + p.name + "'");
        if (t0 && !(*t0 > p.theta_r && *t0 <= p.theta_s)) r.fail(s["theta_0"], "theta_0 outside (theta_r, theta_s]");
        t.soils.push_back(std::move(p));
        t.theta_0.push_back(t0);
    }
    return t;
}

std::vector<SoilTable> list_soil_tables(const std::vector<fs::path>& dirs) {
    std::vector<SoilTable> out;
    std::set<std::string> seen;
    for (const auto& d : dirs) {
        std::error_code ec;
        if (!fs::is_directory(d, ec)) continue;
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(d))
            if (e.path().extension() == ".yaml") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            SoilTable t = parse_soil_table(f);
            if (seen.insert(t.name).second) out.push_back(std::move(t));
        }
    }
    return out;
}

Scenario parse_scenario_text(const std::string& text, const std::string& name, const ParseOptions& opt) {
    std::vector<fs::path> dirs = opt.table_dirs;
    for (auto& d : default_table_dirs()) dirs.push_back(std::move(d));
    Reader r(name, dirs);
    const YAML::Node root = load(text, name);
    if (!root || root.IsNull()) throw ParseError(name, 1, 1, "empty scenario");
    return parse_root(r, root);
}

Scenario parse_scenario(const fs::path& path, const ParseOptions& opt) {
    ParseOptions o;
    const fs::path dir = path.parent_path();
    o.table_dirs = {dir / "soils", dir.parent_path() / "soils"};
    for (const auto& d : opt.table_dirs) o.table_dirs.push_back(d);
    return parse_scenario_text(read_file(path), path.string(), o);
}

std::string serialize_scenario(const Scenario& s) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << s.name;
    if (!s.description.empty()) e << YAML::Key << "description" << YAML::Value << s.description;
    e << YAML::Key << "units" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "length" << YAML::Value
      << s.units.length << YAML::Key << "time" << YAML::Value << s.units.time << YAML::EndMap;
    const int d = s.extents.dims;
    e << YAML::Key << "dims" << YAML::Value << d;
    e << YAML::Key << "domain" << YAML::Value << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "L" << YAML::Value << num(s.extents.L);
    if (d >= 2) e << YAML::Key << "l1" << YAML::Value << num(s.extents.l1);
    if (d == 3) e << YAML::Key << "l2" << YAML::Value << num(s.extents.l2);
    e << YAML::EndMap;

    e << YAML::Key << "geometry" << YAML::Value << YAML::BeginMap;
    std::visit(
        [&](const auto& g) {
            using G = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<G, Homogeneous>) {
                e << YAML::Key << "type" << YAML::Value << "homogeneous";
                e << YAML::Key << "soil" << YAML::Value;
                emit_soil(e, g.soil);
            } else if constexpr (std::is_same_v<G, LayeredZ>) {
                e << YAML::Key << "type" << YAML::Value << "layered_z";
                e << YAML::Key << "layers" << YAML::Value << YAML::BeginSeq;
                for (const auto& l : g.layers) {
                    e << YAML::BeginMap << YAML::Key << "z_lo" << YAML::Value << num(l.z_lo) << YAML::Key << "z_hi"
                      << YAML::Value << num(l.z_hi) << YAML::Key << "soil" << YAML::Value;
                    emit_soil(e, l.soil);
                    e << YAML::EndMap;
                }
                e << YAML::EndSeq;
            } else if constexpr (std::is_same_v<G, SplitX>) {
                e << YAML::Key << "type" << YAML::Value << "split_x";
                e << YAML::Key << "x_breaks" << YAML::Value;
                emit_numbers(e, g.x_breaks);
                e << YAML::Key << "z_interface" << YAML::Value;
                emit_numbers(e, g.z_interface);
                e << YAML::Key << "upper" << YAML::Value;
                emit_soil(e, g.upper);
                e << YAML::Key << "lower" << YAML::Value;
                emit_soil(e, g.lower);
            } else {
                e << YAML::Key << "type" << YAML::Value << "curvilinear";
                e << YAML::Key << "l1" << YAML::Value << num(g.l1);
                e << YAML::Key << "l2" << YAML::Value << num(g.l2);
                e << YAML::Key << "upper" << YAML::Value;
                emit_soil(e, g.upper);
                e << YAML::Key << "lower" << YAML::Value;
                emit_soil(e, g.lower);
            }
        },
        s.geometry);
    e << YAML::EndMap;

    e << YAML::Key << "initial" << YAML::Value << YAML::Flow << YAML::BeginMap;
    switch (s.initial.kind) {
        case InitialCondition::Kind::head: e << YAML::Key << "head" << YAML::Value << num(s.initial.value); break;
        case InitialCondition::Kind::water_content:
            e << YAML::Key << "water_content" << YAML::Value << num(s.initial.value);
            break;
        case InitialCondition::Kind::linear_head:
            e << YAML::Key << "linear_head" << YAML::Value << YAML::BeginMap << YAML::Key << "value" << YAML::Value
              << num(s.initial.value) << YAML::Key << "slope" << YAML::Value << num(s.initial.slope) << YAML::EndMap;
            break;
    }
    e << YAML::EndMap;

    e << YAML::Key << "boundary" << YAML::Value << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "top_head" << YAML::Value << num(s.boundary.top_head);
    if (s.boundary.bottom_head) e << YAML::Key << "bottom_head" << YAML::Value << num(*s.boundary.bottom_head);
    e << YAML::EndMap;

    e << YAML::Key << "lrbf" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "c" << YAML::Value
      << num(s.c) << YAML::Key << "n_s" << YAML::Value << s.n_s << YAML::EndMap;

    e << YAML::Key << "grid" << YAML::Value << YAML::Flow << YAML::BeginMap;
    if (d >= 2) e << YAML::Key << "Nx" << YAML::Value << s.counts[0];
    if (d == 3) e << YAML::Key << "Ny" << YAML::Value << s.counts[1];
    e << YAML::Key << "Nz" << YAML::Value << s.counts[2] << YAML::EndMap;

    e << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "dt" << YAML::Value << num(s.stepper.dt);
    e << YAML::Key << "t_end" << YAML::Value << num(s.t_end);
    e << YAML::Key << "outputs" << YAML::Value;
    emit_numbers(e, s.output_times);
    e << YAML::EndMap;

    e << YAML::Key << "picard" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "tol" << YAML::Value
      << num(s.stepper.tol) << YAML::Key << "max_iterations" << YAML::Value << s.stepper.max_picard << YAML::EndMap;

    e << YAML::Key << "options" << YAML::Value << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "scheme" << YAML::Value << name_of(s.stepper.scheme);
    e << YAML::Key << "interface" << YAML::Value << name_of(s.stepper.interface);
    e << YAML::Key << "solver" << YAML::Value << name_of(s.stepper.solver.kind);
    e << YAML::Key << "residual_tol" << YAML::Value << num(s.stepper.solver.residual_tol);
    e << YAML::EndMap;

    e << YAML::Key << "oracle" << YAML::Value << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "nodes" << YAML::Value << s.oracle.nodes;
    e << YAML::Key << "dt" << YAML::Value << num(s.oracle.dt);
    e << YAML::Key << "tol" << YAML::Value << num(s.oracle.tol);
    e << YAML::Key << "max_iterations" << YAML::Value << s.oracle.max_iterations;
    e << YAML::Key << "mean" << YAML::Value << name_of(s.oracle.mean);
    e << YAML::EndMap;

    const auto& t = s.thresholds;
    if (t.rmse_max || t.l1_max || t.mass_balance_max || t.mass_compare_max || t.mass_compare_until) {
        e << YAML::Key << "verify" << YAML::Value << YAML::Flow << YAML::BeginMap;
        if (t.rmse_max) e << YAML::Key << "rmse_max" << YAML::Value << num(*t.rmse_max);
        if (t.l1_max) e << YAML::Key << "l1_max" << YAML::Value << num(*t.l1_max);
        if (t.mass_balance_max) e << YAML::Key << "mass_balance_max" << YAML::Value << num(*t.mass_balance_max);
        if (t.mass_compare_max) e << YAML::Key << "mass_compare_max" << YAML::Value << num(*t.mass_compare_max);
        if (t.mass_compare_until)
            e << YAML::Key << "mass_compare_until" << YAML::Value << num(*t.mass_compare_until);
        e << YAML::EndMap;
    }
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

Scenario apply_overrides(Scenario s, const Overrides& o) {
    if (o.grid_scale) {
        const double f = *o.grid_scale;
        if (!(f > 0.0)) throw ConfigError("grid scale must be positive");
        auto scale = [f](int n) { return std::max(3, static_cast<int>(std::lround((n - 1) * f)) + 1); };
        for (auto& n : s.counts)
            if (n > 1) n = scale(n);
        if (s.oracle.nodes > 0) s.oracle.nodes = scale(s.oracle.nodes);
    }
    if (o.dt) {
        if (!(*o.dt > 0.0)) throw ConfigError("dt override must be positive");
        s.stepper.dt = *o.dt;
    }
    if (o.t_end) {
        if (!(*o.t_end > 0.0)) throw ConfigError("t_end override must be positive");
        s.t_end = *o.t_end;
        std::vector<double> keep;
        for (double t : s.output_times)
            if (t < s.t_end * (1.0 - 1e-12)) keep.push_back(t);
        keep.push_back(s.t_end);
        s.output_times = keep;
    }
    s.validate();
    return s;
}

}  // namespace kirflow
