#include "kirflow/driver.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "kirflow/errors.hpp"
#include "kirflow/kirchhoff.hpp"
#include "kirflow/metrics.hpp"

namespace kirflow {

namespace {

// Mass at time t from a (times, mass) series with mass[0] at t = 0.
double mass_at(const std::vector<double>& times, const std::vector<double>& mass, double t) {
    if (t <= 0.0 || times.empty()) return mass.front();
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end()) return mass.back();
    const std::size_t k = static_cast<std::size_t>(it - times.begin());   // mass[k + 1] belongs to times[k]
    const double t1 = times[k], m1 = mass[k + 1];
    const double t0 = k == 0 ? 0.0 : times[k - 1], m0 = mass[k];
    if (t1 - t0 <= 0.0) return m1;
    return m0 + (m1 - m0) * (t - t0) / (t1 - t0);
}

struct Column {
    double x;
    double weight;
};

// Columns representing the horizontal variation of the geometry, weights summing to 1.
std::vector<Column> matched_columns(const Scenario& s, bool& laterally_varying) {
    laterally_varying = false;
    if (s.extents.dims == 1) return {{0.0, 1.0}};
    if (const auto* g = std::get_if<SplitX>(&s.geometry)) {
        laterally_varying = true;
        // strip weights from the solver's own cross-section quadrature
        const int nx = s.counts[0];
        const auto w = mean_weights(nx);
        std::vector<double> lo{0.0}, hi;
        for (double b : g->x_breaks) {
            hi.push_back(b);
            lo.push_back(b);
        }
        hi.push_back(s.extents.l1);
        std::vector<Column> cols;
        for (std::size_t k = 0; k < lo.size(); ++k) {
            double acc = 0.0;
            for (int i = 0; i < nx; ++i) {
                const double x = s.extents.l1 * i / (nx - 1);
                const bool in = k == 0 ? x <= hi[k] : (x > lo[k] && x <= hi[k]);
                if (in) acc += w[static_cast<std::size_t>(i)];
            }
            cols.push_back({0.5 * (lo[k] + hi[k]), acc});
        }
        return cols;
    }
    if (std::holds_alternative<Curvilinear>(s.geometry)) {
        laterally_varying = true;
        // 6-point Gauss-Legendre in x
        static const std::array<double, 6> node{-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                                                0.2386191860831969,  0.6612093864662645,  0.9324695142031521};
        static const std::array<double, 6> weight{0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
                                                  0.4679139345726910, 0.3607615730481386, 0.1713244923791704};
        std::vector<Column> cols;
        for (std::size_t k = 0; k < node.size(); ++k)
            cols.push_back({0.5 * s.extents.l1 * (1.0 + node[k]), 0.5 * weight[k]});
        return cols;
    }
    return {{0.0, 1.0}};
}

// Elevations of material changes in a column, top-most last.
std::vector<double> interfaces(const OracleProblem& pb) {
    std::vector<double> z;
    for (std::size_t k = 1; k < pb.layers.size(); ++k) z.push_back(pb.layers[k].z_lo);
    return z;
}

struct FileReference {
    std::map<double, std::pair<std::vector<double>, std::vector<double>>> profiles;   // time -> (z, theta)
};

FileReference read_reference(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw IoError("cannot open reference file " + p.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError(p.string(), 1, 1, "reference file is empty");
    std::vector<std::string> head;
    {
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) {
            while (!c.empty() && (c.back() == '\r' || c.back() == ' ')) c.pop_back();
            while (!c.empty() && c.front() == ' ') c.erase(c.begin());
            head.push_back(c);
        }
    }
    auto col = [&](const char* name) {
        const auto it = std::find(head.begin(), head.end(), name);
        if (it == head.end()) throw ParseError(p.string(), 1, 1, std::string("reference header lacks column '") + name + "'");
        return static_cast<std::size_t>(it - head.begin());
    };
    const std::size_t ct = col("time"), cz = col("z"), cth = col("theta");
    FileReference ref;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<double> v;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) {
            try {
                v.push_back(std::stod(c));
            } catch (const std::exception&) {
                throw ParseError(p.string(), lineno, static_cast<int>(v.size()) + 1, "not a number: '" + c + "'");
            }
        }
        if (v.size() != head.size()) throw ParseError(p.string(), lineno, 1, "wrong number of columns");
        auto& prof = ref.profiles[v[ct]];
        if (!prof.first.empty() && !(v[cz] > prof.first.back()))
            throw ParseError(p.string(), lineno, static_cast<int>(cz) + 1, "z must increase within a time block");
        prof.first.push_back(v[cz]);
        prof.second.push_back(v[cth]);
    }
    return ref;
}

}  // namespace

OracleProblem oracle_column(const Scenario& s, double x) {
    OracleProblem pb;
    pb.L = s.extents.L;
    pb.initial = s.initial;
    pb.boundary = s.boundary;
    pb.t_end = s.t_end;
    pb.output_times = s.output_times;
    auto two_layer = [&](double zi, const SoilParams& lower, const SoilParams& upper) {
        if (zi <= 0.0) return std::vector<Layer>{{0.0, pb.L, upper}};
        if (zi >= pb.L) return std::vector<Layer>{{0.0, pb.L, lower}};
        return std::vector<Layer>{{0.0, zi, lower}, {zi, pb.L, upper}};
    };
    std::visit(
        [&](const auto& g) {
            using G = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<G, Homogeneous>) {
                pb.layers = {{0.0, pb.L, g.soil}};
            } else if constexpr (std::is_same_v<G, LayeredZ>) {
                pb.layers = g.layers;
            } else if constexpr (std::is_same_v<G, SplitX>) {
                std::size_t strip = 0;
                while (strip < g.x_breaks.size() && x > g.x_breaks[strip]) ++strip;
                pb.layers = two_layer(g.z_interface[strip], g.lower, g.upper);
            } else {
                const SoilField f(g, s.extents);
                pb.layers = two_layer(f.xi(x), g.lower, g.upper);
            }
        },
        s.geometry);
    return pb;
}

OracleConfig oracle_config(const Scenario& s) {
    OracleConfig c = s.oracle;
    if (c.nodes == 0) c.nodes = 4 * (s.counts[2] - 1) + 1;
    if (c.dt == 0.0) c.dt = s.stepper.dt / 10.0;
    return c;
}

RunReport run_scenario(const Scenario& s, const RunSettings& settings) {
    s.validate();
    const auto clock0 = std::chrono::steady_clock::now();
    RunReport rep;
    rep.scenario = s;
    const SoilField field = s.field();
    rep.cloud = build_grid(s.extents, s.counts);
    const PointCloud& cloud = rep.cloud;
    rep.h_bar = compute_h_bar(field, s.counts);
    const TransformContext ctx(field, cloud.nodes, rep.h_bar);
    KernelConfig kc;
    kc.c = s.c;
    const LrbfOperators ops(cloud, static_cast<std::size_t>(s.n_s), kc);
    rep.diagnostics = ops.diagnostics();

    Stepper stepper(cloud, ctx, ops, boundary_values(cloud, ctx, s.boundary, s.initial), s.stepper);
    const KirchhoffState init = initial_state(cloud, ctx, s.initial);
    RunOptions ro;
    ro.t_end = s.t_end;
    ro.output_times = s.output_times;
    ro.on_step = settings.on_step;
    const RunResult rr = run(stepper, init, ro);

    for (std::size_t k = 0; k < rr.outputs.size(); ++k) {
        OutputSnapshot snap;
        snap.time = s.output_times[k];
        snap.state = rr.outputs[k];
        snap.theta = water_contents(snap.state, ctx);
        snap.S.resize(cloud.size());
        for (std::size_t i = 0; i < cloud.size(); ++i) snap.S[i] = saturation(snap.state.h[i], ctx.soil(i));
        rep.outputs.push_back(std::move(snap));
    }
    rep.step_times = rr.times;
    rep.iterations = rr.iterations;
    rep.mass = rr.mass;
    rep.net_inflow = rr.net_inflow;
    rep.solver_stats = stepper.stats();
    const double I_T = rep.mass.back();
    const double net = rep.net_inflow.empty() ? 0.0 : rep.net_inflow.back();
    rep.mass_balance_error = std::abs(I_T - rep.mass.front() - net) / I_T;
    for (std::size_t k = 1; k < rep.mass.size(); ++k)
        if (rep.mass[k] < rep.mass[k - 1] - 1e-12 * std::abs(rep.mass[k - 1])) rep.mass_nondecreasing = false;

    if (settings.reference == ReferenceKind::file) {
        if (s.extents.dims != 1) throw ConfigError("profile reference files are supported for 1D scenarios only");
        const FileReference ref = read_reference(settings.reference_file);
        std::vector<double> z(cloud.size());
        for (std::size_t i = 0; i < cloud.size(); ++i) z[i] = cloud.nodes[i][2];
        for (const auto& snap : rep.outputs) {
            for (const auto& [t, prof] : ref.profiles) {
                if (std::abs(t - snap.time) > 1e-9 * std::max(1.0, std::abs(t))) continue;
                const auto th = resample(prof.first, prof.second, z);
                rep.metrics.push_back({snap.time, metric_rmse(snap.theta, th), metric_l1(snap.theta, th)});
            }
        }
    } else if (settings.reference == ReferenceKind::oracle) {
        bool varying = false;
        const auto cols = matched_columns(s, varying);
        const OracleConfig oc = oracle_config(s);
        MassComparison mc;
        mc.columns = static_cast<int>(cols.size());
        std::vector<std::vector<double>> col_times, col_mass;
        double arrival = -1.0;
        for (const auto& c : cols) {
            OracleProblem pb = oracle_column(s, c.x);
            // wetting of the node just above the uppermost interface marks the end of the
            // phase in which columns evolve independently
            std::size_t watch = 0;
            double theta0 = 0.0, threshold = 0.0;
            const auto zi = interfaces(pb);
            if (varying && !zi.empty()) {
                const double dz = pb.L / (oc.nodes - 1);
                watch = static_cast<std::size_t>(std::floor(zi.back() / dz)) + 1;
                const SoilParams& up = pb.layers.back().soil;
                theta0 = water_content(saturation(pb.initial.head_at(up, watch * dz), up), up);
                threshold = 1e-3 * up.capacity();
                pb.on_step = [&, watch, theta0, threshold](double t, const std::vector<double>& th) {
                    if (th[watch] - theta0 > threshold && (arrival < 0.0 || t < arrival)) arrival = t;
                };
            }
            const OracleResult res = oracle_solve_1d(pb, oc);
            if (s.extents.dims == 1) {
                std::vector<double> z(cloud.size());
                for (std::size_t i = 0; i < cloud.size(); ++i) z[i] = cloud.nodes[i][2];
                for (std::size_t k = 0; k < rep.outputs.size() && k < res.outputs.size(); ++k) {
                    const auto th = resample(res.z, res.outputs[k].theta, z);
                    rep.metrics.push_back(
                        {rep.outputs[k].time, metric_rmse(rep.outputs[k].theta, th), metric_l1(rep.outputs[k].theta, th)});
                }
                const double net_o = res.net_inflow.empty() ? 0.0 : res.net_inflow.back();
                rep.oracle_mass_balance_error = std::abs(res.mass.back() - res.mass.front() - net_o) / res.mass.back();
            }
            col_times.push_back(res.times);
            col_mass.push_back(res.mass);
        }
        mc.front_arrival = arrival;
        mc.window = s.thresholds.mass_compare_until ? std::min(*s.thresholds.mass_compare_until, s.t_end) : s.t_end;
        if (arrival >= 0.0) mc.window = std::min(mc.window, arrival);
        auto ref_mass = [&](double t) {
            double acc = 0.0;
            for (std::size_t k = 0; k < cols.size(); ++k) acc += cols[k].weight * mass_at(col_times[k], col_mass[k], t);
            return acc;
        };
        mc.times.push_back(0.0);
        mc.solver.push_back(rep.mass.front());
        mc.oracle.push_back(ref_mass(0.0));
        for (std::size_t k = 0; k < rep.step_times.size(); ++k) {
            if (rep.step_times[k] > mc.window * (1.0 + 1e-12)) break;
            mc.times.push_back(rep.step_times[k]);
            mc.solver.push_back(rep.mass[k + 1]);
            mc.oracle.push_back(ref_mass(rep.step_times[k]));
        }
        for (std::size_t k = 0; k < mc.times.size(); ++k)
            mc.max_rel_gap = std::max(mc.max_rel_gap, std::abs(mc.solver[k] - mc.oracle[k]) / mc.oracle[k]);
        const double du = mc.solver.back() - mc.solver.front(), du_ref = mc.oracle.back() - mc.oracle.front();
        mc.uptake_rel_gap = du_ref != 0.0 ? std::abs(du - du_ref) / std::abs(du_ref) : 0.0;
        rep.mass_comparison = std::move(mc);
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0).count();
    return rep;
}

double median_iterations(const std::vector<int>& its) {
    if (its.empty()) return 0.0;
    std::vector<int> v = its;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<Check> evaluate(const RunReport& r) {
    const auto& th = r.scenario.thresholds;
    std::vector<Check> out;
    auto add = [&](std::string name, double value, std::optional<double> limit, bool extra_ok = true) {
        Check c{std::move(name), value, limit, extra_ok};
        if (limit) c.pass = c.pass && value <= *limit;
        out.push_back(std::move(c));
    };
    add("mass_balance", r.mass_balance_error, th.mass_balance_max);
    const int cap = r.scenario.stepper.max_picard;
    const int worst = r.iterations.empty() ? 0 : *std::max_element(r.iterations.begin(), r.iterations.end());
    add("picard_max", worst, cap);
    add("picard_median", median_iterations(r.iterations), std::nullopt);
    double smin = 1.0, smax = 0.0;
    for (const auto& o : r.outputs)
        for (double S : o.S) {
            smin = std::min(smin, S);
            smax = std::max(smax, S);
        }
    add("saturation_min", smin, std::nullopt, smin > 0.0);
    add("saturation_max", smax, 1.0);
    for (const auto& m : r.metrics) {
        std::ostringstream t;
        t << m.time;
        add("rmse@" + t.str(), m.rmse, th.rmse_max);
        add("l1er@" + t.str(), m.l1, th.l1_max);
    }
    if (r.mass_comparison) {
        add("mass_gap", r.mass_comparison->max_rel_gap, th.mass_compare_max);
        add("uptake_gap", r.mass_comparison->uptake_rel_gap, std::nullopt);
    }
    return out;
}

}  // namespace kirflow
