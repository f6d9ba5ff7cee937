#include "kirflow/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "kirflow/errors.hpp"

namespace kirflow {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, p);
}

namespace {

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + p.string() + " for writing");
    out << text;
    out.close();
    if (!out) throw IoError("failed writing " + p.string());
}

std::string index_tag(std::size_t k, std::size_t n) {
    const int width = n < 10 ? 1 : n < 100 ? 2 : 3;
    std::string s = std::to_string(k);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

std::string profile_csv(const RunReport& r, const OutputSnapshot& o) {
    const auto& c = r.cloud;
    const int d = c.dims();
    std::string s;
    s.reserve(c.size() * 96);
    s += d == 1 ? "z" : d == 2 ? "x,z" : "x,y,z";
    s += ",theta,h,S,u\n";
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto& p = c.nodes[i];
        if (d >= 2) s += format_double(p[0]) + ",";
        if (d == 3) s += format_double(p[1]) + ",";
        s += format_double(p[2]);
        s += "," + format_double(o.theta[i]) + "," + format_double(o.state.h[i]) + "," + format_double(o.S[i]) + "," +
             format_double(o.state.u[i]) + "\n";
    }
    return s;
}

// Legacy VTK structured points over the node subset ix in [x0, x1).
std::string vtk_grid(const RunReport& r, const OutputSnapshot& o, int x0, int x1, const std::string& title) {
    const auto& c = r.cloud;
    const int nx = x1 - x0, ny = c.counts[1], nz = c.counts[2];
    std::ostringstream h;
    h << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    h << "DIMENSIONS " << nx << " " << ny << " " << nz << "\n";
    h << "ORIGIN " << format_double(c.dims() >= 2 ? c.nodes[c.index(x0, 0, 0)][0] : 0.0) << " 0 0\n";
    auto sp = [&](int a) { return format_double(c.counts[a] > 1 ? c.spacing[a] : 1.0); };
    h << "SPACING " << sp(0) << " " << sp(1) << " " << sp(2) << "\n";
    h << "POINT_DATA " << static_cast<long>(nx) * ny * nz << "\n";
    std::string s = h.str();
    auto field = [&](const char* name, const std::vector<double>& v) {
        s += "SCALARS ";
        s += name;
        s += " double 1\nLOOKUP_TABLE default\n";
        for (int iz = 0; iz < nz; ++iz)
            for (int iy = 0; iy < ny; ++iy)
                for (int ix = x0; ix < x1; ++ix) {
                    s += format_double(v[c.index(ix, iy, iz)]);
                    s += '\n';
                }
    };
    field("theta", o.theta);
    field("h", o.state.h);
    field("S", o.S);
    field("u", o.state.u);
    return s;
}

}  // namespace

std::string summary_json(const RunReport& r, const std::vector<std::string>& files) {
    const Scenario& s = r.scenario;
    json j;
    j["name"] = s.name;
    j["dims"] = s.extents.dims;
    j["units"] = {{"length", s.units.length}, {"time", s.units.time}};
    j["grid"] = {{"Nx", s.counts[0]}, {"Ny", s.counts[1]}, {"Nz", s.counts[2]}, {"nodes", r.cloud.size()}};
    j["dt"] = s.stepper.dt;
    j["t_end"] = s.t_end;
    j["c"] = s.c;
    j["n_s"] = s.n_s;
    j["h_bar"] = r.h_bar;
    j["lrbf"] = {{"max_condition", r.diagnostics.max_condition},
                 {"worst_node", r.diagnostics.worst_node},
                 {"distinct_domains", r.diagnostics.distinct_domains},
                 {"stencils_outside_domain", r.diagnostics.stencils_outside_domain},
                 {"max_selection_defect", r.diagnostics.max_selection_defect}};
    json outs = json::array();
    for (const auto& o : r.outputs) outs.push_back(o.time);
    j["output_times"] = outs;

    int worst = 0;
    long total = 0;
    for (int k : r.iterations) {
        worst = std::max(worst, k);
        total += k;
    }
    j["picard"] = {{"steps", r.iterations.size()},
                   {"max", worst},
                   {"median", median_iterations(r.iterations)},
                   {"total", total},
                   {"per_step", r.iterations}};
    j["linear_solver"] = {{"solves", r.solver_stats.linear_solves},
                          {"iterations", r.solver_stats.solver_iterations},
                          {"factorizations", r.solver_stats.factorizations},
                          {"direct_fallbacks", r.solver_stats.direct_fallbacks},
                          {"max_residual", r.solver_stats.max_solver_residual}};
    std::vector<double> t{0.0};
    t.insert(t.end(), r.step_times.begin(), r.step_times.end());
    std::vector<double> inflow{0.0};
    inflow.insert(inflow.end(), r.net_inflow.begin(), r.net_inflow.end());
    j["mass"] = {{"time", t},
                 {"total", r.mass},
                 {"net_inflow", inflow},
                 {"balance_error", r.mass_balance_error},
                 {"nondecreasing", r.mass_nondecreasing}};
    if (!r.metrics.empty()) {
        json m = json::array();
        for (const auto& e : r.metrics) m.push_back({{"time", e.time}, {"rmse", e.rmse}, {"l1er", e.l1}});
        j["metrics"] = m;
    }
    if (r.oracle_mass_balance_error >= 0.0) j["oracle_mass_balance_error"] = r.oracle_mass_balance_error;
    if (r.mass_comparison) {
        const auto& mc = *r.mass_comparison;
        j["mass_comparison"] = {{"columns", mc.columns},
                                {"window", mc.window},
                                {"front_arrival", mc.front_arrival},
                                {"max_rel_gap", mc.max_rel_gap},
                                {"uptake_rel_gap", mc.uptake_rel_gap}};
    }
    json checks = json::array();
    for (const auto& c : evaluate(r)) {
        json e = {{"name", c.name}, {"value", c.value}, {"pass", c.pass}};
        if (c.limit) e["limit"] = *c.limit;
        checks.push_back(e);
    }
    j["checks"] = checks;
    if (!files.empty()) j["files"] = files;
    return j.dump(2) + "\n";
}

std::vector<fs::path> write_outputs(const RunReport& r, const fs::path& dir, const OutputFormats& formats) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    std::vector<fs::path> written;
    const std::string& name = r.scenario.name;
    const int d = r.cloud.dims();
    const std::size_t n = r.outputs.size();
    for (std::size_t k = 0; k < n; ++k) {
        const auto& o = r.outputs[k];
        const std::string stem = name + "_t" + index_tag(k, n);
        if (formats.csv) {
            const fs::path p = dir / (stem + ".csv");
            write_file(p, profile_csv(r, o));
            written.push_back(p);
        }
        if (formats.vtk && d >= 2) {
            const std::string title = name + " t=" + format_double(o.time);
            const fs::path p = dir / (stem + ".vtk");
            write_file(p, vtk_grid(r, o, 0, r.cloud.counts[0], title));
            written.push_back(p);
            if (d == 3) {
                const int nx = r.cloud.counts[0];
                for (int q = 0; q <= 4; ++q) {
                    const int ix = static_cast<int>(std::lround(q * (nx - 1) / 4.0));
                    const fs::path ps = dir / (stem + "_xslice" + std::to_string(q) + ".vtk");
                    write_file(ps, vtk_grid(r, o, ix, ix + 1, title + " x-slice " + std::to_string(q) + "/4"));
                    written.push_back(ps);
                }
            }
        }
    }
    std::vector<std::string> names;
    for (const auto& p : written) names.push_back(p.filename().string());
    const fs::path sp = dir / (name + "_summary.json");
    write_file(sp, summary_json(r, names));
    written.push_back(sp);
    return written;
}

}  // namespace kirflow
