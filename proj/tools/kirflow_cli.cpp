// kirflow: run, verify and inspect infiltration scenarios.
//
// exit codes: 0 ok, 1 unexpected error, 2 bad input, 3 solver failure, 4 threshold failure
#include <CLI11.hpp>
#include <fmt/core.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

#include "kirflow/driver.hpp"
#include "kirflow/errors.hpp"
#include "kirflow/output.hpp"
#include "kirflow/scenario.hpp"

namespace fs = std::filesystem;
using namespace kirflow;

namespace {

enum Exit { ok = 0, unexpected = 1, bad_input = 2, solver_failure = 3, threshold_failure = 4 };

struct Common {
    std::optional<double> grid_scale, dt, t_end;
    std::string out;
    std::string formats = "csv";
    bool quiet = false;
    int progress_every = 0;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--grid-scale", c.grid_scale, "scale node counts on every active axis")
        ->check(CLI::PositiveNumber);
    app->add_option("--dt", c.dt, "override the time step")->check(CLI::PositiveNumber);
    app->add_option("--t-end", c.t_end, "override the final time")->check(CLI::PositiveNumber);
    app->add_option("--out", c.out, "output directory");
    app->add_option("--formats", c.formats, "comma-separated list of csv, vtk")->default_str("csv");
    app->add_flag("-q,--quiet", c.quiet, "only print the result lines");
    app->add_option("--progress", c.progress_every, "print every N-th step");
}

OutputFormats parse_formats(const std::string& list) {
    OutputFormats f;
    f.csv = false;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "csv") f.csv = true;
        else if (item == "vtk") f.vtk = true;
        else if (!item.empty()) throw ConfigError("unknown output format '" + item + "'");
    }
    return f;
}

Scenario load(const std::string& file, const Common& c) {
    Overrides o;
    o.grid_scale = c.grid_scale;
    o.dt = c.dt;
    o.t_end = c.t_end;
    return apply_overrides(parse_scenario(file), o);
}

void print_header(const Scenario& s) {
    fmt::print("scenario {}: dims {}, grid {}x{}x{}, dt {} {}, t_end {}\n", s.name, s.extents.dims, s.counts[0],
               s.counts[1], s.counts[2], format_double(s.stepper.dt), s.units.time, format_double(s.t_end));
}

bool print_report(const RunReport& r, bool quiet) {
    bool pass = true;
    if (!quiet) {
        fmt::print("  h_bar {}  max local condition {:.3e}  shapes {}\n", format_double(r.h_bar),
                   r.diagnostics.max_condition, r.diagnostics.distinct_domains);
        fmt::print("  steps {}  linear solves {}  direct fallbacks {}  wall {:.2f} s\n", r.iterations.size(),
                   r.solver_stats.linear_solves, r.solver_stats.direct_fallbacks, r.wall_seconds);
        if (r.mass_comparison)
            fmt::print("  mass window {} (front arrival {}), {} oracle column(s)\n", format_double(r.mass_comparison->window),
                       format_double(r.mass_comparison->front_arrival), r.mass_comparison->columns);
    }
    for (const auto& c : evaluate(r)) {
        const std::string lim = c.limit ? " <= " + format_double(*c.limit) : std::string();
        fmt::print("  {:<4} {:<16} {:.6e}{}\n", c.pass ? "ok" : "FAIL", c.name, c.value, lim);
        pass = pass && c.pass;
    }
    return pass;
}

std::function<void(const StepResult&, long)> progress(int every) {
    if (every <= 0) return {};
    return [every](const StepResult& s, long k) {
        if (k % every == 0)
            fmt::print("  step {:>7}  t {:<12} picard {:>2}  delta {:.2e}\n", k, format_double(s.state.time),
                       s.iterations, s.delta);
        std::fflush(stdout);
    };
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ParseError& e) {
        fmt::print(stderr, "parse error: {}\n", e.what());
        return bad_input;
    } catch (const ConfigError& e) {
        fmt::print(stderr, "configuration error: {}\n", e.what());
        return bad_input;
    } catch (const IoError& e) {
        fmt::print(stderr, "i/o error: {}\n", e.what());
        return bad_input;
    } catch (const NonconvergenceError& e) {
        fmt::print(stderr, "nonconvergence: {}\n", e.what());
        return solver_failure;
    } catch (const SolverError& e) {
        fmt::print(stderr, "linear solver failure: {}\n", e.what());
        return solver_failure;
    } catch (const IllConditionedError& e) {
        fmt::print(stderr, "ill-conditioned local system: {}\n", e.what());
        return solver_failure;
    } catch (const DomainError& e) {
        fmt::print(stderr, "domain error: {}\n", e.what());
        return solver_failure;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return unexpected;
    }
}

int run_one(const std::string& file, const Common& c, const std::string& reference, bool enforce, std::mutex* io) {
    const Scenario s = load(file, c);
    const OutputFormats formats = parse_formats(c.formats);
    RunSettings rs;
    if (reference == "oracle") {
        rs.reference = ReferenceKind::oracle;
    } else if (!reference.empty() && reference != "none") {
        rs.reference = ReferenceKind::file;
        rs.reference_file = reference;
    }
    if (!io) rs.on_step = progress(c.progress_every);
    std::unique_lock<std::mutex> lock;
    if (!io && !c.quiet) {
        print_header(s);
        std::fflush(stdout);
    }
    const RunReport r = run_scenario(s, rs);
    if (io) lock = std::unique_lock<std::mutex>(*io);
    if (io) print_header(s);
    const bool pass = print_report(r, c.quiet);
    if (!c.out.empty()) {
        const auto files = write_outputs(r, c.out, formats);
        if (!c.quiet) fmt::print("  wrote {} file(s) to {}\n", files.size(), c.out);
    }
    return enforce && !pass ? threshold_failure : ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kirchhoff-transformed Richards solver on local RBF collocation"};
    app.require_subcommand(1);

    Common run_opt;
    std::string run_file, run_ref;
    auto* run = app.add_subcommand("run", "run a scenario and write profiles");
    run->add_option("scenario", run_file, "scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("--reference", run_ref, "oracle, or a CSV file with columns time,z,theta");
    add_common(run, run_opt);

    Common ver_opt;
    std::string ver_file;
    auto* verify = app.add_subcommand("verify", "run a scenario against the 1D oracle and check its thresholds");
    verify->add_option("scenario", ver_file, "scenario file")->required()->check(CLI::ExistingFile);
    add_common(verify, ver_opt);

    std::vector<std::string> table_dirs;
    auto* tables = app.add_subcommand("tables", "list the soil tables on the search path");
    tables->add_option("--dir", table_dirs, "extra table directory");

    std::string show_file;
    auto* show = app.add_subcommand("show", "print a scenario in fully resolved form");
    show->add_option("scenario", show_file, "scenario file")->required()->check(CLI::ExistingFile);

    Common batch_opt;
    std::vector<std::string> batch_files;
    std::string batch_ref;
    int jobs = 1;
    auto* batch = app.add_subcommand("batch", "run several scenarios, each into its own subdirectory of --out");
    batch->add_option("scenarios", batch_files, "scenario files")->required()->check(CLI::ExistingFile);
    batch->add_option("--reference", batch_ref, "oracle or none");
    batch->add_option("-j,--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);
    add_common(batch, batch_opt);

    CLI11_PARSE(app, argc, argv);

    if (*run) return guarded([&] { return run_one(run_file, run_opt, run_ref, false, nullptr); });
    if (*verify) return guarded([&] { return run_one(ver_file, ver_opt, "oracle", true, nullptr); });
    if (*tables)
        return guarded([&] {
            std::vector<fs::path> dirs(table_dirs.begin(), table_dirs.end());
            for (auto& d : default_table_dirs()) dirs.push_back(d);
            for (const auto& t : list_soil_tables(dirs)) {
                fmt::print("{} [{}/{}] {}\n", t.name, t.units.length, t.units.time, t.description);
                fmt::print("  {:<14} {:>8} {:>8} {:>10} {:>10} {:>8} {:>9}\n", "soil", "theta_r", "theta_s", "k_s",
                           "h_d", "lambda", "beta");
                for (const auto& s : t.soils)
                    fmt::print("  {:<14} {:>8} {:>8} {:>10} {:>10.6g} {:>8.6g} {:>9.6g}\n", s.name,
                               format_double(s.theta_r), format_double(s.theta_s), format_double(s.k_s), s.h_d,
                               s.lambda, s.beta);
            }
            return ok;
        });
    if (*show) return guarded([&] {
        fmt::print("{}", serialize_scenario(parse_scenario(show_file)));
        return ok;
    });
    if (*batch) {
        std::mutex io;
        std::atomic<std::size_t> next{0};
        std::vector<int> codes(batch_files.size(), ok);
        auto worker = [&] {
            for (std::size_t k; (k = next++) < batch_files.size();) {
                Common c = batch_opt;
                if (!c.out.empty()) c.out = (fs::path(c.out) / fs::path(batch_files[k]).stem()).string();
                codes[k] = guarded([&] { return run_one(batch_files[k], c, batch_ref, batch_ref == "oracle", &io); });
            }
        };
        std::vector<std::thread> pool;
        const int n = std::min<int>(jobs, static_cast<int>(batch_files.size()));
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        return *std::max_element(codes.begin(), codes.end());
    }
    return ok;
}
