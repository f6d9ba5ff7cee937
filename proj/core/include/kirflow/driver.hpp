#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kirflow/grid.hpp"
#include "kirflow/lrbf.hpp"
#include "kirflow/oracle.hpp"
#include "kirflow/scenario.hpp"
#include "kirflow/stepper.hpp"

namespace kirflow {

struct OutputSnapshot {
    double time = 0.0;
    KirchhoffState state;
    std::vector<double> theta;
    std::vector<double> S;
};

struct ProfileMetrics {
    double time = 0.0;
    double rmse = 0.0;
    double l1 = 0.0;
};

// Cross-section averaged solver mass against a matched set of 1D oracle columns.
struct MassComparison {
    std::vector<double> times;    // solver step times inside the window, starting at 0
    std::vector<double> solver;
    std::vector<double> oracle;
    double window = 0.0;          // comparison stops here
    double front_arrival = -1.0;  // first time a column's interface node starts wetting; -1 if never
    double max_rel_gap = 0.0;     // max |I - I_ref| / I_ref over the window
    double uptake_rel_gap = 0.0;  // |ΔI - ΔI_ref| / ΔI_ref at the window end
    int columns = 0;
};

enum class ReferenceKind { none, oracle, file };

struct RunSettings {
    ReferenceKind reference = ReferenceKind::none;
    std::filesystem::path reference_file;   // CSV with header time,z,theta
    std::function<void(const StepResult&, long)> on_step;
};

struct RunReport {
    Scenario scenario;
    PointCloud cloud;
    double h_bar = 0.0;
    LrbfDiagnostics diagnostics;
    std::vector<OutputSnapshot> outputs;

    std::vector<double> step_times;    // end time of every step
    std::vector<int> iterations;       // Picard sweeps per step
    std::vector<double> mass;          // mass[0] at t = 0, then one per step
    std::vector<double> net_inflow;    // cumulative, one per step

    double mass_balance_error = 0.0;   // |I(T) - I(0) - net inflow| / I(T)
    bool mass_nondecreasing = true;
    StepperStats solver_stats;

    std::vector<ProfileMetrics> metrics;          // per output time, 1D reference runs only
    std::optional<MassComparison> mass_comparison;
    double oracle_mass_balance_error = -1.0;      // of the 1D reference, when one was run

    double wall_seconds = 0.0;   // reported on the console, never written to files
};

// Throws NonconvergenceError / SolverError / IllConditionedError from the solver.
RunReport run_scenario(const Scenario& s, const RunSettings& settings = {});

// The 1D problem seen by the oracle for a vertical column of the scenario at horizontal
// position x (ignored for box-aligned layers).
OracleProblem oracle_column(const Scenario& s, double x);
OracleConfig oracle_config(const Scenario& s);

struct Check {
    std::string name;
    double value = 0.0;
    std::optional<double> limit;
    bool pass = true;
};

// Compares a report against the scenario thresholds; unset thresholds yield informational rows.
std::vector<Check> evaluate(const RunReport& r);

double median_iterations(const std::vector<int>& its);

}  // namespace kirflow
