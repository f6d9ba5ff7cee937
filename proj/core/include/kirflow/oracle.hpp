#pragma once

#include <functional>
#include <vector>

#include "kirflow/soil.hpp"
#include "kirflow/soil_field.hpp"
#include "kirflow/stepper.hpp"

namespace kirflow {

// Head-based backward Euler finite differences with modified Picard (storage linearized as
// C^m (h^{m+1} - h^m) + θ^m - θ^p). Independent of the Kirchhoff machinery.
enum class ConductivityMean { integral, arithmetic };
enum class EndCondition { dirichlet, no_flow };

struct OracleConfig {
    int nodes = 0;        // 0: 4x refinement of the solver grid
    double dt = 0.0;      // 0: solver Δt / 10
    double tol = 1e-7;    // on head, length units
    int max_iterations = 200;
    ConductivityMean mean = ConductivityMean::integral;
    bool operator==(const OracleConfig&) const = default;
};

struct OracleProblem {
    double L = 1.0;
    std::vector<Layer> layers;   // bottom to top; a single layer for homogeneous columns
    InitialCondition initial;
    BoundarySpec boundary;
    EndCondition top = EndCondition::dirichlet;
    EndCondition bottom = EndCondition::dirichlet;
    double t_end = 0.0;
    std::vector<double> output_times;
    // Called after every accepted step with the nodal water contents.
    std::function<void(double t, const std::vector<double>& theta)> on_step;
};

struct OracleProfile {
    double time;
    std::vector<double> theta;
    std::vector<double> h;
};

struct OracleResult {
    std::vector<double> z;
    std::vector<OracleProfile> outputs;
    std::vector<double> times;        // per step end time
    std::vector<double> mass;         // mass[0] initial, then after each step
    std::vector<double> net_inflow;   // cumulative
    std::vector<int> iterations;
};

OracleResult oracle_solve_1d(const OracleProblem& problem, const OracleConfig& config);

// Mean conductivity of soil p over the head interval [h1, h2] (order irrelevant).
double mean_conductivity(double h1, double h2, const SoilParams& p, ConductivityMean mean);

// θ profile of a result resampled onto the nodes z (linear interpolation).
std::vector<double> resample(const std::vector<double>& z_src, const std::vector<double>& v,
                             const std::vector<double>& z_dst);

// ---- manufactured-solution truncation checks --------------------------------------------

enum class MmsField { constant, linear, smooth };
enum class MmsOperator { lrbf, oracle };

struct MmsResult {
    std::vector<double> spacing;
    std::vector<double> error;   // max-norm over interior nodes
    double order = 0.0;          // least-squares slope of log error vs log spacing
};

// Applies the discrete steady operator of the chosen solver to samples of a manufactured field
// on a unit column of a fixed test soil, and compares against the analytic operator.
// gravity=false drops the advective/gravity part and holds χ constant.
MmsResult manufactured_solution_residual(const std::vector<int>& sizes, MmsField field, MmsOperator op,
                                         bool gravity);

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace kirflow
