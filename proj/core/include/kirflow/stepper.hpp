#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "kirflow/kirchhoff.hpp"
#include "kirflow/lrbf.hpp"
#include "kirflow/metrics.hpp"
#include "kirflow/sparse_solver.hpp"

namespace kirflow {

// conservative: θ(h^m) - θ(h^p) + E^m (u^{m+1} - u^m) storage with the saturated gravity
// carried by the advective term. chord: E^m (u^{m+1} - u^p) with gravity through G.
enum class TimeScheme { conservative, chord };
// series: interface head matched across half nodes whose soils have different λβ or h_d.
// averaged: arithmetic means everywhere.
enum class InterfaceFlux { series, averaged };

struct StepperConfig {
    double dt = 1e-3;
    double tol = 1e-6;
    int max_picard = 50;
    TimeScheme scheme = TimeScheme::conservative;
    InterfaceFlux interface = InterfaceFlux::series;
    SolverSettings solver;

    void validate() const;
    bool operator==(const StepperConfig&) const = default;
};

struct InitialCondition {
    enum class Kind { head, water_content, linear_head };
    Kind kind = Kind::head;
    double value = 0.0;   // h0, θ0, or head at z = 0
    double slope = 0.0;   // dh/dz for linear_head

    double head_at(const SoilParams& p, double z) const;
    bool operator==(const InitialCondition&) const = default;
};

struct BoundarySpec {
    double top_head = 0.0;
    std::optional<double> bottom_head;   // default: initial head at z = 0
    bool operator==(const BoundarySpec&) const = default;
};

KirchhoffState initial_state(const PointCloud& cloud, const TransformContext& ctx, const InitialCondition& ic);

// Dirichlet u on top/bottom nodes; lateral and interior entries are 0 (Neumann rhs).
std::vector<double> boundary_values(const PointCloud& cloud, const TransformContext& ctx, const BoundarySpec& bc,
                                    const InitialCondition& ic);

// Head-matched flux between two materials: solves for the interface head h_I that equates the
// two half-cell fluxes and linearizes around it.
FluxForm series_interface_flux(const SoilParams& left, const SoilParams& right, double chi_l, double chi_r, double u_l,
                               double u_r, double h_l, double h_r, double h_bar, double delta, bool vertical);

struct StepResult {
    KirchhoffState state;
    int iterations = 0;
    double delta = 0.0;
    double net_inflow = 0.0;   // Δt (q_top - q_bottom), cross-section averaged
};

struct StepperStats {
    double max_solver_residual = 0.0;
    long linear_solves = 0;
    long solver_iterations = 0;
    long factorizations = 0;   // full or incomplete factorizations computed
    long direct_fallbacks = 0;
};

class Stepper {
public:
    Stepper(const PointCloud& cloud, const TransformContext& ctx, const LrbfOperators& ops,
            std::vector<double> boundary_u, StepperConfig cfg);

    // Assembles the Picard system for iterate (u_m, h_m) given the previous time level.
    GlobalSystem assemble(const KirchhoffState& prev, const std::vector<double>& u_m, const std::vector<double>& h_m,
                          double dt);
    // One backward-Euler step of length dt from prev.
    StepResult picard_iterate(const KirchhoffState& prev, double dt, long step_index = 0);

    const StepperConfig& config() const { return cfg_; }
    const TransformContext& context() const { return *ctx_; }
    const PointCloud& cloud() const { return *cloud_; }
    const StepperStats& stats() const { return stats_; }
    const std::vector<double>& boundary_u() const { return boundary_u_; }
    // Cross-section averaged (q_top - q_bottom) for u with the fluxes of the last assembly.
    double boundary_flux(const std::vector<double>& u) const;

private:
    void build_pattern();
    void half_node_fluxes(const std::vector<double>& u_m, const std::vector<double>& h_m);

    const PointCloud* cloud_;
    const TransformContext* ctx_;
    const LrbfOperators* ops_;
    std::vector<double> boundary_u_;
    StepperConfig cfg_;
    SparseSolver solver_;
    StepperStats stats_;

    GlobalSystem sys_;
    std::vector<std::vector<int>> slots_;   // value index per row entry
    std::vector<std::vector<FluxForm>> flux_;   // per active axis, half node right of node i
    std::vector<char> mismatch_;                // per active axis*N + i: series interface
    std::vector<double> E_, F_, G_, theta_m_;
    std::vector<double> xweights_;              // trapezoid weights of a cross-section
};

struct RunOptions {
    double t_end = 0.0;
    std::vector<double> output_times;
    // Called after every accepted step.
    std::function<void(const StepResult&, long step)> on_step;
};

struct RunResult {
    std::vector<KirchhoffState> outputs;   // one per output time, in order
    std::vector<int> iterations;           // per step
    std::vector<double> times;             // per step end time
    std::vector<double> mass;              // I after each step; mass[0] is the initial mass
    std::vector<double> net_inflow;        // cumulative ∫ (q_top - q_bottom) dt after each step
};

std::vector<double> water_contents(const KirchhoffState& s, const TransformContext& ctx);

RunResult run(Stepper& stepper, const KirchhoffState& initial, const RunOptions& opt);

}  // namespace kirflow
