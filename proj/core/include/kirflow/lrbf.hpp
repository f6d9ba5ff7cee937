#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <vector>

#include "kirflow/grid.hpp"
#include "kirflow/kdtree.hpp"

namespace kirflow {

// Gram solves run in binary128, so the usable condition number is the double-precision
// limit of 1e14 scaled by the ratio of machine epsilons.
inline constexpr double kDoubleConditionLimit = 1e14;
double default_condition_limit();

struct KernelConfig {
    double c = 0.6;
    double condition_limit = default_condition_limit();

    void validate() const;
};

double kernel(double r, double c);

// Symmetric Gram matrix of one influence domain with its binary128 LDL^T factors.
class LocalSystem {
public:
    // offsets: member coordinates relative to the center; offsets[0] is the center.
    LocalSystem(const std::vector<Point>& offsets, double c);

    std::size_t size() const { return n_; }
    double gram(std::size_t i, std::size_t j) const { return gram_[i * n_ + j]; }
    // 1-norm condition number from the explicit inverse.
    double condition() const { return condition_; }
    bool positive_definite() const { return pd_; }
    // Weights w = Ψ^{-1} g for a right-hand side g given in double; accumulation in binary128.
    std::vector<double> solve(const std::vector<double>& g) const;
    // Row i of Ψ Ψ^{-1} evaluated at an arbitrary point p (cardinal functions at p).
    std::vector<double> cardinal(const Point& p) const;
    // Weights of the derivative along axis at the center: (∂ψ_k/∂x_axis)(0) Ψ^{-1}.
    std::vector<double> gradient_weights(int axis) const;

private:
    std::size_t n_;
    double c_;
    std::vector<Point> offsets_;
    std::vector<double> gram_;
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    double condition_ = 0.0;
    bool pd_ = true;
};

// Gram system of domain d of a cloud.
LocalSystem local_gram(const PointCloud& cloud, const InfluenceDomain& d, const KernelConfig& k);

// Axis stencil scalars; values ordered (left, center, right).
double half_node_operator(const std::array<double, 3>& v, const std::array<double, 3>& chi, double delta);
double advective_z_operator(const std::array<double, 3>& u, const std::array<double, 3>& chi,
                            const std::array<double, 3>& F, double dz);
double gravity_source(const std::array<double, 3>& G, double dz);

// Linear half-node flux  q = w_left v_left + w_right v_right + constant  (positive along +axis).
struct FluxForm {
    double w_left = 0.0;
    double w_right = 0.0;
    double constant = 0.0;
};

// χ̄ (v_r - v_l)/Δ, plus χ̄ F̄ ū and Ḡ on the vertical axis (all bars are arithmetic means).
FluxForm averaged_flux(double chi_l, double chi_r, double F_l, double F_r, double G_l, double G_r, double delta,
                       bool vertical);

// Stencil positions: 0 = center, 1 + 2a = left along the a-th active axis, 2 + 2a = right.
struct StencilWeights {
    std::array<double, 7> w{};
    int size = 1;
    double constant = 0.0;   // moves to the right-hand side
};

// E/Δt v_s - Σ_a (q_{a,+} - q_{a,-})/Δ_a written as weights on the stencil values.
StencilWeights compose_stencil(double e_over_dt, const std::vector<std::array<FluxForm, 2>>& fluxes,
                               const std::vector<double>& spacing);

enum class RowKind { interior, dirichlet, neumann };

struct OperatorRow {
    RowKind kind = RowKind::interior;
    std::vector<std::size_t> cols;
    std::vector<double> weights;

    double apply(const std::vector<double>& values) const;
};

struct LrbfDiagnostics {
    double max_condition = 0.0;
    std::size_t worst_node = 0;
    std::size_t distinct_domains = 0;
    std::size_t stencils_outside_domain = 0;   // axis neighbors not in the influence domain
    double max_selection_defect = 0.0;         // |cardinal row - unit vector| at stencil members
};

// Precomputed interpolation data for every node of a uniform grid. Domains that are translates
// of each other share one LocalSystem.
class LrbfOperators {
public:
    LrbfOperators(const PointCloud& cloud, std::size_t n_s, const KernelConfig& k);

    const PointCloud& cloud() const { return *cloud_; }
    const InfluenceDomain& domain(std::size_t s) const { return domains_[s]; }
    const LocalSystem& local_system(std::size_t s) const { return *systems_[shape_[s]].system; }
    std::size_t n_s() const { return n_s_; }
    const LrbfDiagnostics& diagnostics() const { return diag_; }

    // Global node ids of the stencil of interior node s, ordered as StencilWeights.
    std::array<std::size_t, 7> stencil(std::size_t s) const;
    int stencil_size() const { return 1 + 2 * static_cast<int>(axes_.size()); }
    const std::vector<int>& axes() const { return axes_; }

    // Fixed column set of row s (members first, then axis neighbors outside the domain).
    const std::vector<std::size_t>& columns(std::size_t s) const { return columns_[s]; }
    // Writes the weights of row s aligned with columns(s).
    void interior_weights(std::size_t s, const StencilWeights& sw, double* out) const;
    void neumann_weights(std::size_t s, double chi_s, double* out) const;

    OperatorRow interior_row(std::size_t s, const StencilWeights& sw) const;
    OperatorRow boundary_row(std::size_t s, RowKind kind, double chi_s) const;

private:
    struct Shape {
        std::shared_ptr<LocalSystem> system;
        // For each stencil position: member slot, or -1 when outside the domain.
        std::array<int, 7> slot{};
        // Cardinal rows at stencil positions (stencil_size x n_s), used unless selection.
        std::vector<double> cardinal;
        bool selection = true;
        std::vector<double> neumann;   // ∂/∂n weights for lateral nodes, rows summing to zero
    };

    const PointCloud* cloud_;
    std::size_t n_s_;
    KernelConfig kernel_;
    std::vector<int> axes_;
    std::vector<InfluenceDomain> domains_;
    std::vector<Shape> systems_;
    std::vector<std::size_t> shape_;
    std::vector<std::vector<std::size_t>> columns_;
    LrbfDiagnostics diag_;
};

}  // namespace kirflow
