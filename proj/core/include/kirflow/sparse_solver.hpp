#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <vector>

#include "kirflow/lrbf.hpp"

namespace kirflow {

enum class SolverKind { automatic, direct, iterative };

struct SolverSettings {
    SolverKind kind = SolverKind::automatic;   // direct in 1D, iterative in 2D/3D
    double residual_tol = 1e-10;                // relative, infinity norm
    int max_iterations = 2000;                  // iterative solver only
    double ilut_droptol = 1e-4;
    int ilut_fill = 8;
    // the preconditioner is rebuilt once an iterative solve needs more than this many
    // iterations; it is otherwise reused across Picard sweeps and time steps
    int refresh_iterations = 25;
    bool operator==(const SolverSettings&) const = default;
};

struct GlobalSystem {
    Eigen::SparseMatrix<double> A;   // column-major, one row per node
    Eigen::VectorXd b;
    std::vector<RowKind> kinds;
};

struct SolveStats {
    double residual = 0.0;   // ||Ax - b||_inf / ||b||_inf
    int iterations = 0;      // 0 for direct solves
    bool refreshed = false;  // preconditioner or factorization rebuilt during this call
    bool fallback = false;   // iterative solve missed the target and was redone directly
};

// Keeps the symbolic analysis (direct) or the incomplete factorization (iterative) between
// calls with the same sparsity pattern.
class SparseSolver {
public:
    explicit SparseSolver(SolverSettings s = {}, int dims = 1);
    ~SparseSolver();
    SparseSolver(SparseSolver&&) noexcept;
    SparseSolver& operator=(SparseSolver&&) noexcept;

    // x holds the initial guess on entry for iterative solves.
    SolveStats solve(const GlobalSystem& sys, Eigen::VectorXd& x);
    bool direct() const { return direct_; }
    long refreshes() const;
    long fallbacks() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    SolverSettings settings_;
    bool direct_;
};

Eigen::VectorXd solve_sparse(const GlobalSystem& sys, SolverSettings s = {});

}  // namespace kirflow
