#include "kirflow/sparse_solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <sstream>

#include "kirflow/errors.hpp"

namespace kirflow {

namespace {

double rel_residual(const GlobalSystem& sys, const Eigen::VectorXd& x) {
    const double bn = sys.b.lpNorm<Eigen::Infinity>();
    const double rn = (sys.A * x - sys.b).lpNorm<Eigen::Infinity>();
    return bn > 0.0 ? rn / bn : rn;
}

// Row with the largest residual, for diagnostics.
Eigen::Index worst_row(const GlobalSystem& sys, const Eigen::VectorXd& x) {
    Eigen::Index r = 0;
    (sys.A * x - sys.b).cwiseAbs().maxCoeff(&r);
    return r;
}

using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Ilut = Eigen::IncompleteLUT<double>;

// Hands BiCGSTAB a factorization owned elsewhere so it survives between calls.
struct SharedIlut {
    const Ilut* ilu = nullptr;
    SharedIlut() = default;
    template <class M>
    explicit SharedIlut(const M&) {}
    template <class M>
    SharedIlut& analyzePattern(const M&) { return *this; }
    template <class M>
    SharedIlut& factorize(const M&) { return *this; }
    template <class M>
    SharedIlut& compute(const M&) { return *this; }
    template <class V>
    Eigen::VectorXd solve(const V& b) const { return ilu->solve(b); }
    Eigen::ComputationInfo info() const { return Eigen::Success; }
};

}  // namespace

struct SparseSolver::Impl {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    Eigen::Index lu_rows = -1, lu_nnz = -1;
    Eigen::Index rows = -1, nnz = -1;

    RowMatrix Ar;
    Ilut ilu;
    bool have_pc = false;
    bool stale = false;
    long refreshes = 0;
    long fallbacks = 0;

    bool same_pattern(const GlobalSystem& sys) const { return rows == sys.A.rows() && nnz == sys.A.nonZeros(); }
};

SparseSolver::SparseSolver(SolverSettings s, int dims) : impl_(std::make_unique<Impl>()), settings_(s) {
    direct_ = s.kind == SolverKind::direct || (s.kind == SolverKind::automatic && dims < 2);
}
SparseSolver::~SparseSolver() = default;
SparseSolver::SparseSolver(SparseSolver&&) noexcept = default;
SparseSolver& SparseSolver::operator=(SparseSolver&&) noexcept = default;

long SparseSolver::refreshes() const { return impl_->refreshes; }
long SparseSolver::fallbacks() const { return impl_->fallbacks; }

SolveStats SparseSolver::solve(const GlobalSystem& sys, Eigen::VectorXd& x) {
    const Eigen::Index n = sys.A.rows();
    if (sys.A.cols() != n || sys.b.size() != n) throw SolverError("global system dimensions do not match");
    for (Eigen::Index i = 0; i < n; ++i)
        if (!std::isfinite(sys.b[i])) throw SolverError("non-finite right-hand side at row " + std::to_string(i));
    if (x.size() != n) x = Eigen::VectorXd::Zero(n);
    SolveStats st;
    auto& im = *impl_;
    auto direct_solve = [&] {
        auto& lu = im.lu;
        if (im.lu_rows != n || im.lu_nnz != sys.A.nonZeros()) {
            lu.analyzePattern(sys.A);
            im.lu_rows = n;
            im.lu_nnz = sys.A.nonZeros();
        }
        lu.factorize(sys.A);
        ++im.refreshes;
        st.refreshed = true;
        if (lu.info() != Eigen::Success) {
            throw SolverError("sparse LU factorization failed: " + lu.lastErrorMessage());
        }
        x = lu.solve(sys.b);
        st.residual = rel_residual(sys, x);
        // a couple of refinement sweeps if roundoff left the residual above target
        for (int k = 0; k < 2 && st.residual > settings_.residual_tol; ++k) {
            Eigen::VectorXd r = sys.b - sys.A * x;
            x += lu.solve(r);
            st.residual = rel_residual(sys, x);
        }
    };
    if (direct_) {
        direct_solve();
    } else {
        im.Ar = sys.A;
        auto rebuild = [&] {
            im.ilu.setDroptol(settings_.ilut_droptol);
            im.ilu.setFillfactor(settings_.ilut_fill);
            im.ilu.compute(im.Ar);
            if (im.ilu.info() != Eigen::Success) throw SolverError("incomplete LU preconditioner setup failed");
            im.have_pc = true;
            im.stale = false;
            im.rows = n;
            im.nnz = sys.A.nonZeros();
            ++im.refreshes;
            st.refreshed = true;
        };
        if (!im.have_pc || im.stale || !im.same_pattern(sys)) rebuild();

        const Eigen::VectorXd guess = x;
        auto attempt = [&] {
            x = guess;
            Eigen::BiCGSTAB<RowMatrix, SharedIlut> it;
            it.compute(im.Ar);
            it.preconditioner().ilu = &im.ilu;
            it.setMaxIterations(settings_.max_iterations);
            // the 2-norm target is tightened until the infinity-norm acceptance test holds
            double tol = settings_.residual_tol * 1e-1;
            st.iterations = 0;
            for (int round = 0; round < 3; ++round) {
                it.setTolerance(tol);
                x = it.solveWithGuess(sys.b, x);
                st.iterations += static_cast<int>(it.iterations());
                st.residual = rel_residual(sys, x);
                if (st.residual <= settings_.residual_tol || it.info() == Eigen::NumericalIssue) break;
                tol *= 1e-2;
            }
            return st.residual <= settings_.residual_tol && x.allFinite();
        };
        bool ok = attempt();
        if (!ok && !st.refreshed) {
            rebuild();
            ok = attempt();
        }
        if (st.iterations > settings_.refresh_iterations) im.stale = true;
        if (!ok) {
            // BiCGSTAB can stall just above the target on badly scaled rows
            direct_solve();
            ++im.fallbacks;
            st.fallback = true;
        }
    }
    if (!(st.residual <= settings_.residual_tol)) {
        std::ostringstream msg;
        msg << "linear solve residual " << st.residual << " exceeds " << settings_.residual_tol << " (worst row "
            << worst_row(sys, x) << ")";
        throw SolverError(msg.str());
    }
    return st;
}

Eigen::VectorXd solve_sparse(const GlobalSystem& sys, SolverSettings s) {
    if (s.kind == SolverKind::automatic) s.kind = SolverKind::direct;
    SparseSolver solver(s);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.b.size());
    solver.solve(sys, x);
    return x;
}

}  // namespace kirflow
