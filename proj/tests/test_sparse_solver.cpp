#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "kirflow/errors.hpp"
#include "kirflow/sparse_solver.hpp"

using namespace kirflow;

namespace {

// Diagonally dominant nonsymmetric matrix with a 2D five-point pattern plus one far entry per row.
GlobalSystem random_system(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const int N = n * n;
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < N; ++i) {
        double off = 0;
        for (int j : {i - 1, i + 1, i - n, i + n, (i * 7 + 3) % N}) {
            if (j < 0 || j >= N || j == i) continue;
            const double v = U(rng);
            off += std::abs(v);
            t.emplace_back(i, j, v);
        }
        t.emplace_back(i, i, off + 0.5 + std::abs(U(rng)));
    }
    GlobalSystem s;
    s.A.resize(N, N);
    s.A.setFromTriplets(t.begin(), t.end());
    s.b.resize(N);
    for (int i = 0; i < N; ++i) s.b[i] = U(rng);
    return s;
}

}  // namespace

TEST(SparseSolver, DirectMatchesDenseLu) {
    const auto sys = random_system(12, 1);
    const Eigen::MatrixXd A(sys.A);
    const Eigen::VectorXd ref = A.partialPivLu().solve(sys.b);
    SolverSettings st;
    st.kind = SolverKind::direct;
    SparseSolver solver(st, 1);
    Eigen::VectorXd x;
    const auto stats = solver.solve(sys, x);
    EXPECT_TRUE(solver.direct());
    EXPECT_LE(stats.residual, 1e-10);
    EXPECT_LE((x - ref).lpNorm<Eigen::Infinity>(), 1e-10 * ref.lpNorm<Eigen::Infinity>());
}

TEST(SparseSolver, IterativeAgreesWithDirect) {
    const auto sys = random_system(30, 2);
    Eigen::VectorXd xd, xi;
    SolverSettings d, it;
    d.kind = SolverKind::direct;
    it.kind = SolverKind::iterative;
    SparseSolver(d, 2).solve(sys, xd);
    SparseSolver solver(it, 2);
    EXPECT_FALSE(solver.direct());
    const auto stats = solver.solve(sys, xi);
    EXPECT_LE(stats.residual, 1e-10);
    EXPECT_GT(stats.iterations, 0);
    EXPECT_LE((xi - xd).lpNorm<Eigen::Infinity>(), 1e-8 * xd.lpNorm<Eigen::Infinity>());
}

TEST(SparseSolver, AutomaticPicksByDimension) {
    EXPECT_TRUE(SparseSolver({}, 1).direct());
    EXPECT_FALSE(SparseSolver({}, 2).direct());
    EXPECT_FALSE(SparseSolver({}, 3).direct());
}

TEST(SparseSolver, PreconditionerReusedAcrossNearbySystems) {
    auto sys = random_system(25, 3);
    SolverSettings it;
    it.kind = SolverKind::iterative;
    SparseSolver solver(it, 2);
    Eigen::VectorXd x;
    EXPECT_TRUE(solver.solve(sys, x).refreshed);
    for (int k = 0; k < 3; ++k) {
        for (int i = 0; i < sys.A.outerSize(); ++i)
            for (Eigen::SparseMatrix<double>::InnerIterator e(sys.A, i); e; ++e)
                if (e.row() == e.col()) e.valueRef() *= 1.0001;
        const auto st = solver.solve(sys, x);
        EXPECT_LE(st.residual, 1e-10);
        EXPECT_FALSE(st.refreshed);
    }
    EXPECT_EQ(solver.refreshes(), 1);
}

TEST(SparseSolver, RejectsBadInput) {
    auto sys = random_system(4, 4);
    sys.b[3] = std::nan("");
    Eigen::VectorXd x;
    EXPECT_THROW(SparseSolver().solve(sys, x), SolverError);
    GlobalSystem sing;
    sing.A.resize(3, 3);
    sing.A.insert(0, 0) = 1.0;
    sing.A.insert(1, 1) = 1.0;
    sing.A.insert(2, 1) = 1.0;
    sing.b = Eigen::VectorXd::Ones(3);
    EXPECT_THROW(SparseSolver().solve(sing, x), SolverError);
}

TEST(SparseSolver, SolveSparseConvenience) {
    const auto sys = random_system(6, 5);
    const auto x = solve_sparse(sys);
    EXPECT_LE((sys.A * x - sys.b).lpNorm<Eigen::Infinity>(), 1e-10 * sys.b.lpNorm<Eigen::Infinity>());
}
