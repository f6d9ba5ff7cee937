#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "kirflow/errors.hpp"
#include "kirflow/lrbf.hpp"
#include "kirflow/oracle.hpp"

using namespace kirflow;

namespace {

using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

Extents ext(int dims, double l1, double l2, double L) {
    Extents e;
    e.dims = dims;
    e.l1 = l1;
    e.l2 = l2;
    e.L = L;
    return e;
}

MatL gram_long(const std::vector<Point>& off, double c) {
    const auto n = static_cast<Eigen::Index>(off.size());
    MatL G(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            long double r2 = 0;
            for (int d = 0; d < 3; ++d) {
                const long double dx = static_cast<long double>(off[i][d]) - off[j][d];
                r2 += dx * dx;
            }
            G(i, j) = std::exp(-static_cast<long double>(c) * c * r2);
        }
    return G;
}

double psi(const Point& x, const Point& center, double c) { return kernel(std::sqrt(squared_distance(x, center)), c); }

}  // namespace

TEST(Kernel, Values) {
    EXPECT_EQ(kernel(0.0, 0.6), 1.0);
    EXPECT_NEAR(kernel(1.0, 0.6), 0.697676, 5e-7);
    EXPECT_DOUBLE_EQ(kernel(1.0, 0.6), std::exp(-0.36));
    EXPECT_GT(kernel(5.0, 0.6), 0.0);
    EXPECT_LE(kernel(0.3, 2.0), 1.0);
}

TEST(LocalSystem, TwoNodeGram) {
    LocalSystem sys({{0, 0, 0}, {1, 0, 0}}, 0.6);
    EXPECT_EQ(sys.gram(0, 0), 1.0);
    EXPECT_EQ(sys.gram(1, 1), 1.0);
    EXPECT_NEAR(sys.gram(0, 1), 0.697676, 5e-7);
    EXPECT_EQ(sys.gram(0, 1), sys.gram(1, 0));
    EXPECT_TRUE(sys.positive_definite());
}

// Condition of a nearly flat 3-node Gram matrix from the eigenvalues of an extended-precision copy.
TEST(LocalSystem, CollinearNarrowDomainConditionMatchesEigenvalues) {
    const std::vector<Point> off{{0, 0, 0}, {0, 0, -0.001}, {0, 0, 0.001}};
    LocalSystem sys(off, 0.6);
    ASSERT_TRUE(sys.positive_definite());
    ASSERT_TRUE(std::isfinite(sys.condition()));
    Eigen::SelfAdjointEigenSolver<MatL> es(gram_long(off, 0.6));
    const long double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    ASSERT_GT(lo, 0.0L);
    const double k2 = static_cast<double>(hi / lo);
    // 1-norm and 2-norm condition numbers of an n x n matrix agree within a factor n
    EXPECT_GE(sys.condition(), k2 / 3.0 * 0.999);
    EXPECT_LE(sys.condition(), k2 * 3.0 * 1.001);
}

TEST(LocalSystem, SolveMatchesDenseLdlt) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const auto cloud = build_grid(ext(3, 1, 1, 1), {11, 11, 11});
    const auto doms = influence_domains(cloud, 7);
    KernelConfig k;
    for (std::size_t s : {std::size_t{0}, cloud.index(5, 5, 5), cloud.index(10, 3, 7)}) {
        const auto sys = local_gram(cloud, doms[s], k);
        std::vector<Point> off;
        for (auto m : doms[s].members)
            off.push_back({cloud.nodes[m][0] - cloud.nodes[s][0], cloud.nodes[m][1] - cloud.nodes[s][1],
                           cloud.nodes[m][2] - cloud.nodes[s][2]});
        const MatL G = gram_long(off, k.c);
        std::vector<double> g(off.size());
        VecL gl(static_cast<Eigen::Index>(off.size()));
        for (std::size_t i = 0; i < g.size(); ++i) gl[static_cast<Eigen::Index>(i)] = g[i] = U(rng);
        // w = Ψ^{-1} g, Ψ symmetric
        const VecL w_ref = G.ldlt().solve(gl);
        const auto w = sys.solve(g);
        const long double scale = w_ref.cwiseAbs().maxCoeff();
        for (std::size_t i = 0; i < w.size(); ++i)
            EXPECT_NEAR(w[i], static_cast<double>(w_ref[static_cast<Eigen::Index>(i)]), 1e-7 * scale) << s;
        for (std::size_t i = 0; i < off.size(); ++i)
            for (std::size_t j = 0; j < off.size(); ++j) EXPECT_EQ(sys.gram(i, j), sys.gram(j, i));
    }
}

TEST(LocalSystem, CardinalAtDataSitesIsUnitVector) {
    const std::vector<Point> off{{0, 0, 0}, {-0.1, 0, 0}, {0.1, 0, 0}, {0, 0, -0.1}, {0, 0, 0.1}};
    LocalSystem sys(off, 0.6);
    for (std::size_t i = 0; i < off.size(); ++i) {
        const auto row = sys.cardinal(off[i]);
        for (std::size_t j = 0; j < off.size(); ++j) EXPECT_NEAR(row[j], i == j ? 1.0 : 0.0, 1e-12);
    }
    // cardinal functions sum to about one near the center for a flat kernel
    const auto mid = sys.cardinal({0.03, 0, 0.02});
    double s = 0;
    for (double v : mid) s += v;
    EXPECT_NEAR(s, 1.0, 1e-2);
}

TEST(LocalSystem, IllConditionedDomainReportsNode) {
    const auto cloud = build_grid(ext(2, 1, 0, 1), {401, 1, 401});
    const auto doms = influence_domains(cloud, 9);
    KernelConfig k;
    k.c = 0.01;
    try {
        local_gram(cloud, doms[cloud.index(200, 0, 200)], k);
        FAIL() << "expected IllConditionedError";
    } catch (const IllConditionedError& e) {
        EXPECT_EQ(e.node(), cloud.index(200, 0, 200));
        EXPECT_GT(e.condition(), k.condition_limit);
    }
}

TEST(StencilScalars, HalfNodeOperator) {
    EXPECT_NEAR(half_node_operator({0.1, 0.2, 0.3}, {1, 1, 1}, 0.1), 0.0, 1e-12);
    EXPECT_NEAR(half_node_operator({0.01, 0.04, 0.09}, {1, 1, 1}, 0.1), 2.0, 1e-12);
    EXPECT_DOUBLE_EQ(half_node_operator({0, 1, 2}, {1, 2, 3}, 1.0), 1.0);
}

TEST(StencilScalars, AdvectiveAndGravity) {
    EXPECT_EQ(advective_z_operator({0, 1, 2}, {1, 1, 1}, {0, 0, 0}, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(advective_z_operator({0, 1, 2}, {1, 1, 1}, {1, 1, 1}, 1.0), 1.0);
    EXPECT_EQ(advective_z_operator({3, 3, 3}, {2, 2, 2}, {0.5, 0.5, 0.5}, 0.1), 0.0);
    EXPECT_EQ(gravity_source({0, 0, 0}, 1.0), 0.0);
    EXPECT_EQ(gravity_source({2, 2, 2}, 0.3), 0.0);
    EXPECT_DOUBLE_EQ(gravity_source({0, 0, 1.7}, 1.0), 0.85);
}

// The linear flux forms must reproduce the scalar stencil formulas.
TEST(StencilScalars, ComposedStencilMatchesScalarFormulas) {
    const std::array<double, 3> v{0.3, 0.5, 0.4}, chi{1.0, 2.0, 1.5}, F{0.2, 0.7, 0.1};
    const double dz = 0.05;
    const auto qm = averaged_flux(chi[0], chi[1], F[0], F[1], 0, 0, dz, true);
    const auto qp = averaged_flux(chi[1], chi[2], F[1], F[2], 0, 0, dz, true);
    const auto sw = compose_stencil(0.0, {{qm, qp}}, {dz});
    const double applied = sw.w[0] * v[1] + sw.w[1] * v[0] + sw.w[2] * v[2] + sw.constant;
    const double ref = -(half_node_operator(v, chi, dz) + advective_z_operator(v, chi, F, dz));
    EXPECT_NEAR(applied, ref, 1e-12 * std::abs(ref));
}

TEST(LrbfOperators, DirichletAndNeumannRows) {
    const auto cloud = build_grid(ext(2, 1, 0, 1), {9, 1, 7});
    KernelConfig k;
    const LrbfOperators ops(cloud, 5, k);
    std::vector<double> vals(cloud.size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = std::sin(3.0 * i);
    const auto top = cloud.index(4, 0, 6);
    EXPECT_EQ(ops.boundary_row(top, RowKind::dirichlet, 1.0).apply(vals), vals[top]);
    const auto lat = cloud.index(8, 0, 3);
    std::vector<double> ones(cloud.size(), 2.5);
    EXPECT_NEAR(ops.boundary_row(lat, RowKind::neumann, 1.3).apply(ones), 0.0, 1e-10);
    EXPECT_THROW(ops.boundary_row(cloud.index(4, 0, 3), RowKind::neumann, 1.0), std::logic_error);
}

// Raw gradient weights reproduce ∂ψ/∂n of every basis function; the Neumann row is −χ times
// those weights with the row sum moved onto the center.
TEST(LrbfOperators, NeumannRowFromKernelGradient) {
    const auto cloud = build_grid(ext(3, 0.3, 0.3, 1), {7, 6, 11});
    KernelConfig k;
    const LrbfOperators ops(cloud, 7, k);
    const double chi_s = 0.8;
    for (std::size_t s : {cloud.index(0, 2, 4), cloud.index(6, 3, 5), cloud.index(2, 0, 4), cloud.index(3, 5, 8)}) {
        const int axis = cloud.tags[s] == BoundaryTag::lateral_x ? 0 : 1;
        const auto g = cloud.grid_coords(s);
        const double sign = g[axis] == 0 ? -1.0 : 1.0;
        const auto& members = ops.domain(s).members;
        const auto gw = ops.local_system(s).gradient_weights(axis);
        for (auto m : members) {
            double applied = 0;
            for (std::size_t j = 0; j < members.size(); ++j)
                applied += gw[j] * psi(cloud.nodes[members[j]], cloud.nodes[m], k.c);
            const double grad =
                -2.0 * k.c * k.c * (cloud.nodes[s][axis] - cloud.nodes[m][axis]) * psi(cloud.nodes[s], cloud.nodes[m], k.c);
            EXPECT_NEAR(applied, grad, 1e-10 * std::max(1.0, std::abs(grad))) << s << " " << m;
        }
        const auto row = ops.boundary_row(s, RowKind::neumann, chi_s);
        double sum = 0, raw_sum = 0;
        for (std::size_t j = 0; j < members.size(); ++j) {
            sum += row.weights[j];
            raw_sum += gw[j];
            if (j > 0) EXPECT_DOUBLE_EQ(row.weights[j], -chi_s * sign * gw[j]);
        }
        EXPECT_NEAR(sum, 0.0, 1e-12 * std::abs(row.weights[0]));
        EXPECT_NEAR(row.weights[0], -chi_s * sign * (gw[0] - raw_sum), 1e-12 * std::abs(row.weights[0]));
    }
}

TEST(LrbfOperators, NeumannRowApproximatesLinearSlope) {
    const auto cloud = build_grid(ext(2, 1, 0, 1), {101, 1, 101});
    const LrbfOperators ops(cloud, 5, KernelConfig{});
    std::vector<double> v(cloud.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.3 + 2.0 * cloud.nodes[i][0];
    // outward normal +x, so −χ ∂v/∂n = −2χ
    EXPECT_NEAR(ops.boundary_row(cloud.index(100, 0, 50), RowKind::neumann, 1.0).apply(v), -2.0, 1e-2);
    EXPECT_NEAR(ops.boundary_row(cloud.index(0, 0, 50), RowKind::neumann, 1.0).apply(v), 2.0, 1e-2);
}

TEST(LrbfOperators, LateralDomainWithoutNormalExtentRejected) {
    // dz much smaller than dx: five nearest neighbors of a lateral node are all vertical
    EXPECT_THROW(LrbfOperators(build_grid(ext(2, 1, 0, 0.1), {6, 1, 41}), 5, KernelConfig{}), ConfigError);
}

// Anisotropic spacing pushes the x neighbors out of the influence domain; the row must still
// apply the stencil formula to any function in the kernel span.
TEST(LrbfOperators, InteriorRowExactOnKernelSpan) {
    // dz = 0.04 and dx = 0.1: x ties at 0.1 leave one x neighbor outside the 6-node domain
    const auto cloud = build_grid(ext(2, 1, 0, 1), {11, 1, 26});
    KernelConfig k;
    const LrbfOperators ops(cloud, 6, k);
    EXPECT_GT(ops.diagnostics().stencils_outside_domain, 0u);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(-1, 1);
    for (std::size_t s : {cloud.index(5, 0, 12), cloud.index(1, 0, 1), cloud.index(9, 0, 23)}) {
        StencilWeights sw;
        sw.size = ops.stencil_size();
        for (int p = 0; p < sw.size; ++p) sw.w[p] = U(rng);
        const auto row = ops.interior_row(s, sw);
        const auto st = ops.stencil(s);
        const auto& dom = ops.domain(s);
        std::vector<double> a(dom.members.size());
        for (auto& x : a) x = U(rng);
        auto g = [&](const Point& x) {
            double v = 0;
            for (std::size_t j = 0; j < a.size(); ++j) v += a[j] * psi(x, cloud.nodes[dom.members[j]], k.c);
            return v;
        };
        std::vector<double> samples(cloud.size());
        for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = g(cloud.nodes[i]);
        double ref = 0;
        for (int p = 0; p < sw.size; ++p) ref += sw.w[p] * samples[st[p]];
        EXPECT_NEAR(row.apply(samples), ref, 1e-10 * std::max(1.0, std::abs(ref))) << s;
    }
}

TEST(LrbfOperators, ReductionToStencilOnSquareGrid) {
    const auto cloud = build_grid(ext(2, 1, 0, 1), {6, 1, 6});
    const LrbfOperators ops(cloud, 5, KernelConfig{});
    EXPECT_EQ(ops.diagnostics().stencils_outside_domain, 0u);
    EXPECT_LT(ops.diagnostics().max_selection_defect, 1e-12);
    const auto s = cloud.index(2, 0, 3);
    StencilWeights sw;
    sw.size = 5;
    sw.w = {4, -1, -1, -1, -1, 0, 0};
    const auto row = ops.interior_row(s, sw);
    std::vector<double> v(cloud.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = cloud.nodes[i][0] * cloud.nodes[i][0] + 3 * cloud.nodes[i][2];
    const double ref = 4 * v[s] - v[s - 1] - v[s + 1] - v[s - 6] - v[s + 6];
    EXPECT_NEAR(row.apply(v), ref, 1e-13);
    // E/Δt alone is the cardinal row at the center
    StencilWeights et;
    et.size = 5;
    et.w[0] = 7.0;
    EXPECT_NEAR(ops.interior_row(s, et).apply(v), 7.0 * v[s], 1e-12);
}

TEST(LrbfOperators, TranslatedDomainsShareSystems) {
    const auto cloud = build_grid(ext(3, 1, 1, 1), {9, 9, 9});
    const LrbfOperators ops(cloud, 7, KernelConfig{});
    EXPECT_LT(ops.diagnostics().distinct_domains, 200u);
    EXPECT_LT(ops.diagnostics().max_condition, default_condition_limit());
}

TEST(Manufactured, ConstantAndLinearExact) {
    const std::vector<int> sizes{11, 21, 41, 81};
    for (auto op : {MmsOperator::lrbf, MmsOperator::oracle}) {
        for (double e : manufactured_solution_residual(sizes, MmsField::constant, op, false).error) EXPECT_LE(e, 1e-12);
        for (double e : manufactured_solution_residual(sizes, MmsField::linear, op, false).error) EXPECT_LE(e, 1e-12);
    }
}

TEST(Manufactured, SmoothFieldOrder) {
    const std::vector<int> sizes{11, 21, 41, 81, 161};
    for (auto op : {MmsOperator::lrbf, MmsOperator::oracle})
        for (bool gravity : {false, true}) {
            const auto r = manufactured_solution_residual(sizes, MmsField::smooth, op, gravity);
            EXPECT_GE(r.order, 1.0) << static_cast<int>(op) << gravity;
        }
}

TEST(Manufactured, LeastSquaresSlope) {
    EXPECT_NEAR(least_squares_slope({1, 2, 4, 8}, {3, 12, 48, 192}), 2.0, 1e-12);
}
