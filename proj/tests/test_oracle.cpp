#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "kirflow/errors.hpp"
#include "kirflow/metrics.hpp"
#include "kirflow/oracle.hpp"

using namespace kirflow;

namespace {

SoilParams clay() { return make_soil("clay", 0.09, 0.475, 0.0144, -0.3731, 0.131, 18.2672); }

OracleProblem clay_column(double t_end) {
    OracleProblem p;
    p.L = 1.0;
    p.layers = {{0.0, 1.0, clay()}};
    p.initial.kind = InitialCondition::Kind::water_content;
    p.initial.value = 0.226;
    p.boundary.top_head = 0.0;
    p.t_end = t_end;
    p.output_times = {t_end};
    return p;
}

}  // namespace

TEST(Oracle, MeanConductivityMatchesQuadrature) {
    const auto p = clay();
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    for (auto [a, b] : std::vector<std::pair<double, double>>{{-5.0, -1.0}, {-1.0, -0.2}, {-0.6, 0.0}, {-50, -49.9}}) {
        // split at the kink of K(h)
        auto K = [&](double h) { return conductivity(h, p); };
        double ref = 0;
        if (a < p.h_d && b > p.h_d) ref = GK::integrate(K, a, p.h_d, 10, 1e-14) + GK::integrate(K, p.h_d, b, 10, 1e-14);
        else ref = GK::integrate(K, a, b, 10, 1e-14);
        ref /= b - a;
        EXPECT_NEAR(mean_conductivity(a, b, p, ConductivityMean::integral), ref, 1e-10 * ref);
        EXPECT_NEAR(mean_conductivity(b, a, p, ConductivityMean::integral), ref, 1e-10 * ref);
    }
    EXPECT_DOUBLE_EQ(mean_conductivity(-1.0, -1.0, p, ConductivityMean::integral), conductivity(-1.0, p));
    EXPECT_DOUBLE_EQ(mean_conductivity(-2.0, -0.1, p, ConductivityMean::arithmetic),
                     0.5 * (conductivity(-2.0, p) + p.k_s));
}

TEST(Oracle, HydrostaticNoFlowIsSteady) {
    OracleProblem p;
    p.L = 1.0;
    p.layers = {{0.0, 1.0, clay()}};
    p.initial.kind = InitialCondition::Kind::linear_head;
    p.initial.value = -0.5;
    p.initial.slope = -1.0;
    p.top = EndCondition::no_flow;
    p.bottom = EndCondition::no_flow;
    p.t_end = 0.5;
    p.output_times = {0.25, 0.5};
    OracleConfig c;
    c.nodes = 101;
    c.dt = 0.01;
    const auto r = oracle_solve_1d(p, c);
    for (const auto& out : r.outputs)
        for (std::size_t i = 0; i < r.z.size(); ++i) EXPECT_NEAR(out.h[i], -0.5 - r.z[i], 1e-8);
    EXPECT_NEAR(r.mass.back(), r.mass.front(), 1e-12);
}

TEST(Oracle, ClayInfiltrationConservesMassAndGains) {
    OracleConfig c;
    c.nodes = 401;
    c.dt = 1e-4;
    const auto r = oracle_solve_1d(clay_column(0.1), c);
    ASSERT_EQ(r.outputs.size(), 1u);
    const double gain = r.mass.back() - r.mass.front();
    EXPECT_GT(gain, 0.0);
    EXPECT_LE(std::abs(gain - r.net_inflow.back()) / r.mass.back(), 1e-3);
    for (std::size_t k = 1; k < r.mass.size(); ++k) EXPECT_GE(r.mass[k], r.mass[k - 1] - 1e-14);
    EXPECT_NEAR(r.outputs[0].theta.back(), clay().theta_s, 1e-12);
}

// Richardson-style self check: N and 2N grids agree closely. The wetting front makes the oracle
// roughly first order, so the check starts at 2001 nodes.
TEST(Oracle, GridRefinementSelfConsistency) {
    OracleConfig c1, c2;
    c1.nodes = 2001;
    c1.dt = 1e-4;
    c2 = c1;
    c2.nodes = 4001;
    const auto p = clay_column(0.5);
    const auto a = oracle_solve_1d(p, c1);
    const auto b = oracle_solve_1d(p, c2);
    const auto fine = resample(b.z, b.outputs[0].theta, a.z);
    EXPECT_LE(metric_rmse(a.outputs[0].theta, fine), 2e-4);
}

TEST(Oracle, Resample) {
    const std::vector<double> zs{0, 1, 2}, v{0, 10, 30};
    EXPECT_EQ(resample(zs, v, {0.5, 1.5, 2.0, -1.0, 3.0}), (std::vector<double>{5, 20, 30, 0, 30}));
}

TEST(Oracle, FirstStepOnFineGridConverges) {
    OracleConfig c;
    c.nodes = 4001;
    c.dt = 1e-4;
    const auto r = oracle_solve_1d(clay_column(3e-4), c);
    EXPECT_DOUBLE_EQ(r.times.back(), 3e-4);
    EXPECT_GT(r.times.size(), 3u);   // the first step needed halving
}

TEST(Oracle, NonconvergenceReported) {
    OracleConfig c;
    c.nodes = 101;
    c.dt = 0.05;
    c.max_iterations = 1;
    c.tol = 0.0;
    EXPECT_THROW(oracle_solve_1d(clay_column(0.1), c), NonconvergenceError);
}
