#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "kirflow/driver.hpp"
#include "kirflow/errors.hpp"
#include "kirflow/scenario.hpp"

using namespace kirflow;

namespace {

Scenario clay_scenario(int nz, double dt, double t_end) {
    return parse_scenario_text(R"(
name: clay_small
dims: 1
units: {length: m, time: day}
domain: {L: 1.0}
geometry:
  type: homogeneous
  soil: {name: clay, theta_r: 0.09, theta_s: 0.475, k_s: 0.0144, h_d: -0.3731, lambda: 0.131, beta: 18.2672}
initial: {water_content: 0.226}
boundary: {top_head: 0.0}
lrbf: {c: 0.6, n_s: 3}
grid: {Nz: )" + std::to_string(nz) + R"(}
time: {dt: )" + std::to_string(dt) + ", t_end: " + std::to_string(t_end) + ", outputs: [" + std::to_string(t_end) + R"(]}
)");
}

struct Fixture {
    Scenario s;
    SoilField field;
    PointCloud cloud;
    TransformContext ctx;
    LrbfOperators ops;
    explicit Fixture(Scenario sc)
        : s(std::move(sc)), field(s.field()), cloud(build_grid(s.extents, s.counts)),
          ctx(field, cloud.nodes, compute_h_bar(field, s.counts)), ops(cloud, s.n_s, KernelConfig{s.c}) {}
    Stepper stepper(StepperConfig cfg) const {
        return Stepper(cloud, ctx, ops, boundary_values(cloud, ctx, s.boundary, s.initial), cfg);
    }
};

}  // namespace

TEST(Stepper, DirichletValuesHeld) {
    Fixture f(clay_scenario(51, 1e-3, 0.01));
    auto st = f.stepper(f.s.stepper);
    const auto init = initial_state(f.cloud, f.ctx, f.s.initial);
    const auto r = st.picard_iterate(init, 1e-3);
    const auto bu = st.boundary_u();
    EXPECT_DOUBLE_EQ(r.state.u.back(), bu.back());
    EXPECT_DOUBLE_EQ(r.state.u.front(), bu.front());
    EXPECT_NEAR(r.state.h.back(), 0.0, 1e-12);
    EXPECT_LE(r.delta, f.s.stepper.tol);
    EXPECT_GE(r.iterations, 1);
}

TEST(Stepper, ZeroToleranceReportsNonconvergence) {
    Fixture f(clay_scenario(51, 1e-3, 0.01));
    auto cfg = f.s.stepper;
    cfg.tol = 0.0;
    cfg.max_picard = 3;
    auto st = f.stepper(cfg);
    const auto init = initial_state(f.cloud, f.ctx, f.s.initial);
    try {
        st.picard_iterate(init, 1e-3, 7);
        FAIL() << "expected NonconvergenceError";
    } catch (const NonconvergenceError& e) {
        EXPECT_EQ(e.step(), 7);
        EXPECT_GT(e.delta(), 0.0);
    }
}

TEST(Stepper, ConfigValidation) {
    StepperConfig c;
    c.dt = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c.dt = 1e-3;
    c.max_picard = 0;
    EXPECT_THROW(c.validate(), ConfigError);
}

// h = h_0 - z with matching Dirichlet ends is an equilibrium of the continuous problem.
TEST(Stepper, HydrostaticColumnStaysNearlySteady) {
    auto s = clay_scenario(101, 1e-2, 0.2);
    s.initial.kind = InitialCondition::Kind::linear_head;
    s.initial.value = -0.5;
    s.initial.slope = -1.0;
    s.boundary.top_head = -1.5;
    s.boundary.bottom_head = -0.5;
    const auto r = run_scenario(s);
    for (std::size_t i = 0; i < r.cloud.size(); ++i)
        EXPECT_NEAR(r.outputs[0].state.h[i], -0.5 - r.cloud.nodes[i][2], 1e-3) << i;
    EXPECT_LE(std::abs(r.mass.back() - r.mass.front()), 1e-4 * r.mass.front());
}

TEST(Stepper, InfiltrationMassBalanceAndMonotoneMass) {
    const auto r = run_scenario(clay_scenario(101, 1e-3, 0.1));
    EXPECT_LE(r.mass_balance_error, 1e-3);
    EXPECT_TRUE(r.mass_nondecreasing);
    EXPECT_GT(r.mass.back(), r.mass.front());
    for (double S : r.outputs[0].S) {
        EXPECT_GT(S, 0.0);
        EXPECT_LE(S, 1.0);
    }
}

// A laterally uniform 2D problem must reproduce the 1D column.
TEST(Stepper, LaterallyUniformTwoDimensionalMatchesColumn) {
    auto s1 = clay_scenario(41, 2e-3, 0.02);
    auto s2 = s1;
    s2.extents.dims = 2;
    s2.extents.l1 = 0.1;
    s2.counts = {5, 1, 41};
    s2.n_s = 5;
    const auto a = run_scenario(s1);
    const auto b = run_scenario(s2);
    for (int ix = 0; ix < 5; ++ix)
        for (int iz = 0; iz < 41; ++iz)
            EXPECT_NEAR(b.outputs[0].theta[b.cloud.index(ix, 0, iz)], a.outputs[0].theta[static_cast<std::size_t>(iz)],
                        1e-7)
                << ix << "," << iz;
    EXPECT_NEAR(b.mass.back(), a.mass.back(), 1e-8);
}

TEST(Stepper, OutputTimesHitExactly) {
    auto s = clay_scenario(31, 0.003, 0.01);
    s.output_times = {0.004, 0.01};
    const auto r = run_scenario(s);
    ASSERT_EQ(r.outputs.size(), 2u);
    EXPECT_DOUBLE_EQ(r.outputs[0].state.time, 0.004);
    EXPECT_DOUBLE_EQ(r.step_times.back(), 0.01);
}

// On 101 x 101 the x = 0 node at z = 0.45 is upper soil while its normal neighbor lies below
// the interface; u differs between the soils by two orders of magnitude there.
TEST(Stepper, LateralRowAcrossMaterialInterface) {
    Overrides o;
    o.grid_scale = 0.1;
    o.dt = 1e-3;
    o.t_end = 3e-3;
    const auto s = apply_overrides(parse_scenario(std::string(KIRFLOW_TEST_DATA) + "/scenarios/curvilinear_2d.yaml"), o);
    const auto r = run_scenario(s);
    const std::size_t node = r.cloud.index(0, 0, 45);
    ASSERT_DOUBLE_EQ(r.cloud.nodes[node][2], 0.45);
    const auto& out = r.outputs.back();
    EXPECT_NEAR(out.state.h[node], -0.45, 1e-2);
    for (double v : out.S) {
        EXPECT_GT(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

// The saturated zone behind the sand front grows to most of the column; Picard counts must
// not grow with it.
TEST(Stepper, SaturatedZoneDoesNotSlowPicard) {
    const auto s = parse_scenario(std::string(KIRFLOW_TEST_DATA) + "/scenarios/sand_1d.yaml");
    const auto r = run_scenario(s);
    EXPECT_LE(*std::max_element(r.iterations.begin(), r.iterations.end()), 20);
    EXPECT_LE(r.mass_balance_error, 1e-4);
}
