#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kirflow/errors.hpp"
#include "kirflow/soil_field.hpp"

using namespace kirflow;

namespace {

SoilParams soil(const char* name, double h_d) { return make_soil(name, 0.0, 0.5, 1.0, h_d, 0.1, 29.0); }

Extents box(double l1, double L, int dims) {
    Extents e;
    e.l1 = l1;
    e.L = L;
    e.dims = dims;
    return e;
}

}  // namespace

TEST(SoilField, LayeredLookupAndTies) {
    const auto a = soil("sub", -9.5), b = soil("tilled", -4.55), c = soil("crust", -4.55);
    SoilField f(LayeredZ{{{0, 15, a}, {15, 25, b}, {25, 25.5, c}}}, box(0, 25.5, 1));
    EXPECT_EQ(f.at({0, 0, 3.0}).name, "sub");
    EXPECT_EQ(f.at({0, 0, 20.0}).name, "tilled");
    EXPECT_EQ(f.at({0, 0, 25.2}).name, "crust");
    // shared face belongs to the lower layer
    EXPECT_EQ(f.at({0, 0, 15.0}).name, "sub");
    EXPECT_EQ(f.at({0, 0, 25.0}).name, "tilled");
    EXPECT_EQ(f.materials().size(), 3u);
}

TEST(SoilField, LayeredRejectsGaps) {
    const auto a = soil("a", -1), b = soil("b", -2);
    EXPECT_THROW(SoilField(LayeredZ{{{0, 1, a}, {1.5, 2, b}}}, box(0, 2, 1)), ConfigError);
    EXPECT_THROW(SoilField(LayeredZ{{{0, 1, a}}}, box(0, 2, 1)), ConfigError);
}

TEST(SoilField, SplitXRegions) {
    const auto up = soil("up", -0.2), lo = soil("lo", -0.3);
    SoilField f(SplitX{{0.5}, {0.75, 0.25}, up, lo}, box(1, 1, 2));
    EXPECT_EQ(f.at({0.25, 0, 0.5}).name, "lo");
    EXPECT_EQ(f.at({0.25, 0, 0.8}).name, "up");
    EXPECT_EQ(f.at({0.75, 0, 0.5}).name, "up");
    EXPECT_EQ(f.at({0.75, 0, 0.2}).name, "lo");
    EXPECT_EQ(f.region({0.75, 0, 0.2}), 0);
}

TEST(SoilField, CurvilinearInterfaceEnds) {
    const auto up = soil("up", -0.45), lo = soil("lo", -0.23);
    SoilField f(Curvilinear{1.0, 1.0, up, lo}, box(1, 1, 2));
    EXPECT_NEAR(f.xi(0.0), 0.45, 1e-15);
    EXPECT_NEAR(f.xi(1.0), 0.65, 1e-15);
    EXPECT_NEAR(f.xi(0.5), 0.55, 1e-15);
    EXPECT_EQ(f.at({0.0, 0, 0.45}).name, "up");   // z >= ξ is upper
    EXPECT_EQ(f.at({0.0, 0, 0.449}).name, "lo");
    EXPECT_EQ(f.at({1.0, 0, 0.6}).name, "lo");
}

TEST(SoilField, CurvilinearScalesWithL2) {
    const auto up = soil("up", -0.45), lo = soil("lo", -0.23);
    SoilField f(Curvilinear{2.0, 3.0, up, lo}, box(2, 3, 2));
    const double x = 0.7;
    EXPECT_NEAR(f.xi(x), 3.0 * (0.1 * (1 - std::cos(std::numbers::pi * x / 2.0)) + 0.45), 1e-15);
}

TEST(SoilField, HomogeneousLookupIsConstant) {
    const auto p = soil("only", -0.3);
    SoilField f(Homogeneous{p}, box(0, 1, 1));
    EXPECT_TRUE(f.homogeneous());
    EXPECT_EQ(field_lookup({0, 0, 0.3}, f).name, "only");
}
