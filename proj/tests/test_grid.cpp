#include <gtest/gtest.h>

#include <set>

#include "kirflow/errors.hpp"
#include "kirflow/grid.hpp"

using namespace kirflow;

namespace {

Extents ext(int dims, double l1, double l2, double L) {
    Extents e;
    e.dims = dims;
    e.l1 = l1;
    e.l2 = l2;
    e.L = L;
    return e;
}

}  // namespace

TEST(Grid, OneDimensionalColumn) {
    const auto c = build_grid(ext(1, 0, 0, 1.0), {7, 9, 11});
    EXPECT_EQ(c.size(), 11u);
    EXPECT_EQ(c.counts[0], 1);
    EXPECT_EQ(c.counts[1], 1);
    EXPECT_DOUBLE_EQ(c.spacing[2], 0.1);
    EXPECT_EQ(c.tags.front(), BoundaryTag::bottom);
    EXPECT_EQ(c.tags.back(), BoundaryTag::top);
    EXPECT_EQ(c.boundary_count, 2u);
    EXPECT_EQ(c.interior_count, 9u);
    EXPECT_DOUBLE_EQ(c.nodes.back()[2], 1.0);
}

TEST(Grid, IndexOrderingIsXFastest) {
    const auto c = build_grid(ext(3, 1, 2, 3), {4, 5, 6});
    for (int iz = 0; iz < 6; ++iz)
        for (int iy = 0; iy < 5; ++iy)
            for (int ix = 0; ix < 4; ++ix) {
                const auto i = c.index(ix, iy, iz);
                EXPECT_EQ(c.grid_coords(i), (std::array<int, 3>{ix, iy, iz}));
                EXPECT_DOUBLE_EQ(c.nodes[i][0], ix / 3.0);
                EXPECT_DOUBLE_EQ(c.nodes[i][1], 2.0 * iy / 4.0);
                EXPECT_DOUBLE_EQ(c.nodes[i][2], 3.0 * iz / 5.0);
            }
}

TEST(Grid, BoundaryTagsTwoDimensional) {
    const auto c = build_grid(ext(2, 1, 0, 1), {5, 1, 4});
    EXPECT_EQ(c.size(), 20u);
    // bottom and top rows include the corners; lateral tags only on interior rows
    EXPECT_EQ(c.tags[c.index(0, 0, 0)], BoundaryTag::bottom);
    EXPECT_EQ(c.tags[c.index(4, 0, 3)], BoundaryTag::top);
    EXPECT_EQ(c.tags[c.index(0, 0, 1)], BoundaryTag::lateral_x);
    EXPECT_EQ(c.tags[c.index(4, 0, 2)], BoundaryTag::lateral_x);
    EXPECT_EQ(c.tags[c.index(2, 0, 2)], BoundaryTag::interior);
    EXPECT_EQ(c.interior_count, 3u * 2u);
    EXPECT_EQ(c.interior_count + c.boundary_count, c.size());
}

TEST(Grid, BoundaryCountThreeDimensional) {
    const auto c = build_grid(ext(3, 1, 1, 1), {5, 6, 7});
    EXPECT_EQ(c.interior_count, 3u * 4u * 5u);
    std::size_t y = 0;
    for (auto t : c.tags) y += t == BoundaryTag::lateral_y;
    EXPECT_EQ(y, 2u * 3u * 5u);   // x edges take precedence
}

TEST(Grid, AxisNeighbors) {
    const auto c = build_grid(ext(2, 1, 0, 1), {5, 1, 4});
    const auto i = c.index(2, 0, 1);
    EXPECT_EQ(axis_neighbors(c, i, 0), std::make_pair(c.index(1, 0, 1), c.index(3, 0, 1)));
    EXPECT_EQ(axis_neighbors(c, i, 2), std::make_pair(c.index(2, 0, 0), c.index(2, 0, 2)));
    EXPECT_THROW(axis_neighbors(c, c.index(0, 0, 1), 0), std::out_of_range);
    EXPECT_THROW(axis_neighbors(c, i, 1), std::out_of_range);
}

TEST(Grid, ActiveAxes) {
    EXPECT_EQ(build_grid(ext(1, 0, 0, 1), {1, 1, 3}).active_axes(), std::vector<int>{2});
    EXPECT_EQ(build_grid(ext(2, 1, 0, 1), {3, 1, 3}).active_axes(), (std::vector<int>{0, 2}));
    EXPECT_EQ(build_grid(ext(3, 1, 1, 1), {3, 3, 3}).active_axes(), (std::vector<int>{0, 1, 2}));
}

TEST(Grid, RejectsDegenerateInput) {
    EXPECT_THROW(build_grid(ext(1, 0, 0, 1), {1, 1, 1}), ConfigError);
    EXPECT_THROW(build_grid(ext(2, 0, 0, 1), {3, 1, 3}), ConfigError);
    EXPECT_THROW(build_grid(ext(4, 1, 1, 1), {3, 3, 3}), ConfigError);
}

TEST(Grid, NodesAreDistinct) {
    const auto c = build_grid(ext(3, 0.3, 0.3, 1), {4, 4, 9});
    std::set<std::array<double, 3>> s(c.nodes.begin(), c.nodes.end());
    EXPECT_EQ(s.size(), c.size());
}
