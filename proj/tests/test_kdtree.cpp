#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "kirflow/kdtree.hpp"

using namespace kirflow;

namespace {

void expect_same(const std::vector<Neighbor>& a, const std::vector<Neighbor>& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].index, b[i].index) << "rank " << i;
        EXPECT_EQ(a[i].dist2, b[i].dist2);
    }
}

}  // namespace

TEST(KdTree, MatchesBruteForceOnRandomClouds) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::uniform_int_distribution<int> sizes(1, 600);
    for (int cloud = 0; cloud < 100; ++cloud) {
        const int n = sizes(rng);
        const int dims = 1 + cloud % 3;
        std::vector<Point> pts(static_cast<std::size_t>(n));
        for (auto& p : pts)
            for (int d = 0; d < 3; ++d) p[d] = d < dims ? U(rng) : 0.0;
        const KdTree tree(pts, 1 + cloud % 9);
        for (int q = 0; q < 20; ++q) {
            Point x{U(rng), dims > 1 ? U(rng) : 0.0, dims > 2 ? U(rng) : 0.0};
            const std::size_t k = 1 + static_cast<std::size_t>(q) % 12;
            expect_same(tree.nearest(x, k), brute_force_nearest(pts, x, k));
        }
    }
}

// Lattice queries at nodes and cell centers produce many exact distance ties.
TEST(KdTree, TiesBreakByIndexOnLattices) {
    std::vector<Point> pts;
    for (int k = 0; k < 6; ++k)
        for (int j = 0; j < 5; ++j)
            for (int i = 0; i < 7; ++i) pts.push_back({i * 0.25, j * 0.5, k * 0.125});
    std::shuffle(pts.begin(), pts.end(), std::mt19937_64(5));
    const KdTree tree(pts, 4);
    for (std::size_t s = 0; s < pts.size(); ++s) {
        expect_same(tree.nearest(pts[s], 7), brute_force_nearest(pts, pts[s], 7));
        const Point mid{pts[s][0] + 0.125, pts[s][1] + 0.25, pts[s][2]};
        expect_same(tree.nearest(mid, 9), brute_force_nearest(pts, mid, 9));
    }
}

TEST(KdTree, DuplicatePointsAndOversizedK) {
    std::vector<Point> pts(10, Point{0.5, 0.5, 0.5});
    pts.push_back({0, 0, 0});
    const KdTree tree(pts, 2);
    const auto r = tree.nearest({0.5, 0.5, 0.5}, 50);
    ASSERT_EQ(r.size(), pts.size());
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(r[i].index, i);
    EXPECT_EQ(r.back().index, 10u);
}

TEST(KdTree, EmptyQueries) {
    std::vector<Point> pts{{0, 0, 0}};
    const KdTree tree(pts);
    EXPECT_TRUE(tree.nearest({1, 1, 1}, 0).empty());
    EXPECT_EQ(tree.size(), 1u);
}

TEST(InfluenceDomains, CenterFirstAndSorted) {
    Extents e;
    e.dims = 2;
    e.l1 = 1;
    e.L = 1;
    const auto c = build_grid(e, {6, 1, 5});
    const auto doms = influence_domains(c, 5);
    ASSERT_EQ(doms.size(), c.size());
    for (const auto& d : doms) {
        ASSERT_EQ(d.members.size(), 5u);
        EXPECT_EQ(d.members[0], d.center);
        EXPECT_EQ(d.distances[0], 0.0);
        EXPECT_TRUE(std::is_sorted(d.distances.begin(), d.distances.end()));
        const auto bf = brute_force_nearest(c.nodes, c.nodes[d.center], 5);
        for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(d.members[j], bf[j].index);
    }
}
