#pragma once

#include <cstddef>
#include <vector>

#include "kirflow/grid.hpp"

namespace kirflow {

struct Neighbor {
    double dist2;
    std::size_t index;
};

// Squared Euclidean distance; shared by the tree and the brute-force search so that ties
// compare identically.
double squared_distance(const Point& a, const Point& b);

// Static k-d tree. Results ordered by (distance, index); equal distances break by index.
class KdTree {
public:
    explicit KdTree(const std::vector<Point>& points, std::size_t leaf_size = 8);

    std::vector<Neighbor> nearest(const Point& q, std::size_t k) const;
    std::size_t size() const { return points_->size(); }

private:
    struct Node {
        int axis;           // -1 for a leaf
        double split;
        std::size_t begin, end;
        int left, right;
    };

    int build(std::size_t begin, std::size_t end);
    void search(int node, const Point& q, std::size_t k, std::vector<Neighbor>& heap) const;

    const std::vector<Point>* points_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    std::size_t leaf_size_;
};

std::vector<Neighbor> brute_force_nearest(const std::vector<Point>& points, const Point& q, std::size_t k);

struct InfluenceDomain {
    std::size_t center;
    std::vector<std::size_t> members;   // sorted by (distance, index); members[0] == center
    std::vector<double> distances;
};

std::vector<InfluenceDomain> influence_domains(const PointCloud& cloud, std::size_t n_s);

}  // namespace kirflow
