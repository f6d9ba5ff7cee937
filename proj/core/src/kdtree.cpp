#include "kirflow/kdtree.hpp"

#include <algorithm>
#include <cmath>

#include "kirflow/errors.hpp"

namespace kirflow {

namespace {

bool closer(const Neighbor& a, const Neighbor& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
}

void offer(std::vector<Neighbor>& heap, std::size_t k, Neighbor n) {
    if (heap.size() < k) {
        heap.push_back(n);
        std::push_heap(heap.begin(), heap.end(), closer);
    } else if (closer(n, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = n;
        std::push_heap(heap.begin(), heap.end(), closer);
    }
}

}  // namespace

double squared_distance(const Point& a, const Point& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return dx * dx + dy * dy + dz * dz;
}

KdTree::KdTree(const std::vector<Point>& points, std::size_t leaf_size)
    : points_(&points), order_(points.size()), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    if (!order_.empty()) build(0, order_.size());
}

int KdTree::build(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({-1, 0.0, begin, end, -1, -1});
    if (end - begin <= leaf_size_) return id;

    const auto& pts = *points_;
    int axis = 0;
    double best = -1.0;
    for (int d = 0; d < 3; ++d) {
        double lo = pts[order_[begin]][d], hi = lo;
        for (std::size_t i = begin; i < end; ++i) {
            lo = std::min(lo, pts[order_[i]][d]);
            hi = std::max(hi, pts[order_[i]][d]);
        }
        if (hi - lo > best) {
            best = hi - lo;
            axis = d;
        }
    }
    if (best <= 0.0) return id;   // all coincident: keep as a leaf

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin), order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                         return pts[a][axis] < pts[b][axis] || (pts[a][axis] == pts[b][axis] && a < b);
                     });
    const double split = pts[order_[mid]][axis];
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void KdTree::search(int id, const Point& q, std::size_t k, std::vector<Neighbor>& heap) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.axis < 0) {
        for (std::size_t i = n.begin; i < n.end; ++i) offer(heap, k, {squared_distance(q, (*points_)[order_[i]]), order_[i]});
        return;
    }
    // left holds coordinates <= split, right holds >= split
    const double diff = q[n.axis] - n.split;
    const int near = diff < 0.0 ? n.left : n.right;
    const int far = diff < 0.0 ? n.right : n.left;
    search(near, q, k, heap);
    // <= so a far-side point at exactly the current worst distance can still win on index
    if (heap.size() < k || diff * diff <= heap.front().dist2) search(far, q, k, heap);
}

std::vector<Neighbor> KdTree::nearest(const Point& q, std::size_t k) const {
    k = std::min(k, points_->size());
    std::vector<Neighbor> heap;
    heap.reserve(k + 1);
    if (k > 0) search(0, q, k, heap);
    std::sort_heap(heap.begin(), heap.end(), closer);
    return heap;
}

std::vector<Neighbor> brute_force_nearest(const std::vector<Point>& points, const Point& q, std::size_t k) {
    std::vector<Neighbor> all;
    all.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) all.push_back({squared_distance(q, points[i]), i});
    std::sort(all.begin(), all.end(), closer);
    all.resize(std::min(k, all.size()));
    return all;
}

std::vector<InfluenceDomain> influence_domains(const PointCloud& cloud, std::size_t n_s) {
    if (n_s < 1 || n_s > cloud.size()) throw ConfigError("influence domain size must lie in [1, N]");
    KdTree tree(cloud.nodes);
    std::vector<InfluenceDomain> out;
    out.reserve(cloud.size());
    for (std::size_t s = 0; s < cloud.size(); ++s) {
        auto nb = tree.nearest(cloud.nodes[s], n_s);
        InfluenceDomain d;
        d.center = s;
        d.members.reserve(n_s);
        d.distances.reserve(n_s);
        for (const auto& x : nb) {
            d.members.push_back(x.index);
            d.distances.push_back(std::sqrt(x.dist2));
        }
        // distinct nodes: the center is the unique zero-distance member and sorts first
        if (d.members.front() != s) throw ConfigError("duplicate collocation nodes near node " + std::to_string(s));
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace kirflow
