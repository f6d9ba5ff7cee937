#include "kirflow/grid.hpp"

#include <stdexcept>
#include <string>

#include "kirflow/errors.hpp"

namespace kirflow {

const char* tag_name(BoundaryTag t) {
    switch (t) {
        case BoundaryTag::interior: return "interior";
        case BoundaryTag::bottom: return "bottom";
        case BoundaryTag::top: return "top";
        case BoundaryTag::lateral_x: return "lateral_x";
        case BoundaryTag::lateral_y: return "lateral_y";
    }
    return "?";
}

std::array<int, 3> PointCloud::grid_coords(std::size_t i) const {
    const auto nx = static_cast<std::size_t>(counts[0]), ny = static_cast<std::size_t>(counts[1]);
    return {static_cast<int>(i % nx), static_cast<int>((i / nx) % ny), static_cast<int>(i / (nx * ny))};
}

std::vector<int> PointCloud::active_axes() const {
    switch (extents.dims) {
        case 1: return {2};
        case 2: return {0, 2};
        default: return {0, 1, 2};
    }
}

PointCloud build_grid(const Extents& e, std::array<int, 3> counts) {
    if (e.dims < 1 || e.dims > 3) throw ConfigError("dims must be 1, 2 or 3");
    PointCloud c;
    c.extents = e;
    const std::array<double, 3> len{e.l1, e.l2, e.L};
    const std::array<bool, 3> active{e.dims >= 2, e.dims == 3, true};
    for (int d = 0; d < 3; ++d) {
        if (!active[d]) {
            c.counts[d] = 1;
            continue;
        }
        if (counts[d] < 2) throw ConfigError("axis " + std::to_string(d) + " needs at least 2 nodes");
        if (!(len[d] > 0.0)) throw ConfigError("axis " + std::to_string(d) + " has a degenerate extent");
        c.counts[d] = counts[d];
        c.spacing[d] = len[d] / (counts[d] - 1);
    }
    const std::size_t n = static_cast<std::size_t>(c.counts[0]) * c.counts[1] * c.counts[2];
    c.nodes.reserve(n);
    c.tags.reserve(n);
    auto coord = [&](int d, int i) { return active[d] ? len[d] * i / (c.counts[d] - 1) : 0.0; };
    for (int iz = 0; iz < c.counts[2]; ++iz)
        for (int iy = 0; iy < c.counts[1]; ++iy)
            for (int ix = 0; ix < c.counts[0]; ++ix) {
                c.nodes.push_back({coord(0, ix), coord(1, iy), coord(2, iz)});
                BoundaryTag t = BoundaryTag::interior;
                if (iz == c.counts[2] - 1) t = BoundaryTag::top;
                else if (iz == 0) t = BoundaryTag::bottom;
                else if (active[0] && (ix == 0 || ix == c.counts[0] - 1)) t = BoundaryTag::lateral_x;
                else if (active[1] && (iy == 0 || iy == c.counts[1] - 1)) t = BoundaryTag::lateral_y;
                c.tags.push_back(t);
                if (t == BoundaryTag::interior) ++c.interior_count;
                else ++c.boundary_count;
            }
    return c;
}

std::pair<std::size_t, std::size_t> axis_neighbors(const PointCloud& cloud, std::size_t i, int axis) {
    if (axis < 0 || axis > 2 || cloud.counts[axis] < 2) throw std::out_of_range("axis not active");
    auto g = cloud.grid_coords(i);
    if (g[axis] == 0 || g[axis] == cloud.counts[axis] - 1) {
        throw std::out_of_range("node " + std::to_string(i) + " has no two-sided stencil along axis " +
                                std::to_string(axis));
    }
    auto l = g, r = g;
    --l[axis];
    ++r[axis];
    return {cloud.index(l[0], l[1], l[2]), cloud.index(r[0], r[1], r[2])};
}

}  // namespace kirflow
