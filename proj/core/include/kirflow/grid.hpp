#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "kirflow/soil_field.hpp"

namespace kirflow {

enum class BoundaryTag { interior, bottom, top, lateral_x, lateral_y };

const char* tag_name(BoundaryTag t);

// Tensor-product uniform grid. Node index = ix + Nx*(iy + Ny*iz); inactive axes have count 1.
struct PointCloud {
    Extents extents;
    std::array<int, 3> counts{1, 1, 1};
    std::array<double, 3> spacing{0.0, 0.0, 0.0};
    std::vector<Point> nodes;
    std::vector<BoundaryTag> tags;
    std::size_t interior_count = 0;
    std::size_t boundary_count = 0;

    std::size_t size() const { return nodes.size(); }
    int dims() const { return extents.dims; }
    std::size_t index(int ix, int iy, int iz) const {
        return static_cast<std::size_t>(ix) +
               static_cast<std::size_t>(counts[0]) *
                   (static_cast<std::size_t>(iy) + static_cast<std::size_t>(counts[1]) * static_cast<std::size_t>(iz));
    }
    std::array<int, 3> grid_coords(std::size_t i) const;
    // Axes carrying a stencil: z in 1D, (x, z) in 2D, (x, y, z) in 3D.
    std::vector<int> active_axes() const;
    bool is_boundary(std::size_t i) const { return tags[i] != BoundaryTag::interior; }
};

// counts are (Nx, Ny, Nz); entries for inactive axes are ignored.
PointCloud build_grid(const Extents& extents, std::array<int, 3> counts);

// Adjacent nodes along axis (0=x, 1=y, 2=z). Throws std::out_of_range at the edge of that axis.
std::pair<std::size_t, std::size_t> axis_neighbors(const PointCloud& cloud, std::size_t i, int axis);

}  // namespace kirflow
