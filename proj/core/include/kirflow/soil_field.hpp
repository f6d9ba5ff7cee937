#pragma once

#include <array>
#include <variant>
#include <vector>

#include "kirflow/soil.hpp"

namespace kirflow {

using Point = std::array<double, 3>;   // (x, y, z); z is vertical, positive upward

struct Extents {
    double l1 = 0.0;   // x
    double l2 = 0.0;   // y
    double L = 0.0;    // z
    int dims = 1;
    bool operator==(const Extents&) const = default;
};

struct Homogeneous {
    SoilParams soil;
    bool operator==(const Homogeneous&) const = default;
};

struct Layer {
    double z_lo;
    double z_hi;
    SoilParams soil;
    bool operator==(const Layer&) const = default;
};

// Layers ordered bottom to top, covering [0, L] without gaps.
struct LayeredZ {
    std::vector<Layer> layers;
    bool operator==(const LayeredZ&) const = default;
};

// Piecewise-constant material interface in x. Strip k spans (x_breaks[k-1], x_breaks[k]];
// inside it, z <= z_interface[k] is the lower soil.
struct SplitX {
    std::vector<double> x_breaks;
    std::vector<double> z_interface;
    SoilParams upper;
    SoilParams lower;
    bool operator==(const SplitX&) const = default;
};

// ξ(x) = l2 (0.1 (1 - cos(πx/l1)) + 0.45); z >= ξ is the upper soil.
struct Curvilinear {
    double l1;
    double l2;
    SoilParams upper;
    SoilParams lower;
    bool operator==(const Curvilinear&) const = default;
};

using Geometry = std::variant<Homogeneous, LayeredZ, SplitX, Curvilinear>;

class SoilField {
public:
    SoilField(Geometry geometry, Extents extents);

    const SoilParams& at(const Point& x) const;
    // Index into materials() of the region owning x.
    int region(const Point& x) const;
    const std::vector<SoilParams>& materials() const { return materials_; }
    const Geometry& geometry() const { return geometry_; }
    const Extents& extents() const { return extents_; }
    bool homogeneous() const { return materials_.size() == 1; }

    // Interface elevation of the curvilinear geometry.
    double xi(double x) const;

private:
    Geometry geometry_;
    Extents extents_;
    std::vector<SoilParams> materials_;
};

const SoilParams& field_lookup(const Point& x, const SoilField& f);

}  // namespace kirflow
