#include "kirflow/soil_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kirflow/errors.hpp"

namespace kirflow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double tol_of(double extent) { return 1e-12 * std::max(1.0, std::abs(extent)); }

}  // namespace

SoilField::SoilField(Geometry geometry, Extents extents) : geometry_(std::move(geometry)), extents_(extents) {
    if (extents_.dims < 1 || extents_.dims > 3) throw ConfigError("dims must be 1, 2 or 3");
    if (!(extents_.L > 0.0)) throw ConfigError("domain height L must be positive");
    if (extents_.dims >= 2 && !(extents_.l1 > 0.0)) throw ConfigError("domain width l1 must be positive");
    if (extents_.dims == 3 && !(extents_.l2 > 0.0)) throw ConfigError("domain depth l2 must be positive");

    std::visit(overloaded{
                   [&](const Homogeneous& g) { materials_ = {g.soil}; },
                   [&](const LayeredZ& g) {
                       if (g.layers.empty()) throw ConfigError("layered field needs at least one layer");
                       const double tz = tol_of(extents_.L);
                       if (std::abs(g.layers.front().z_lo) > tz) throw ConfigError("lowest layer must start at z=0");
                       if (std::abs(g.layers.back().z_hi - extents_.L) > tz)
                           throw ConfigError("highest layer must end at z=L");
                       for (std::size_t k = 0; k < g.layers.size(); ++k) {
                           if (!(g.layers[k].z_hi > g.layers[k].z_lo))
                               throw ConfigError("layer " + std::to_string(k) + " has empty z-interval");
                           if (k > 0 && std::abs(g.layers[k].z_lo - g.layers[k - 1].z_hi) > tz)
                               throw ConfigError("layers " + std::to_string(k - 1) + " and " + std::to_string(k) +
                                                 " leave a gap or overlap");
                           materials_.push_back(g.layers[k].soil);
                       }
                   },
                   [&](const SplitX& g) {
                       if (extents_.dims < 2) throw ConfigError("split_x geometry needs dims >= 2");
                       if (g.z_interface.size() != g.x_breaks.size() + 1)
                           throw ConfigError("split_x needs one interface height per strip");
                       for (std::size_t k = 0; k < g.x_breaks.size(); ++k) {
                           if (!(g.x_breaks[k] > 0.0 && g.x_breaks[k] < extents_.l1))
                               throw ConfigError("split_x break outside (0, l1)");
                           if (k > 0 && !(g.x_breaks[k] > g.x_breaks[k - 1]))
                               throw ConfigError("split_x breaks must increase");
                       }
                       for (double zi : g.z_interface)
                           if (!(zi >= 0.0 && zi <= extents_.L)) throw ConfigError("split_x interface outside [0, L]");
                       materials_ = {g.lower, g.upper};
                   },
                   [&](const Curvilinear& g) {
                       if (extents_.dims < 2) throw ConfigError("curvilinear geometry needs dims >= 2");
                       if (!(g.l1 > 0.0 && g.l2 > 0.0)) throw ConfigError("curvilinear l1, l2 must be positive");
                       materials_ = {g.lower, g.upper};
                   },
               },
               geometry_);
    for (const auto& m : materials_) m.validate();
}

double SoilField::xi(double x) const {
    const auto* g = std::get_if<Curvilinear>(&geometry_);
    if (!g) throw ConfigError("xi() queried on a non-curvilinear field");
    const double l1 = g->l1, l2 = g->l2;
    return l2 * (0.1 * (1.0 - std::cos(std::numbers::pi * x / l1)) + 0.45);
}

int SoilField::region(const Point& x) const {
    const double tx = tol_of(extents_.l1), ty = tol_of(extents_.l2), tz = tol_of(extents_.L);
    bool inside = x[2] >= -tz && x[2] <= extents_.L + tz;
    if (extents_.dims >= 2) inside = inside && x[0] >= -tx && x[0] <= extents_.l1 + tx;
    if (extents_.dims == 3) inside = inside && x[1] >= -ty && x[1] <= extents_.l2 + ty;
    if (!inside) {
        throw DomainError("point (" + std::to_string(x[0]) + ", " + std::to_string(x[1]) + ", " +
                          std::to_string(x[2]) + ") outside the domain");
    }
    return std::visit(overloaded{
                          [](const Homogeneous&) { return 0; },
                          [&](const LayeredZ& g) {
                              // interface points belong to the layer below
                              for (std::size_t k = 0; k < g.layers.size(); ++k)
                                  if (x[2] <= g.layers[k].z_hi) return static_cast<int>(k);
                              return static_cast<int>(g.layers.size()) - 1;
                          },
                          [&](const SplitX& g) {
                              std::size_t strip = 0;
                              while (strip < g.x_breaks.size() && x[0] > g.x_breaks[strip]) ++strip;
                              return x[2] <= g.z_interface[strip] ? 0 : 1;
                          },
                          [&](const Curvilinear&) { return x[2] >= xi(x[0]) ? 1 : 0; },
                      },
                      geometry_);
}

const SoilParams& SoilField::at(const Point& x) const { return materials_[static_cast<std::size_t>(region(x))]; }

const SoilParams& field_lookup(const Point& x, const SoilField& f) { return f.at(x); }

}  // namespace kirflow
