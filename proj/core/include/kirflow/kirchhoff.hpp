#pragma once

#include <array>
#include <vector>

#include "kirflow/soil.hpp"
#include "kirflow/soil_field.hpp"

namespace kirflow {

// Exact measure-weighted mean of h_d for box-aligned geometries. Curvilinear fields use
// the midpoint rule on the cells of the collocation grid given by counts (Nx, Ny, Nz).
double compute_h_bar(const SoilField& f, std::array<int, 3> counts = {2, 2, 2});

// Piecewise Kirchhoff variable u(h) for one material relative to the reference head h̄.
double forward(double h, const SoilParams& p, double h_bar);
double inverse(double u, const SoilParams& p, double h_bar);
// du/dh, continuous at h_d.
double forward_slope(double h, const SoilParams& p, double h_bar);
// u at the branch point h = h_d.
double branch_value(const SoilParams& p, double h_bar);

double coeff_E(double h, const SoilParams& p, double h_bar);
double coeff_F(double h, const SoilParams& p, double h_bar);
double coeff_G(double h, const SoilParams& p);
double omega(const SoilParams& p, double h_bar);
double chi(const SoilParams& p, double h_bar);

// Per-node cache of material index, ω and χ.
class TransformContext {
public:
    TransformContext(const SoilField& field, const std::vector<Point>& nodes, double h_bar);

    double h_bar() const { return h_bar_; }
    const SoilField& field() const { return *field_; }
    std::size_t size() const { return material_.size(); }
    const SoilParams& soil(std::size_t i) const { return field_->materials()[material_[i]]; }
    int material(std::size_t i) const { return material_[i]; }
    double omega(std::size_t i) const { return omega_[i]; }
    double chi(std::size_t i) const { return chi_[i]; }

    double forward(std::size_t i, double h) const { return kirflow::forward(h, soil(i), h_bar_); }
    double inverse(std::size_t i, double u) const { return kirflow::inverse(u, soil(i), h_bar_); }

private:
    const SoilField* field_;
    double h_bar_;
    std::vector<int> material_;
    std::vector<double> omega_;
    std::vector<double> chi_;
};

struct KirchhoffState {
    std::vector<double> u;
    std::vector<double> h;
    double time = 0.0;
};

KirchhoffState state_from_head(const TransformContext& ctx, std::vector<double> h, double time);
KirchhoffState state_from_u(const TransformContext& ctx, std::vector<double> u, double time);

}  // namespace kirflow
