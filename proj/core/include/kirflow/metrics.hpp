#pragma once

#include <vector>

#include "kirflow/grid.hpp"

namespace kirflow {

double metric_rmse(const std::vector<double>& theta, const std::vector<double>& theta_ref);
// Ratio of sums of squares: Σ(θ - θref)² / Σ θref². Named after the L¹ error it reports.
double metric_l1(const std::vector<double>& theta, const std::vector<double>& theta_ref);

// Trapezoid weights of a uniform axis with n nodes, normalized to sum to one.
std::vector<double> mean_weights(int n);

// I = ∫₀ᴸ θ dz by the trapezoid rule; in 2D/3D the cross-sectional mean is taken first.
double total_mass(const std::vector<double>& theta, const PointCloud& cloud);

}  // namespace kirflow
