#include "kirflow/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "kirflow/errors.hpp"

namespace kirflow {

namespace {

void check_lengths(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw DomainError("metric inputs differ in length (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
    if (a.empty()) throw DomainError("metric inputs are empty");
}

}  // namespace

double metric_rmse(const std::vector<double>& theta, const std::vector<double>& theta_ref) {
    check_lengths(theta, theta_ref);
    double s = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double d = theta[i] - theta_ref[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(theta.size()));
}

double metric_l1(const std::vector<double>& theta, const std::vector<double>& theta_ref) {
    check_lengths(theta, theta_ref);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double d = theta[i] - theta_ref[i];
        num += d * d;
        den += theta_ref[i] * theta_ref[i];
    }
    if (den == 0.0) throw DomainError("L1er denominator is zero");
    return num / den;
}

std::vector<double> mean_weights(int n) {
    if (n <= 1) return {1.0};
    std::vector<double> w(static_cast<std::size_t>(n), 1.0 / (n - 1));
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

double total_mass(const std::vector<double>& theta, const PointCloud& cloud) {
    if (theta.size() != cloud.size()) throw DomainError("profile size does not match the grid");
    const auto wx = mean_weights(cloud.counts[0]), wy = mean_weights(cloud.counts[1]), wz = mean_weights(cloud.counts[2]);
    double acc = 0.0;
    std::size_t i = 0;
    for (int iz = 0; iz < cloud.counts[2]; ++iz)
        for (int iy = 0; iy < cloud.counts[1]; ++iy)
            for (int ix = 0; ix < cloud.counts[0]; ++ix, ++i) acc += wx[ix] * wy[iy] * wz[iz] * theta[i];
    return acc * cloud.extents.L;
}

}  // namespace kirflow
