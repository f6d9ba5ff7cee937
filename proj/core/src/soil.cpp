#include "kirflow/soil.hpp"

#include <cmath>
#include <string>

#include "kirflow/errors.hpp"

namespace kirflow {

namespace {

void require(bool ok, const SoilParams& p, const char* what) {
    if (!ok) {
        throw ConfigError("soil '" + p.name + "': " + what);
    }
}

// h/h_d on the unsaturated branch; both negative so the ratio is >= 1.
double ratio(double h, const SoilParams& p) {
    const double r = h / p.h_d;
    if (!(r > 0.0)) {
        throw DomainError("nonpositive head ratio in power law");
    }
    return r;
}

}  // namespace

void SoilParams::validate() const {
    require(std::isfinite(theta_r) && std::isfinite(theta_s) && std::isfinite(k_s) && std::isfinite(h_d) &&
                std::isfinite(lambda) && std::isfinite(beta),
            *this, "non-finite parameter");
    require(theta_r >= 0.0, *this, "theta_r must be >= 0");
    require(theta_r < theta_s, *this, "theta_r must be < theta_s");
    require(theta_s <= 1.0, *this, "theta_s must be <= 1");
    require(k_s > 0.0, *this, "k_s must be > 0");
    require(h_d < 0.0, *this, "h_d must be negative");
    require(lambda > 0.0, *this, "lambda must be > 0");
    require(beta > 1.0, *this, "beta must be > 1");
    require(lambda * beta > 1.0, *this, "lambda*beta must exceed 1");
}

SoilParams make_soil(std::string name, double theta_r, double theta_s, double k_s, double h_d, double lambda,
                     double beta) {
    SoilParams p{std::move(name), theta_r, theta_s, k_s, h_d, lambda, beta};
    p.validate();
    return p;
}

double saturation(double h, const SoilParams& p) {
    if (h > p.h_d) return 1.0;
    return std::pow(ratio(h, p), -p.lambda);
}

double relative_permeability(double h, const SoilParams& p) {
    if (h > p.h_d) return 1.0;
    return std::pow(ratio(h, p), -p.lambda * p.beta);
}

double conductivity(double h, const SoilParams& p) { return p.k_s * relative_permeability(h, p); }

double water_content(double S, const SoilParams& p) {
    if (!(S >= 0.0 && S <= 1.0)) {
        throw DomainError("saturation outside [0,1]: " + std::to_string(S));
    }
    return p.theta_r + S * p.capacity();
}

double invert_saturation(double S, const SoilParams& p) {
    if (!(S > 0.0 && S <= 1.0)) {
        throw DomainError("saturation must lie in (0,1] for inversion: " + std::to_string(S));
    }
    if (S == 1.0) return p.h_d;
    return p.h_d * std::pow(S, -1.0 / p.lambda);
}

double head_from_water_content(double theta, const SoilParams& p) {
    if (!(theta > p.theta_r && theta <= p.theta_s)) {
        throw DomainError("water content " + std::to_string(theta) + " outside (theta_r, theta_s] of soil '" +
                          p.name + "'");
    }
    return invert_saturation((theta - p.theta_r) / p.capacity(), p);
}

double moisture_capacity(double h, const SoilParams& p) {
    if (h > p.h_d) return 0.0;
    const double r = ratio(h, p);
    // d/dh of Φ (h/h_d)^-λ
    return p.capacity() * (-p.lambda / p.h_d) * std::pow(r, -p.lambda - 1.0);
}

double beta_from_lambda(double lambda) {
    if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
    return 3.0 + 2.0 / lambda;
}

BrooksCoreyFit vg_to_bc(double alpha, double n, double m) {
    if (!(m > 0.0 && m < 1.0)) throw DomainError("van Genuchten m must lie in (0,1)");
    if (!(n > 1.0)) throw DomainError("van Genuchten n must exceed 1");
    if (!(alpha > 0.0)) throw DomainError("van Genuchten alpha must be positive");
    if (std::abs(m - (1.0 - 1.0 / n)) > 1e-12) throw DomainError("van Genuchten m must equal 1 - 1/n");
    const double sx = 0.72 - 0.35 * std::exp(-std::pow(n, 4));
    const double lambda = (m / (1.0 - m)) * (1.0 - std::pow(0.5, 1.0 / m));
    const double mag = (1.0 / alpha) * std::pow(sx, 1.0 / lambda) * std::pow(std::pow(sx, -1.0 / m) - 1.0, 1.0 - m);
    return {-mag, lambda};
}

}  // namespace kirflow
