#pragma once

#include <string>
#include <utility>

namespace kirflow {

// Brooks-Corey record for one material. Units follow whatever table it came from.
struct SoilParams {
    std::string name;
    double theta_r = 0.0;
    double theta_s = 0.0;
    double k_s = 0.0;
    double h_d = 0.0;      // air-entry head, negative
    double lambda = 0.0;
    double beta = 0.0;

    double capacity() const { return theta_s - theta_r; }   // Φcap
    double lambda_beta() const { return lambda * beta; }

    // Throws ConfigError naming the offending field.
    void validate() const;
    bool operator==(const SoilParams&) const = default;
};

SoilParams make_soil(std::string name, double theta_r, double theta_s, double k_s, double h_d,
                     double lambda, double beta);

double saturation(double h, const SoilParams& p);
double relative_permeability(double h, const SoilParams& p);
double conductivity(double h, const SoilParams& p);   // Ks * kr
double water_content(double S, const SoilParams& p);
double invert_saturation(double S, const SoilParams& p);
// h from a water content in (θr, θs].
double head_from_water_content(double theta, const SoilParams& p);
// dθ/dh, zero on the saturated branch.
double moisture_capacity(double h, const SoilParams& p);

double beta_from_lambda(double lambda);

struct BrooksCoreyFit {
    double h_d;
    double lambda;
};
// van Genuchten (α, n, m) to Brooks-Corey. h_d comes back negative.
BrooksCoreyFit vg_to_bc(double alpha, double n, double m);

}  // namespace kirflow
