#include "kirflow/kirchhoff.hpp"

#include <algorithm>
#include <cmath>
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

// Positive ratio of two negative heads; anything else means a caller bug.
double pos_ratio(double a, double b) {
    const double r = a / b;
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw DomainError("power of a non-positive head ratio (" + std::to_string(a) + "/" + std::to_string(b) + ")");
    }
    return r;
}

void check_h_bar(double h_bar) {
    if (!(h_bar < 0.0)) throw ConfigError("reference head h_bar must be negative");
}

}  // namespace

double compute_h_bar(const SoilField& f, std::array<int, 3> counts) {
    const Extents& e = f.extents();
    return std::visit(
        overloaded{
            [](const Homogeneous& g) { return g.soil.h_d; },
            [&](const LayeredZ& g) {
                double acc = 0.0;
                for (const auto& l : g.layers) acc += (l.z_hi - l.z_lo) * l.soil.h_d;
                return acc / e.L;
            },
            [&](const SplitX& g) {
                double lower_area = 0.0, x0 = 0.0;
                for (std::size_t k = 0; k <= g.x_breaks.size(); ++k) {
                    const double x1 = k < g.x_breaks.size() ? g.x_breaks[k] : e.l1;
                    lower_area += (x1 - x0) * g.z_interface[k];
                    x0 = x1;
                }
                const double frac = lower_area / (e.l1 * e.L);
                return frac * g.lower.h_d + (1.0 - frac) * g.upper.h_d;
            },
            [&](const Curvilinear&) {
                const int nx = std::max(counts[0], 2) - 1, nz = std::max(counts[2], 2) - 1;
                const double dx = e.l1 / nx, dz = e.L / nz;
                double acc = 0.0;
                for (int i = 0; i < nx; ++i)
                    for (int k = 0; k < nz; ++k) acc += f.at({(i + 0.5) * dx, 0.0, (k + 0.5) * dz}).h_d;
                return acc / (static_cast<double>(nx) * nz);
            },
        },
        f.geometry());
}

double branch_value(const SoilParams& p, double h_bar) {
    const double lb = p.lambda_beta();
    return h_bar / (1.0 - lb) * std::pow(pos_ratio(p.h_d, h_bar), 1.0 - lb);
}

double forward(double h, const SoilParams& p, double h_bar) {
    check_h_bar(h_bar);
    const double lb = p.lambda_beta();
    if (h <= p.h_d) return h_bar / (1.0 - lb) * std::pow(pos_ratio(h, h_bar), 1.0 - lb);
    return branch_value(p, h_bar) + std::pow(pos_ratio(p.h_d, h_bar), -lb) * (h - p.h_d);
}

double inverse(double u, const SoilParams& p, double h_bar) {
    check_h_bar(h_bar);
    if (!(u > 0.0) || !std::isfinite(u)) throw DomainError("Kirchhoff variable must be positive, got " + std::to_string(u));
    const double lb = p.lambda_beta();
    const double u_star = branch_value(p, h_bar);
    if (u <= u_star) return h_bar * std::pow((1.0 - lb) * u / h_bar, 1.0 / (1.0 - lb));
    return std::pow(pos_ratio(p.h_d, h_bar), lb) * (u - u_star) + p.h_d;
}

double forward_slope(double h, const SoilParams& p, double h_bar) {
    const double hh = h <= p.h_d ? h : p.h_d;
    return std::pow(pos_ratio(hh, h_bar), -p.lambda_beta());
}

double omega(const SoilParams& p, double h_bar) { return h_bar / p.h_d; }

double chi(const SoilParams& p, double h_bar) { return p.k_s * std::pow(omega(p, h_bar), -p.lambda_beta()); }

double coeff_E(double h, const SoilParams& p, double h_bar) {
    if (h > p.h_d) return 0.0;
    const double lb = p.lambda_beta();
    return p.capacity() * (-p.lambda / h_bar) * std::pow(omega(p, h_bar), -p.lambda) *
           std::pow(pos_ratio(h, h_bar), lb - p.lambda - 1.0);
}

double coeff_F(double h, const SoilParams& p, double h_bar) {
    if (h > p.h_d) return 0.0;
    return (1.0 - p.lambda_beta()) / h_bar / pos_ratio(h, h_bar);
}

double coeff_G(double h, const SoilParams& p) { return h > p.h_d ? p.k_s : 0.0; }

TransformContext::TransformContext(const SoilField& field, const std::vector<Point>& nodes, double h_bar)
    : field_(&field), h_bar_(h_bar) {
    check_h_bar(h_bar);
    material_.reserve(nodes.size());
    omega_.reserve(nodes.size());
    chi_.reserve(nodes.size());
    for (const auto& x : nodes) {
        const int m = field.region(x);
        const SoilParams& p = field.materials()[static_cast<std::size_t>(m)];
        material_.push_back(m);
        omega_.push_back(kirflow::omega(p, h_bar));
        chi_.push_back(kirflow::chi(p, h_bar));
    }
}

KirchhoffState state_from_head(const TransformContext& ctx, std::vector<double> h, double time) {
    KirchhoffState s;
    s.u.resize(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) s.u[i] = ctx.forward(i, h[i]);
    s.h = std::move(h);
    s.time = time;
    return s;
}

KirchhoffState state_from_u(const TransformContext& ctx, std::vector<double> u, double time) {
    KirchhoffState s;
    s.h.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) s.h[i] = ctx.inverse(i, u[i]);
    s.u = std::move(u);
    s.time = time;
    return s;
}

}  // namespace kirflow
