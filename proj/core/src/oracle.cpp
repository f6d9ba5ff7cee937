#include "kirflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "kirflow/errors.hpp"
#include "kirflow/kirchhoff.hpp"
#include "kirflow/lrbf.hpp"

namespace kirflow {

namespace {

// 8-point Gauss-Legendre on [-1, 1]
constexpr double kGlX[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                            0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr double kGlW[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                            0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

// ∫_a^b K dh for a < b <= h_d, in s = ln(-h) where the power law is an exponential.
double unsat_integral(double a, double b, const SoilParams& p) {
    const double s1 = std::log(-b), s2 = std::log(-a);
    const int panels = std::max(1, static_cast<int>(std::ceil((s2 - s1) / 0.25)));
    const double w = (s2 - s1) / panels;
    double acc = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double mid = s1 + (k + 0.5) * w;
        for (int g = 0; g < 8; ++g) {
            const double s = mid + 0.5 * w * kGlX[g];
            const double es = std::exp(s);
            acc += 0.5 * w * kGlW[g] * conductivity(-es, p) * es;
        }
    }
    return acc;
}

void tridiag(std::vector<double>& a, std::vector<double>& b, std::vector<double>& c, std::vector<double>& d,
             std::vector<double>& x) {
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    x[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
}

double theta_of(double h, const SoilParams& p) { return water_content(saturation(h, p), p); }

}  // namespace

double mean_conductivity(double h1, double h2, const SoilParams& p, ConductivityMean mean) {
    if (mean == ConductivityMean::arithmetic) return 0.5 * (conductivity(h1, p) + conductivity(h2, p));
    double a = std::min(h1, h2), b = std::max(h1, h2);
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(p.h_d)});
    if (b - a <= 1e-9 * scale) return conductivity(0.5 * (a + b), p);
    double acc = 0.0;
    if (b > p.h_d) acc += p.k_s * (b - std::max(a, p.h_d));
    if (a < p.h_d) acc += unsat_integral(a, std::min(b, p.h_d), p);
    return acc / (b - a);
}

std::vector<double> resample(const std::vector<double>& zs, const std::vector<double>& v, const std::vector<double>& zd) {
    std::vector<double> out(zd.size());
    for (std::size_t k = 0; k < zd.size(); ++k) {
        const double z = zd[k];
        auto it = std::lower_bound(zs.begin(), zs.end(), z);
        if (it == zs.begin()) {
            out[k] = v.front();
            continue;
        }
        if (it == zs.end()) {
            out[k] = v.back();
            continue;
        }
        const std::size_t j = static_cast<std::size_t>(it - zs.begin());
        if (*it == z) {
            out[k] = v[j];
            continue;
        }
        // nearest grid node when z matches up to rounding
        const double t = (z - zs[j - 1]) / (zs[j] - zs[j - 1]);
        if (t < 1e-9) out[k] = v[j - 1];
        else if (t > 1.0 - 1e-9) out[k] = v[j];
        else out[k] = (1.0 - t) * v[j - 1] + t * v[j];
    }
    return out;
}

OracleResult oracle_solve_1d(const OracleProblem& pb, const OracleConfig& cfg) {
    if (cfg.nodes < 3) throw ConfigError("oracle needs at least 3 nodes");
    if (!(cfg.dt > 0.0)) throw ConfigError("oracle time step must be positive");
    if (pb.layers.empty()) throw ConfigError("oracle column has no soil layers");
    Extents ext;
    ext.L = pb.L;
    ext.dims = 1;
    const SoilField field = pb.layers.size() == 1 ? SoilField(Homogeneous{pb.layers.front().soil}, ext)
                                                  : SoilField(LayeredZ{pb.layers}, ext);

    const int N = cfg.nodes;
    const double dz = pb.L / (N - 1);
    OracleResult res;
    res.z.resize(static_cast<std::size_t>(N));
    std::vector<const SoilParams*> soil(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        res.z[i] = pb.L * i / (N - 1);
        soil[i] = &field.at({0.0, 0.0, res.z[i]});
    }
    std::vector<double> h(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) h[i] = pb.initial.head_at(*soil[i], res.z[i]);
    const bool dir_top = pb.top == EndCondition::dirichlet, dir_bot = pb.bottom == EndCondition::dirichlet;
    if (dir_top) h[N - 1] = pb.boundary.top_head;
    if (dir_bot && pb.boundary.bottom_head) h[0] = *pb.boundary.bottom_head;

    auto thetas = [&](const std::vector<double>& hh) {
        std::vector<double> t(hh.size());
        for (std::size_t i = 0; i < hh.size(); ++i) t[i] = theta_of(hh[i], *soil[i]);
        return t;
    };
    auto mass = [&](const std::vector<double>& t) {
        double acc = 0.0;
        for (int i = 0; i < N; ++i) acc += (i == 0 || i == N - 1 ? 0.5 : 1.0) * t[i];
        return acc * dz;
    };
    auto K_half = [&](const std::vector<double>& hh, std::vector<double>& Kh) {
        for (int i = 0; i + 1 < N; ++i) {
            const SoilParams& pl = *soil[i];
            const SoilParams& pr = *soil[i + 1];
            if (cfg.mean == ConductivityMean::arithmetic) {
                Kh[i] = 0.5 * (conductivity(hh[i], pl) + conductivity(hh[i + 1], pr));
            } else if (&pl == &pr) {
                Kh[i] = mean_conductivity(hh[i], hh[i + 1], pl, cfg.mean);
            } else {
                Kh[i] = 0.5 * (mean_conductivity(hh[i], hh[i + 1], pl, cfg.mean) +
                               mean_conductivity(hh[i], hh[i + 1], pr, cfg.mean));
            }
        }
    };

    std::vector<double> outs = pb.output_times;
    std::sort(outs.begin(), outs.end());
    std::size_t next = 0;
    double t = 0.0;
    auto emit = [&]() {
        while (next < outs.size() && outs[next] <= t + 1e-9 * cfg.dt) {
            res.outputs.push_back({outs[next], thetas(h), h});
            ++next;
        }
    };
    res.mass.push_back(mass(thetas(h)));
    emit();

    std::vector<double> a(N), b(N), c(N), d(N), x(N), Kh(N - 1), hm(N), thp(N), C(N);
    double cumulative = 0.0;
    long step = 0;
    // a step that fails to converge is retried at half the length, down to dt / 2^10
    constexpr int max_halvings = 10;
    double dt_try = cfg.dt;
    while (t < pb.t_end - 1e-9 * cfg.dt) {
        double target = t + dt_try;
        const double stop = next < outs.size() ? std::min(outs[next], pb.t_end) : pb.t_end;
        if (target > stop - 1e-9 * cfg.dt) target = stop;
        const double dt = target - t;
        ++step;
        thp = thetas(h);
        hm = h;
        double delta = INFINITY;
        int it = 0;
        while (it < cfg.max_iterations) {
            ++it;
            K_half(hm, Kh);
            for (int i = 0; i < N; ++i) C[i] = moisture_capacity(hm[i], *soil[i]);
            const double r2 = 1.0 / (dz * dz);
            for (int i = 1; i + 1 < N; ++i) {
                const double th = theta_of(hm[i], *soil[i]);
                a[i] = -Kh[i - 1] * r2;
                c[i] = -Kh[i] * r2;
                b[i] = C[i] / dt + (Kh[i] + Kh[i - 1]) * r2;
                d[i] = C[i] / dt * hm[i] - (th - thp[i]) / dt + (Kh[i] - Kh[i - 1]) / dz;
            }
            if (dir_bot) {
                a[0] = 0.0, b[0] = 1.0, c[0] = 0.0, d[0] = h[0];
            } else {
                const double th = theta_of(hm[0], *soil[0]);
                a[0] = 0.0;
                c[0] = -2.0 * Kh[0] * r2;
                b[0] = C[0] / dt + 2.0 * Kh[0] * r2;
                d[0] = C[0] / dt * hm[0] - (th - thp[0]) / dt + 2.0 * Kh[0] / dz;
            }
            if (dir_top) {
                a[N - 1] = 0.0, b[N - 1] = 1.0, c[N - 1] = 0.0, d[N - 1] = h[N - 1];
            } else {
                const double th = theta_of(hm[N - 1], *soil[N - 1]);
                c[N - 1] = 0.0;
                a[N - 1] = -2.0 * Kh[N - 2] * r2;
                b[N - 1] = C[N - 1] / dt + 2.0 * Kh[N - 2] * r2;
                d[N - 1] = C[N - 1] / dt * hm[N - 1] - (th - thp[N - 1]) / dt - 2.0 * Kh[N - 2] / dz;
            }
            tridiag(a, b, c, d, x);
            delta = 0.0;
            for (int i = 0; i < N && std::isfinite(delta); ++i)
                delta = std::isfinite(x[i]) ? std::max(delta, std::abs(x[i] - hm[i])) : INFINITY;
            if (!std::isfinite(delta)) break;
            hm.swap(x);
            if (delta <= cfg.tol) break;
        }
        if (!(delta <= cfg.tol)) {
            if (dt_try > cfg.dt * std::ldexp(1.0, -max_halvings)) {
                dt_try *= 0.5;
                --step;
                continue;
            }
            std::ostringstream msg;
            msg << "oracle Picard iteration did not converge at step " << step << " (t = " << target
                << "), delta = " << delta << " after " << max_halvings << " step halvings";
            throw NonconvergenceError(step, target, delta, msg.str());
        }
        dt_try = std::min(cfg.dt, 2.0 * dt_try);
        // fluxes of the accepted iterate with the conductivities of the last sweep
        const double qb = dir_bot ? Kh[0] * ((hm[1] - hm[0]) / dz + 1.0) : 0.0;
        const double qt = dir_top ? Kh[N - 2] * ((hm[N - 1] - hm[N - 2]) / dz + 1.0) : 0.0;
        cumulative += dt * (qt - qb);
        h = hm;
        t = target;
        res.times.push_back(t);
        res.iterations.push_back(it);
        res.net_inflow.push_back(cumulative);
        const auto th = thetas(h);
        res.mass.push_back(mass(th));
        if (pb.on_step) pb.on_step(t, th);
        emit();
    }
    return res;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw DomainError("slope needs at least two paired samples");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - my);
    }
    return sxy / sxx;
}

MmsResult manufactured_solution_residual(const std::vector<int>& sizes, MmsField field, MmsOperator op, bool gravity) {
    const SoilParams soil = make_soil("mms", 0.09, 0.475, 0.0144, -0.3731, 0.131, 18.2672);
    const double hb = soil.h_d;
    const double lb = soil.lambda_beta();
    const double ustar = branch_value(soil, hb);
    const double pi = std::numbers::pi;
    MmsResult out;

    for (int n : sizes) {
        if (n < 4) throw ConfigError("manufactured-solution grids need at least 4 nodes");
        Extents ext;
        ext.L = 1.0;
        ext.dims = 1;
        const PointCloud cloud = build_grid(ext, {1, 1, n});
        const double dz = cloud.spacing[2];
        double err = 0.0;

        if (op == MmsOperator::lrbf) {
            // field in the Kirchhoff variable, kept on the unsaturated branch
            auto u_of = [&](double z) {
                switch (field) {
                    case MmsField::constant: return 0.5 * ustar;
                    case MmsField::linear: return ustar * (0.3 + 0.4 * z);
                    default: return ustar * (0.5 + 0.3 * std::sin(pi * z));
                }
            };
            auto du = [&](double z) {
                switch (field) {
                    case MmsField::constant: return 0.0;
                    case MmsField::linear: return 0.4 * ustar;
                    default: return 0.3 * ustar * pi * std::cos(pi * z);
                }
            };
            auto d2u = [&](double z) {
                return field == MmsField::smooth ? -0.3 * ustar * pi * pi * std::sin(pi * z) : 0.0;
            };
            const double chi_c = chi(soil, hb);
            KernelConfig kc;
            kc.c = 0.6;
            const LrbfOperators ops(cloud, 3, kc);
            std::vector<double> u(cloud.size()), F(cloud.size());
            for (std::size_t i = 0; i < cloud.size(); ++i) {
                u[i] = u_of(cloud.nodes[i][2]);
                F[i] = gravity ? coeff_F(inverse(u[i], soil, hb), soil, hb) : 0.0;
            }
            for (std::size_t s = 1; s + 1 < cloud.size(); ++s) {
                const double z = cloud.nodes[s][2];
                const FluxForm qm = averaged_flux(chi_c, chi_c, F[s - 1], F[s], 0, 0, dz, gravity);
                const FluxForm qp = averaged_flux(chi_c, chi_c, F[s], F[s + 1], 0, 0, dz, gravity);
                const StencilWeights sw = compose_stencil(0.0, {{qm, qp}}, {dz});
                const double discrete = sw.constant - ops.interior_row(s, sw).apply(u);
                double exact = chi_c * d2u(z);
                if (gravity) {
                    const double h = inverse(u_of(z), soil, hb);
                    const double dKdh = -lb * conductivity(h, soil) / h;
                    const double dhdu = 1.0 / forward_slope(h, soil, hb);
                    exact += dKdh * dhdu * du(z);
                }
                err = std::max(err, std::abs(discrete - exact));
            }
        } else {
            auto h_of = [&](double z) {
                switch (field) {
                    case MmsField::constant: return 2.0 * soil.h_d;
                    case MmsField::linear: return soil.h_d * (2.0 + z);
                    default: return soil.h_d * (2.0 + std::sin(pi * z));
                }
            };
            auto dh = [&](double z) {
                switch (field) {
                    case MmsField::constant: return 0.0;
                    case MmsField::linear: return soil.h_d;
                    default: return soil.h_d * pi * std::cos(pi * z);
                }
            };
            auto d2h = [&](double z) { return field == MmsField::smooth ? -soil.h_d * pi * pi * std::sin(pi * z) : 0.0; };
            const double g = gravity ? 1.0 : 0.0;
            auto Kh = [&](double h1, double h2) {
                return gravity ? mean_conductivity(h1, h2, soil, ConductivityMean::integral) : soil.k_s;
            };
            for (int i = 1; i + 1 < n; ++i) {
                const double z = cloud.nodes[i][2];
                const double hl = h_of(cloud.nodes[i - 1][2]), hc = h_of(z), hr = h_of(cloud.nodes[i + 1][2]);
                const double qp = Kh(hc, hr) * ((hr - hc) / dz + g);
                const double qm = Kh(hl, hc) * ((hc - hl) / dz + g);
                const double discrete = (qp - qm) / dz;
                double exact;
                if (gravity) {
                    const double K = conductivity(hc, soil);
                    const double dKdh = -lb * K / hc;
                    exact = dKdh * dh(z) * (dh(z) + g) + K * d2h(z);
                } else {
                    exact = soil.k_s * d2h(z);
                }
                err = std::max(err, std::abs(discrete - exact));
            }
        }
        out.spacing.push_back(dz);
        out.error.push_back(err);
    }
    bool positive = true;
    for (double e : out.error) positive = positive && e > 0.0;
    out.order = positive && out.error.size() >= 2 ? least_squares_slope(out.spacing, out.error) : INFINITY;
    return out;
}

}  // namespace kirflow
