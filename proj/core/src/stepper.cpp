#include "kirflow/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "kirflow/errors.hpp"

namespace kirflow {

void StepperConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
    if (!(tol >= 0.0)) throw ConfigError("Picard tolerance must be nonnegative");
    if (max_picard < 1) throw ConfigError("Picard iteration cap must be at least 1");
}

double InitialCondition::head_at(const SoilParams& p, double z) const {
    switch (kind) {
        case Kind::head: return value;
        case Kind::water_content: return head_from_water_content(value, p);
        case Kind::linear_head: return value + slope * z;
    }
    return value;
}

KirchhoffState initial_state(const PointCloud& cloud, const TransformContext& ctx, const InitialCondition& ic) {
    std::vector<double> h(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) h[i] = ic.head_at(ctx.soil(i), cloud.nodes[i][2]);
    return state_from_head(ctx, std::move(h), 0.0);
}

std::vector<double> boundary_values(const PointCloud& cloud, const TransformContext& ctx, const BoundarySpec& bc,
                                    const InitialCondition& ic) {
    std::vector<double> ub(cloud.size(), 0.0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (cloud.tags[i] == BoundaryTag::top) {
            ub[i] = ctx.forward(i, bc.top_head);
        } else if (cloud.tags[i] == BoundaryTag::bottom) {
            const double hb = bc.bottom_head ? *bc.bottom_head : ic.head_at(ctx.soil(i), cloud.nodes[i][2]);
            ub[i] = ctx.forward(i, hb);
        }
    }
    return ub;
}

FluxForm series_interface_flux(const SoilParams& pl, const SoilParams& pr, double chi_l, double chi_r, double u_l,
                               double u_r, double h_l, double h_r, double h_bar, double delta, bool vertical) {
    const double half = 0.5 * delta;
    double g_l = 0.0, g_r = 0.0;
    // f(h) = χl (Ul(h) - ul) - χr (ur - Ur(h)) - (Δ/2)(gr - gl), strictly increasing in h
    auto f = [&](double h) {
        return chi_l * (forward(h, pl, h_bar) - u_l) - chi_r * (u_r - forward(h, pr, h_bar)) - half * (g_r - g_l);
    };
    auto df = [&](double h) { return chi_l * forward_slope(h, pl, h_bar) + chi_r * forward_slope(h, pr, h_bar); };
    auto solve = [&]() {
        double a = std::min(h_l, h_r), b = std::max(h_l, h_r);
        double fa = f(a), fb = f(b);
        for (int k = 0; fa > 0.0; ++k) {
            if (k > 200) throw SolverError("interface head bracket search failed (lower side)");
            b = a;
            fb = fa;
            a = a < 0.0 ? 2.0 * a - 1e-3 * std::abs(h_bar) : -std::abs(h_bar);
            fa = f(a);
        }
        for (int k = 0; fb < 0.0; ++k) {
            if (k > 200) throw SolverError("interface head bracket search failed (upper side)");
            a = b;
            fa = fb;
            b = b + std::max(std::abs(b), std::abs(h_bar));
            fb = f(b);
        }
        double h = fa == fb ? a : a - fa * (b - a) / (fb - fa);
        for (int it = 0; it < 100; ++it) {
            const double fh = f(h);
            if (fh == 0.0) return h;
            if (fh < 0.0) a = h;
            else b = h;
            double hn = h - fh / df(h);
            if (!(hn > a && hn < b)) hn = 0.5 * (a + b);
            if (std::abs(hn - h) <= 1e-14 * std::max(1.0, std::abs(hn)) || b - a <= 1e-14 * std::max(1.0, std::abs(a)))
                return hn;
            h = hn;
        }
        return h;
    };

    double hI = solve();
    if (vertical) {
        g_l = 0.5 * (conductivity(h_l, pl) + conductivity(hI, pl));
        g_r = 0.5 * (conductivity(h_r, pr) + conductivity(hI, pr));
        hI = solve();
    }
    const double Ul = forward(hI, pl, h_bar), Ur = forward(hI, pr, h_bar);
    const double a = chi_l * forward_slope(hI, pl, h_bar), b = chi_r * forward_slope(hI, pr, h_bar);
    const double ab = a + b, k = 1.0 / half;
    FluxForm q;
    q.w_left = k * (-chi_l + a * chi_l / ab);
    q.w_right = k * (a * chi_r / ab);
    q.constant = k * (chi_l * Ul + a * (half * (g_r - g_l) - chi_r * Ur - chi_l * Ul) / ab) + g_l;
    return q;
}

Stepper::Stepper(const PointCloud& cloud, const TransformContext& ctx, const LrbfOperators& ops,
                 std::vector<double> boundary_u, StepperConfig cfg)
    : cloud_(&cloud), ctx_(&ctx), ops_(&ops), boundary_u_(std::move(boundary_u)), cfg_(cfg),
      solver_(cfg.solver, cloud.dims()) {
    cfg_.validate();
    const std::size_t N = cloud.size();
    if (ctx.size() != N || boundary_u_.size() != N) throw ConfigError("stepper inputs disagree on node count");
    const auto& axes = ops.axes();
    flux_.assign(axes.size(), std::vector<FluxForm>(N));
    mismatch_.assign(axes.size() * N, 0);
    for (std::size_t a = 0; a < axes.size(); ++a) {
        for (std::size_t i = 0; i < N; ++i) {
            const auto g = cloud.grid_coords(i);
            if (g[axes[a]] == cloud.counts[axes[a]] - 1) continue;
            auto gr = g;
            ++gr[axes[a]];
            const std::size_t j = cloud.index(gr[0], gr[1], gr[2]);
            const SoilParams& p = ctx.soil(i);
            const SoilParams& q = ctx.soil(j);
            mismatch_[a * N + i] = (p.lambda_beta() != q.lambda_beta() || p.h_d != q.h_d) ? 1 : 0;
        }
    }
    E_.resize(N);
    F_.resize(N);
    G_.resize(N);
    theta_m_.resize(N);
    const auto wx = mean_weights(cloud.counts[0]), wy = mean_weights(cloud.counts[1]);
    xweights_.resize(static_cast<std::size_t>(cloud.counts[0]) * cloud.counts[1]);
    for (int iy = 0; iy < cloud.counts[1]; ++iy)
        for (int ix = 0; ix < cloud.counts[0]; ++ix) xweights_[ix + cloud.counts[0] * iy] = wx[ix] * wy[iy];
    build_pattern();
}

void Stepper::build_pattern() {
    const std::size_t N = cloud_->size();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(N * (ops_->n_s() + 2));
    std::vector<std::vector<std::size_t>> cols(N);
    sys_.kinds.resize(N);
    for (std::size_t s = 0; s < N; ++s) {
        switch (cloud_->tags[s]) {
            case BoundaryTag::interior:
                sys_.kinds[s] = RowKind::interior;
                cols[s] = ops_->columns(s);
                break;
            case BoundaryTag::top:
            case BoundaryTag::bottom:
                sys_.kinds[s] = RowKind::dirichlet;
                cols[s] = {s};
                break;
            default:
                sys_.kinds[s] = RowKind::neumann;
                cols[s] = ops_->domain(s).members;
        }
        for (auto c : cols[s]) trip.emplace_back(static_cast<int>(s), static_cast<int>(c), 1.0);
    }
    sys_.A.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    sys_.A.setFromTriplets(trip.begin(), trip.end());
    sys_.A.makeCompressed();
    sys_.b.resize(static_cast<Eigen::Index>(N));
    const int* outer = sys_.A.outerIndexPtr();
    const int* inner = sys_.A.innerIndexPtr();
    slots_.resize(N);
    for (std::size_t s = 0; s < N; ++s) {
        slots_[s].resize(cols[s].size());
        for (std::size_t k = 0; k < cols[s].size(); ++k) {
            const int c = static_cast<int>(cols[s][k]);
            const int* lo = inner + outer[c];
            const int* hi = inner + outer[c + 1];
            const int* pos = std::lower_bound(lo, hi, static_cast<int>(s));
            slots_[s][k] = static_cast<int>(pos - inner);
        }
    }
}

void Stepper::half_node_fluxes(const std::vector<double>& u, const std::vector<double>& h) {
    const auto& axes = ops_->axes();
    const std::size_t N = cloud_->size();
    const double hb = ctx_->h_bar();
    for (std::size_t a = 0; a < axes.size(); ++a) {
        const int ax = axes[a];
        const double delta = cloud_->spacing[ax];
        const bool vertical = ax == 2;
        const std::size_t stride = ax == 0 ? 1 : ax == 1 ? static_cast<std::size_t>(cloud_->counts[0])
                                                         : static_cast<std::size_t>(cloud_->counts[0]) * cloud_->counts[1];
        for (std::size_t i = 0; i < N; ++i) {
            const auto g = cloud_->grid_coords(i);
            if (g[ax] == cloud_->counts[ax] - 1) continue;
            const std::size_t j = i + stride;
            if (mismatch_[a * N + i] && cfg_.interface == InterfaceFlux::series) {
                flux_[a][i] = series_interface_flux(ctx_->soil(i), ctx_->soil(j), ctx_->chi(i), ctx_->chi(j), u[i], u[j],
                                                    h[i], h[j], hb, delta, vertical);
            } else {
                flux_[a][i] = averaged_flux(ctx_->chi(i), ctx_->chi(j), F_[i], F_[j], G_[i], G_[j], delta, vertical);
                // between saturated nodes χ̄F̄ū is Ks whatever u is; kept implicit it moves the
                // Picard error along the saturated zone a few nodes per sweep
                if (vertical && cfg_.scheme == TimeScheme::conservative && h[i] > ctx_->soil(i).h_d &&
                    h[j] > ctx_->soil(j).h_d) {
                    const double adv = 0.25 * (ctx_->chi(i) + ctx_->chi(j)) * 0.5 * (F_[i] + F_[j]);
                    flux_[a][i].w_left -= adv;
                    flux_[a][i].w_right -= adv;
                    flux_[a][i].constant += adv * (u[i] + u[j]);
                }
            }
        }
    }
}

GlobalSystem Stepper::assemble(const KirchhoffState& prev, const std::vector<double>& u_m,
                               const std::vector<double>& h_m, double dt) {
    const std::size_t N = cloud_->size();
    const double hb = ctx_->h_bar();
    const bool conservative = cfg_.scheme == TimeScheme::conservative;
    for (std::size_t i = 0; i < N; ++i) {
        const SoilParams& p = ctx_->soil(i);
        const double h = h_m[i];
        E_[i] = coeff_E(h, p, hb);
        if (conservative) {
            // saturated nodes: χ F u^m reproduces Ks, so gravity stays continuous across h_d
            F_[i] = h <= p.h_d ? coeff_F(h, p, hb) : p.k_s / (ctx_->chi(i) * u_m[i]);
            G_[i] = 0.0;
            theta_m_[i] = water_content(saturation(h, p), p);
        } else {
            F_[i] = coeff_F(h, p, hb);
            G_[i] = coeff_G(h, p);
        }
    }
    half_node_fluxes(u_m, h_m);

    const auto& axes = ops_->axes();
    std::vector<double> spacing;
    for (int ax : axes) spacing.push_back(cloud_->spacing[ax]);
    std::vector<std::array<FluxForm, 2>> fl(axes.size());
    std::vector<double> buf(ops_->n_s() + 8);
    double* val = sys_.A.valuePtr();

    for (std::size_t s = 0; s < N; ++s) {
        const auto& sl = slots_[s];
        switch (sys_.kinds[s]) {
            case RowKind::dirichlet:
                val[sl[0]] = 1.0;
                sys_.b[static_cast<Eigen::Index>(s)] = boundary_u_[s];
                break;
            case RowKind::neumann: {
                ops_->neumann_weights(s, ctx_->chi(s), buf.data());
                // u jumps between soils while h does not: members of another soil enter as the
                // center soil's u of their head, linearized at the iterate
                const auto& mem = ops_->domain(s).members;
                const SoilParams& pc = ctx_->soil(s);
                double rhs = 0.0;
                for (std::size_t k = 0; k < sl.size(); ++k) {
                    const std::size_t j = mem[k];
                    if (ctx_->material(j) == ctx_->material(s)) continue;
                    const SoilParams& pj = ctx_->soil(j);
                    const double r = forward_slope(h_m[j], pc, hb) / forward_slope(h_m[j], pj, hb);
                    rhs -= buf[k] * (forward(h_m[j], pc, hb) - r * u_m[j]);
                    buf[k] *= r;
                }
                for (std::size_t k = 0; k < sl.size(); ++k) val[sl[k]] = buf[k];
                sys_.b[static_cast<Eigen::Index>(s)] = rhs;
                break;
            }
            case RowKind::interior: {
                const auto st = ops_->stencil(s);
                for (std::size_t a = 0; a < axes.size(); ++a) {
                    fl[a][0] = flux_[a][st[1 + 2 * a]];
                    fl[a][1] = flux_[a][s];
                }
                const double e_dt = E_[s] / dt;
                const StencilWeights sw = compose_stencil(e_dt, fl, spacing);
                ops_->interior_weights(s, sw, buf.data());
                for (std::size_t k = 0; k < sl.size(); ++k) val[sl[k]] = buf[k];
                double rhs = sw.constant;
                if (conservative) {
                    const SoilParams& p = ctx_->soil(s);
                    const double theta_p = water_content(saturation(prev.h[s], p), p);
                    rhs += e_dt * u_m[s] - (theta_m_[s] - theta_p) / dt;
                } else {
                    rhs += e_dt * prev.u[s];
                }
                sys_.b[static_cast<Eigen::Index>(s)] = rhs;
                break;
            }
        }
    }
    return sys_;
}

double Stepper::boundary_flux(const std::vector<double>& u) const {
    // vertical axis is always the last active axis
    const std::size_t a = ops_->axes().size() - 1;
    const std::size_t layer = static_cast<std::size_t>(cloud_->counts[0]) * cloud_->counts[1];
    const std::size_t nz = static_cast<std::size_t>(cloud_->counts[2]);
    double q = 0.0;
    for (std::size_t c = 0; c < layer; ++c) {
        const std::size_t ib = c, it = c + layer * (nz - 2);
        const FluxForm& fb = flux_[a][ib];
        const FluxForm& ft = flux_[a][it];
        const double qb = fb.w_left * u[ib] + fb.w_right * u[ib + layer] + fb.constant;
        const double qt = ft.w_left * u[it] + ft.w_right * u[it + layer] + ft.constant;
        q += xweights_[c] * (qt - qb);
    }
    return q;
}

StepResult Stepper::picard_iterate(const KirchhoffState& prev, double dt, long step_index) {
    const std::size_t N = cloud_->size();
    std::vector<double> u_m = prev.u, h_m = prev.h;
    Eigen::VectorXd x(static_cast<Eigen::Index>(N));
    double delta = INFINITY;
    int m = 0;
    while (m < cfg_.max_picard) {
        ++m;
        assemble(prev, u_m, h_m, dt);
        for (std::size_t i = 0; i < N; ++i) x[static_cast<Eigen::Index>(i)] = u_m[i];
        const SolveStats st = solver_.solve(sys_, x);
        ++stats_.linear_solves;
        stats_.solver_iterations += st.iterations;
        stats_.factorizations += st.refreshed ? 1 : 0;
        stats_.direct_fallbacks += st.fallback ? 1 : 0;
        stats_.max_solver_residual = std::max(stats_.max_solver_residual, st.residual);
        // identity rows: keep the boundary data free of solver roundoff
        for (std::size_t i = 0; i < N; ++i)
            if (sys_.kinds[i] == RowKind::dirichlet) x[static_cast<Eigen::Index>(i)] = boundary_u_[i];
        delta = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double xi = x[static_cast<Eigen::Index>(i)];
            if (!(xi > 0.0) || !std::isfinite(xi)) {
                std::ostringstream msg;
                msg << "Picard iterate left the admissible range at node " << i << " (u = " << xi << ") in step "
                    << step_index;
                throw NonconvergenceError(step_index, prev.time + dt, INFINITY, msg.str());
            }
            delta = std::max(delta, std::abs(xi - u_m[i]));
            u_m[i] = xi;
        }
        if (delta <= cfg_.tol) break;
        for (std::size_t i = 0; i < N; ++i) h_m[i] = ctx_->inverse(i, u_m[i]);
    }
    if (!(delta <= cfg_.tol)) {
        std::ostringstream msg;
        msg << "Picard iteration did not converge in " << cfg_.max_picard << " iterations at step " << step_index
            << " (t = " << prev.time + dt << "), final delta = " << delta << " > tol = " << cfg_.tol;
        throw NonconvergenceError(step_index, prev.time + dt, delta, msg.str());
    }
    StepResult r;
    r.iterations = m;
    r.delta = delta;
    r.net_inflow = dt * boundary_flux(u_m);
    r.state = state_from_u(*ctx_, std::move(u_m), prev.time + dt);
    return r;
}

std::vector<double> water_contents(const KirchhoffState& s, const TransformContext& ctx) {
    std::vector<double> th(s.h.size());
    for (std::size_t i = 0; i < th.size(); ++i) {
        const SoilParams& p = ctx.soil(i);
        th[i] = water_content(saturation(s.h[i], p), p);
    }
    return th;
}

RunResult run(Stepper& stepper, const KirchhoffState& initial, const RunOptions& opt) {
    const double dt = stepper.config().dt;
    if (!(opt.t_end >= 0.0)) throw ConfigError("final time must be nonnegative");
    std::vector<double> outs = opt.output_times;
    std::sort(outs.begin(), outs.end());
    for (double t : outs)
        if (t < 0.0 || t > opt.t_end * (1.0 + 1e-12)) throw ConfigError("output time outside [0, t_end]");

    RunResult res;
    const TransformContext& ctx = stepper.context();
    const PointCloud& cloud = stepper.cloud();
    // Dirichlet data hold from t = 0 on, so the mass budget starts from the imposed state
    KirchhoffState cur = initial;
    for (std::size_t i = 0; i < cloud.size(); ++i)
        if (cloud.tags[i] == BoundaryTag::top || cloud.tags[i] == BoundaryTag::bottom) {
            cur.u[i] = stepper.boundary_u()[i];
            cur.h[i] = ctx.inverse(i, cur.u[i]);
        }
    res.mass.push_back(total_mass(water_contents(cur, ctx), cloud));
    std::size_t next_out = 0;
    auto emit = [&](const KirchhoffState& s) {
        while (next_out < outs.size() && outs[next_out] <= s.time + 1e-9 * dt) {
            res.outputs.push_back(s);
            res.outputs.back().time = outs[next_out];
            ++next_out;
        }
    };
    emit(cur);
    long step = 0;
    double cumulative = 0.0;
    // land exactly on output times and t_end; otherwise march with the configured Δt
    while (cur.time < opt.t_end - 1e-9 * dt) {
        double target = cur.time + dt;
        const double stop = next_out < outs.size() ? std::min(outs[next_out], opt.t_end) : opt.t_end;
        if (target > stop - 1e-9 * dt) target = stop;
        ++step;
        StepResult r = stepper.picard_iterate(cur, target - cur.time, step);
        r.state.time = target;
        cumulative += r.net_inflow;
        res.iterations.push_back(r.iterations);
        res.times.push_back(target);
        res.net_inflow.push_back(cumulative);
        res.mass.push_back(total_mass(water_contents(r.state, ctx), cloud));
        if (opt.on_step) opt.on_step(r, step);
        cur = std::move(r.state);
        emit(cur);
    }
    return res;
}

}  // namespace kirflow
