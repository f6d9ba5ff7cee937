#include "kirflow/lrbf.hpp"

#include <quadmath.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <sstream>
#include <string>

#include "kirflow/errors.hpp"

namespace kirflow {

using quad = __float128;

// binary128 has a 113-bit significand: epsilon 2^-112
double default_condition_limit() { return kDoubleConditionLimit * (DBL_EPSILON / std::ldexp(1.0, -112)); }

void KernelConfig::validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("kernel shape parameter c must be positive");
    if (!(condition_limit > 1.0)) throw ConfigError("condition limit must exceed 1");
}

double kernel(double r, double c) {
    const double cr = c * r;
    return std::exp(-cr * cr);
}

struct LocalSystem::Impl {
    std::vector<quad> inv;   // n x n, row-major
};

namespace {

quad kernel_q(const Point& a, const Point& b, double c) {
    quad r2 = 0;
    for (int d = 0; d < 3; ++d) {
        const quad dx = static_cast<quad>(a[d]) - static_cast<quad>(b[d]);
        r2 += dx * dx;
    }
    const quad cq = c;
    return expq(-cq * cq * r2);
}

quad fabs_q(quad x) { return x < 0 ? -x : x; }

void check_conditioning(const LocalSystem& sys, std::size_t node, const KernelConfig& k) {
    if (!sys.positive_definite() || !(sys.condition() <= k.condition_limit)) {
        std::ostringstream msg;
        msg << "local Gram matrix at node " << node << " is ill-conditioned (condition estimate " << sys.condition()
            << ", limit " << k.condition_limit << ", c = " << k.c
            << "); increase the shape parameter c or coarsen the node spacing";
        throw IllConditionedError(node, sys.condition(), msg.str());
    }
}

}  // namespace

LocalSystem::LocalSystem(const std::vector<Point>& offsets, double c) : n_(offsets.size()), c_(c), offsets_(offsets) {
    const std::size_t n = n_;
    std::vector<quad> a(n * n);
    gram_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const quad v = i == j ? quad(1) : kernel_q(offsets[i], offsets[j], c);
            a[i * n + j] = a[j * n + i] = v;
            gram_[i * n + j] = gram_[j * n + i] = static_cast<double>(v);
        }

    // LDL^T without pivoting; Gaussian Gram matrices of distinct nodes are SPD.
    std::vector<quad> L(n * n, 0), D(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        quad dj = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) dj -= L[j * n + k] * L[j * n + k] * D[k];
        D[j] = dj;
        if (!(dj > 0)) {
            pd_ = false;
            break;
        }
        L[j * n + j] = 1;
        for (std::size_t i = j + 1; i < n; ++i) {
            quad s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k] * D[k];
            L[i * n + j] = s / dj;
        }
    }

    auto impl = std::make_shared<Impl>();
    impl->inv.assign(n * n, 0);
    if (pd_) {
        std::vector<quad> y(n);
        for (std::size_t col = 0; col < n; ++col) {
            for (std::size_t i = 0; i < n; ++i) {
                quad s = i == col ? quad(1) : quad(0);
                for (std::size_t k = 0; k < i; ++k) s -= L[i * n + k] * y[k];
                y[i] = s;
            }
            for (std::size_t i = 0; i < n; ++i) y[i] /= D[i];
            for (std::size_t ii = n; ii-- > 0;) {
                quad s = y[ii];
                for (std::size_t k = ii + 1; k < n; ++k) s -= L[k * n + ii] * impl->inv[k * n + col];
                impl->inv[ii * n + col] = s;
            }
        }
        quad na = 0, ni = 0;
        for (std::size_t j = 0; j < n; ++j) {
            quad ca = 0, ci = 0;
            for (std::size_t i = 0; i < n; ++i) {
                ca += fabs_q(a[i * n + j]);
                ci += fabs_q(impl->inv[i * n + j]);
            }
            na = std::max(na, ca);
            ni = std::max(ni, ci);
        }
        condition_ = static_cast<double>(na * ni);
    } else {
        condition_ = INFINITY;
    }
    impl_ = std::move(impl);
}

std::vector<double> LocalSystem::solve(const std::vector<double>& g) const {
    if (g.size() != n_) throw std::invalid_argument("LocalSystem::solve: size mismatch");
    std::vector<double> w(n_);
    for (std::size_t j = 0; j < n_; ++j) {
        quad s = 0;
        for (std::size_t i = 0; i < n_; ++i) s += static_cast<quad>(g[i]) * impl_->inv[i * n_ + j];
        w[j] = static_cast<double>(s);
    }
    return w;
}

std::vector<double> LocalSystem::cardinal(const Point& p) const {
    std::vector<quad> g(n_);
    for (std::size_t i = 0; i < n_; ++i) g[i] = kernel_q(p, offsets_[i], c_);
    std::vector<double> w(n_);
    for (std::size_t j = 0; j < n_; ++j) {
        quad s = 0;
        for (std::size_t i = 0; i < n_; ++i) s += g[i] * impl_->inv[i * n_ + j];
        w[j] = static_cast<double>(s);
    }
    return w;
}

std::vector<double> LocalSystem::gradient_weights(int axis) const {
    const quad c2 = static_cast<quad>(c_) * static_cast<quad>(c_);
    const Point origin{0.0, 0.0, 0.0};
    std::vector<quad> g(n_);
    // ∂/∂x_a exp(-c²|x - x_k|²) at x = 0
    for (std::size_t k = 0; k < n_; ++k) g[k] = 2 * c2 * static_cast<quad>(offsets_[k][axis]) * kernel_q(origin, offsets_[k], c_);
    std::vector<double> w(n_);
    for (std::size_t j = 0; j < n_; ++j) {
        quad s = 0;
        for (std::size_t i = 0; i < n_; ++i) s += g[i] * impl_->inv[i * n_ + j];
        w[j] = static_cast<double>(s);
    }
    return w;
}

LocalSystem local_gram(const PointCloud& cloud, const InfluenceDomain& d, const KernelConfig& k) {
    k.validate();
    for (std::size_t a = 0; a < d.members.size(); ++a)
        for (std::size_t b = a + 1; b < d.members.size(); ++b)
            if (squared_distance(cloud.nodes[d.members[a]], cloud.nodes[d.members[b]]) == 0.0)
                throw ConfigError("influence domain of node " + std::to_string(d.center) + " has coincident nodes");
    const Point& x0 = cloud.nodes[d.center];
    std::vector<Point> off;
    off.reserve(d.members.size());
    for (auto m : d.members) {
        const Point& p = cloud.nodes[m];
        off.push_back({p[0] - x0[0], p[1] - x0[1], p[2] - x0[2]});
    }
    LocalSystem sys(off, k.c);
    check_conditioning(sys, d.center, k);
    return sys;
}

double half_node_operator(const std::array<double, 3>& v, const std::array<double, 3>& chi, double delta) {
    const double cp = 0.5 * (chi[1] + chi[2]), cm = 0.5 * (chi[1] + chi[0]);
    return (cp * (v[2] - v[1]) - cm * (v[1] - v[0])) / (delta * delta);
}

double advective_z_operator(const std::array<double, 3>& u, const std::array<double, 3>& chi,
                            const std::array<double, 3>& F, double dz) {
    const double cp = 0.5 * (chi[1] + chi[2]), cm = 0.5 * (chi[1] + chi[0]);
    const double fp = 0.5 * (F[1] + F[2]), fm = 0.5 * (F[1] + F[0]);
    const double up = 0.5 * (u[1] + u[2]), um = 0.5 * (u[1] + u[0]);
    return (cp * fp * up - cm * fm * um) / dz;
}

double gravity_source(const std::array<double, 3>& G, double dz) {
    return (0.5 * (G[1] + G[2]) - 0.5 * (G[1] + G[0])) / dz;
}

FluxForm averaged_flux(double chi_l, double chi_r, double F_l, double F_r, double G_l, double G_r, double delta,
                       bool vertical) {
    const double cb = 0.5 * (chi_l + chi_r);
    FluxForm q{-cb / delta, cb / delta, 0.0};
    if (vertical) {
        const double adv = 0.5 * cb * 0.5 * (F_l + F_r);
        q.w_left += adv;
        q.w_right += adv;
        q.constant = 0.5 * (G_l + G_r);
    }
    return q;
}

StencilWeights compose_stencil(double e_over_dt, const std::vector<std::array<FluxForm, 2>>& fluxes,
                               const std::vector<double>& spacing) {
    StencilWeights sw;
    sw.size = 1 + 2 * static_cast<int>(fluxes.size());
    sw.w[0] = e_over_dt;
    for (std::size_t a = 0; a < fluxes.size(); ++a) {
        const FluxForm& m = fluxes[a][0];   // half node on the left
        const FluxForm& p = fluxes[a][1];   // half node on the right
        const double inv = 1.0 / spacing[a];
        sw.w[0] -= inv * (p.w_left - m.w_right);
        sw.w[1 + 2 * a] = inv * m.w_left;
        sw.w[2 + 2 * a] = -inv * p.w_right;
        sw.constant += inv * (p.constant - m.constant);
    }
    return sw;
}

double OperatorRow::apply(const std::vector<double>& values) const {
    double s = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) s += weights[k] * values[cols[k]];
    return s;
}

LrbfOperators::LrbfOperators(const PointCloud& cloud, std::size_t n_s, const KernelConfig& k)
    : cloud_(&cloud), n_s_(n_s), kernel_(k), axes_(cloud.active_axes()) {
    kernel_.validate();
    if (n_s < 2) throw ConfigError("n_s must be at least 2");
    domains_ = influence_domains(cloud, n_s);
    const std::size_t N = cloud.size();
    shape_.resize(N);
    columns_.resize(N);
    std::map<std::vector<long>, std::size_t> cache;
    const int ss = stencil_size();

    for (std::size_t s = 0; s < N; ++s) {
        const auto& dom = domains_[s];
        const auto g0 = cloud.grid_coords(s);
        const BoundaryTag tag = cloud.tags[s];
        int normal_axis = -1, normal_sign = 0;
        if (tag == BoundaryTag::lateral_x) {
            normal_axis = 0;
            normal_sign = g0[0] == 0 ? -1 : 1;
        } else if (tag == BoundaryTag::lateral_y) {
            normal_axis = 1;
            normal_sign = g0[1] == 0 ? -1 : 1;
        }

        std::array<std::size_t, 7> st{};
        st[0] = s;
        if (tag == BoundaryTag::interior) {
            for (std::size_t a = 0; a < axes_.size(); ++a) {
                auto [l, r] = axis_neighbors(cloud, s, axes_[a]);
                st[1 + 2 * a] = l;
                st[2 + 2 * a] = r;
            }
        }

        std::vector<long> key{static_cast<long>(tag), normal_sign};
        key.reserve(2 + 3 * n_s);
        for (auto m : dom.members) {
            const auto gm = cloud.grid_coords(m);
            for (int d = 0; d < 3; ++d) key.push_back(gm[d] - g0[d]);
        }
        const bool interior = tag == BoundaryTag::interior;

        auto it = cache.find(key);
        if (it == cache.end()) {
            Shape sh;
            std::vector<Point> off;
            for (std::size_t j = 0; j < n_s; ++j)
                off.push_back({key[2 + 3 * j] * cloud.spacing[0], key[3 + 3 * j] * cloud.spacing[1],
                               key[4 + 3 * j] * cloud.spacing[2]});
            sh.system = std::make_shared<LocalSystem>(off, kernel_.c);
            check_conditioning(*sh.system, s, kernel_);
            if (sh.system->condition() > diag_.max_condition) {
                diag_.max_condition = sh.system->condition();
                diag_.worst_node = s;
            }
            sh.slot.fill(-1);
            if (interior) {
                double defect = 0.0;
                sh.cardinal.assign(static_cast<std::size_t>(ss) * n_s, 0.0);
                for (int p = 0; p < ss; ++p) {
                    const auto gp = cloud.grid_coords(st[p]);
                    for (std::size_t j = 0; j < n_s; ++j)
                        if (dom.members[j] == st[p]) sh.slot[p] = static_cast<int>(j);
                    if (sh.slot[p] < 0) continue;
                    const Point rel{(gp[0] - g0[0]) * cloud.spacing[0], (gp[1] - g0[1]) * cloud.spacing[1],
                                    (gp[2] - g0[2]) * cloud.spacing[2]};
                    auto row = sh.system->cardinal(rel);
                    for (std::size_t j = 0; j < n_s; ++j) {
                        sh.cardinal[p * n_s + j] = row[j];
                        const double e = static_cast<int>(j) == sh.slot[p] ? 1.0 : 0.0;
                        defect = std::max(defect, std::abs(row[j] - e));
                    }
                }
                diag_.max_selection_defect = std::max(diag_.max_selection_defect, defect);
                sh.selection = defect <= 1e-12;
                if (sh.selection) sh.cardinal.clear();
            }
            if (normal_axis >= 0) {
                bool spans = false;
                for (std::size_t j = 1; j < n_s; ++j) spans = spans || key[2 + 3 * j + normal_axis] != 0;
                if (!spans)
                    throw ConfigError("influence domain of lateral node " + std::to_string(s) +
                                      " has no extent along its normal; increase n_s or refine that axis");
                sh.neumann = sh.system->gradient_weights(normal_axis);
                // Gaussians alone do not reproduce constants; the center weight absorbs the
                // row sum so that a uniform field carries no lateral flux
                double sum = 0.0;
                for (auto& w : sh.neumann) {
                    w *= normal_sign;
                    sum += w;
                }
                sh.neumann[0] -= sum;
            }
            it = cache.emplace(std::move(key), systems_.size()).first;
            systems_.push_back(std::move(sh));
        }
        shape_[s] = it->second;
        const Shape& sh = systems_[it->second];

        auto& cols = columns_[s];
        cols = dom.members;
        if (interior) {
            for (int p = 0; p < ss; ++p)
                if (sh.slot[p] < 0) {
                    cols.push_back(st[p]);
                    ++diag_.stencils_outside_domain;
                }
        }
    }
    diag_.distinct_domains = systems_.size();
}

std::array<std::size_t, 7> LrbfOperators::stencil(std::size_t s) const {
    std::array<std::size_t, 7> st{};
    st[0] = s;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        auto [l, r] = axis_neighbors(*cloud_, s, axes_[a]);
        st[1 + 2 * a] = l;
        st[2 + 2 * a] = r;
    }
    return st;
}

void LrbfOperators::interior_weights(std::size_t s, const StencilWeights& sw, double* out) const {
    const Shape& sh = systems_[shape_[s]];
    const std::size_t ncol = columns_[s].size();
    std::fill(out, out + ncol, 0.0);
    std::size_t extra = n_s_;
    for (int p = 0; p < sw.size; ++p) {
        const double w = sw.w[p];
        const int slot = sh.slot[p];
        if (slot < 0) {
            out[extra++] += w;
        } else if (sh.selection) {
            out[slot] += w;
        } else {
            const double* row = &sh.cardinal[static_cast<std::size_t>(p) * n_s_];
            for (std::size_t j = 0; j < n_s_; ++j) out[j] += w * row[j];
        }
    }
}

void LrbfOperators::neumann_weights(std::size_t s, double chi_s, double* out) const {
    const Shape& sh = systems_[shape_[s]];
    if (sh.neumann.empty()) throw std::logic_error("node " + std::to_string(s) + " is not a lateral boundary node");
    for (std::size_t j = 0; j < n_s_; ++j) out[j] = -chi_s * sh.neumann[j];
}

OperatorRow LrbfOperators::interior_row(std::size_t s, const StencilWeights& sw) const {
    if (cloud_->tags[s] != BoundaryTag::interior)
        throw std::logic_error("interior_row called on boundary node " + std::to_string(s));
    OperatorRow r;
    r.kind = RowKind::interior;
    r.cols = columns_[s];
    r.weights.resize(r.cols.size());
    interior_weights(s, sw, r.weights.data());
    return r;
}

OperatorRow LrbfOperators::boundary_row(std::size_t s, RowKind kind, double chi_s) const {
    const BoundaryTag tag = cloud_->tags[s];
    OperatorRow r;
    r.kind = kind;
    if (kind == RowKind::dirichlet) {
        if (tag != BoundaryTag::top && tag != BoundaryTag::bottom)
            throw std::logic_error("dirichlet row requested for non-dirichlet node " + std::to_string(s));
        // cardinal interpolation at a data site is the unit vector
        r.cols = {s};
        r.weights = {1.0};
    } else if (kind == RowKind::neumann) {
        r.cols = domains_[s].members;
        r.weights.resize(n_s_);
        neumann_weights(s, chi_s, r.weights.data());
    } else {
        throw std::logic_error("boundary_row: interior kind requested");
    }
    return r;
}

}  // namespace kirflow
