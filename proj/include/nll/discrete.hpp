#pragma once

#include <functional>
#include <memory>

#include "nll/barrier.hpp"

namespace nll {

enum class GridMode { radial, line };

/// Collocation grid on a ball (radial mode, [0,R]) or an interval
/// (line mode, [-X,X]). Grading factors in (0,1] cluster spacings toward the
/// origin / left end (inner) and toward the boundary (outer); 1.0 is uniform.
/// `offset_origin` (radial) starts the grid at r = h/2 so the Henon weight
/// with gamma < 0 never sees r = 0.
struct GridSpec {
    GridMode mode = GridMode::radial;
    double R = 8.0;
    int M = 128;  // node count
    double grade_inner = 1.0;
    double grade_outer = 1.0;
    bool offset_origin = false;

    void validate() const {
        if (M < 16) throw std::domain_error("GridSpec: need at least 16 nodes");
        if (!(R > 0.0)) throw std::domain_error("GridSpec: radius must be positive");
        if (!(grade_inner > 0.0 && grade_inner <= 1.0) ||
            !(grade_outer > 0.0 && grade_outer <= 1.0))
            throw std::domain_error("GridSpec: grading factors must lie in (0,1]");
        if (offset_origin && (mode != GridMode::radial || grade_inner != 1.0 || grade_outer != 1.0))
            throw std::domain_error("GridSpec: offset grids are uniform radial only");
    }

    bool uniform() const { return grade_inner == 1.0 && grade_outer == 1.0; }
};

inline std::vector<double> build_grid(const GridSpec& g) {
    g.validate();
    const int cells = g.M - 1;
    if (g.mode == GridMode::radial && g.offset_origin) {
        const double h = g.R / g.M;  // last node at R - h/2
        std::vector<double> nodes(g.M);
        for (int i = 0; i < g.M; ++i) nodes[i] = (i + 0.5) * h;
        return nodes;
    }
    std::vector<double> spacing(cells);
    double total = 0.0;
    for (int i = 0; i < cells; ++i) {
        const double t = cells == 1 ? 0.0 : static_cast<double>(i) / (cells - 1);
        spacing[i] = std::pow(g.grade_inner, 1.0 - t) * std::pow(g.grade_outer, t);
        total += spacing[i];
    }
    const double span = g.mode == GridMode::radial ? g.R : 2.0 * g.R;
    const double lo = g.mode == GridMode::radial ? 0.0 : -g.R;
    std::vector<double> nodes(g.M);
    nodes[0] = lo;
    double acc = 0.0;
    for (int i = 0; i < cells; ++i) {
        acc += spacing[i];
        nodes[i + 1] = lo + span * acc / total;
    }
    nodes[g.M - 1] = lo + span;
    if (g.mode == GridMode::line) {
        // exact symmetry: node k and node M-1-k sum to zero
        for (int i = 0; i < g.M / 2; ++i) {
            const double v = 0.5 * (nodes[g.M - 1 - i] - nodes[i]);
            nodes[i] = -v;
            nodes[g.M - 1 - i] = v;
        }
        if (g.M % 2 == 1) nodes[g.M / 2] = 0.0;
    }
    return nodes;
}

// --- dense LU with partial pivoting -----------------------------------------

class DenseLU {
  public:
    DenseLU() = default;
    explicit DenseLU(std::vector<double> a, int n) : n_(n), a_(std::move(a)), piv_(n) {
        if (static_cast<int>(a_.size()) != n * n) throw std::invalid_argument("DenseLU: size");
        factor();
    }

    void solve(std::vector<double>& b) const {
        if (static_cast<int>(b.size()) != n_) throw std::invalid_argument("DenseLU: rhs size");
        for (int i = 0; i < n_; ++i) std::swap(b[i], b[piv_[i]]);
        for (int i = 1; i < n_; ++i) {
            double s = b[i];
            for (int j = 0; j < i; ++j) s -= a_[i * n_ + j] * b[j];
            b[i] = s;
        }
        for (int i = n_ - 1; i >= 0; --i) {
            double s = b[i];
            for (int j = i + 1; j < n_; ++j) s -= a_[i * n_ + j] * b[j];
            b[i] = s / a_[i * n_ + i];
        }
    }

    /// 1-norm condition estimate (Hager-style iteration).
    double condition_estimate(const std::vector<double>& original) const {
        double anorm = 0.0;
        for (int j = 0; j < n_; ++j) {
            double c = 0.0;
            for (int i = 0; i < n_; ++i) c += std::abs(original[i * n_ + j]);
            anorm = std::max(anorm, c);
        }
        std::vector<double> x(n_, 1.0 / n_);
        double est = 0.0;
        for (int it = 0; it < 4; ++it) {
            std::vector<double> y = x;
            solve(y);
            double norm1 = 0.0;
            for (double v : y) norm1 += std::abs(v);
            est = std::max(est, norm1);
            for (double& v : y) v = (v >= 0.0 ? 1.0 : -1.0);
            solve_transpose(y);
            int jmax = 0;
            for (int j = 1; j < n_; ++j)
                if (std::abs(y[j]) > std::abs(y[jmax])) jmax = j;
            std::fill(x.begin(), x.end(), 0.0);
            x[jmax] = 1.0;
        }
        return anorm * est;
    }

  private:
    void factor() {
        for (int k = 0; k < n_; ++k) {
            int p = k;
            for (int i = k + 1; i < n_; ++i)
                if (std::abs(a_[i * n_ + k]) > std::abs(a_[p * n_ + k])) p = i;
            piv_[k] = p;
            if (p != k)
                for (int j = 0; j < n_; ++j) std::swap(a_[k * n_ + j], a_[p * n_ + j]);
            const double d = a_[k * n_ + k];
            if (d == 0.0) throw std::runtime_error("DenseLU: singular matrix");
            for (int i = k + 1; i < n_; ++i) {
                const double m = a_[i * n_ + k] / d;
                a_[i * n_ + k] = m;
                for (int j = k + 1; j < n_; ++j) a_[i * n_ + j] -= m * a_[k * n_ + j];
            }
        }
    }

    void solve_transpose(std::vector<double>& b) const {
        for (int i = 0; i < n_; ++i) {
            double s = b[i];
            for (int j = 0; j < i; ++j) s -= a_[j * n_ + i] * b[j];
            b[i] = s / a_[i * n_ + i];
        }
        for (int i = n_ - 1; i >= 0; --i) {
            double s = b[i];
            for (int j = i + 1; j < n_; ++j) s -= a_[j * n_ + i] * b[j];
            b[i] = s;
        }
        for (int i = n_ - 1; i >= 0; --i) std::swap(b[i], b[piv_[i]]);
    }

    int n_ = 0;
    std::vector<double> a_;
    std::vector<int> piv_;
};

// --- exterior data ------------------------------------------------------------

/// Dirichlet data on the complement of the ball/interval:
///   phi(x) = c (1+|x|^2)^{-beta} * (1 + delta tanh(x)) * modulate(x),
/// delta being an asymmetry knob (line mode only) and `modulate` an optional
/// factor tending to 1 at infinity. The declared envelope (a_decl, A_decl,
/// beta_decl) states the sandwich a V <= phi <= A V reported by the solver.
struct ExteriorData {
    double c = 1.0;
    double beta = 1.0;
    double delta = 0.0;
    std::function<double(double)> modulate;

    double a_decl = 0.0;
    double A_decl = std::numeric_limits<double>::infinity();
    double beta_decl = 1.0;

    double value(double x) const {
        double v = c * std::pow(1.0 + x * x, -beta);
        if (delta != 0.0) v *= 1.0 + delta * std::tanh(x);
        if (modulate) v *= modulate(x);
        return v;
    }
    double envelope(double x) const { return std::pow(1.0 + x * x, -beta_decl); }

    TailModel tail_right() const { return power_tail(c * (1.0 + delta), 2.0 * beta); }
    TailModel tail_left() const { return power_tail(c * (1.0 - delta), 2.0 * beta); }
    TailModel tail_radial() const { return power_tail(c, 2.0 * beta); }

    /// Worst signed margin of the declared sandwich on exterior samples
    /// (negative = declaration violated).
    double sandwich_margin(double R, double reach = 4.0) const {
        double worst = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 64; ++i) {
            const double r = R * std::pow(reach, i / 64.0);
            for (double x : {r, -r}) {
                const double v = value(x), env = envelope(x);
                worst = std::min(worst, v - a_decl * env);
                worst = std::min(worst, A_decl * env - v);
            }
        }
        return worst;
    }
};

// --- discrete operator ----------------------------------------------------------

/// Dense collocation of the generator L on the grid's interior nodes:
/// L_h u (x_i) = sum_j W_ij u_j + E_i(phi), with E_i the exterior functional
/// (point samples plus an analytic tail closure). Off-diagonal weights are
/// nonnegative and diagonals negative, the sign structure the discrete
/// comparison principle needs.
struct DiscreteOperator {
    GridSpec spec;
    std::vector<double> nodes;
    int i_lo = 0, i_hi = 0;  // inclusive unknown index range
    int n = 1;
    double s = 0.5;
    std::vector<double> W;                                        // nI x nI row-major
    std::vector<std::vector<std::pair<double, double>>> ext_pts;  // per row (pos, weight)
    std::vector<double> closure_right, closure_left;              // per-row tail weights
    double closure_T = 0.0;

    int nI() const { return i_hi - i_lo + 1; }

    std::vector<double> exterior_vector(const ExteriorData& ext) const {
        const bool line = spec.mode == GridMode::line;
        std::vector<double> b(nI(), 0.0);
        const double two_s = 2.0 * s;
        const double tr = line ? ext.tail_right().ray_integral_beyond(closure_T, two_s)
                               : ext.tail_radial().ray_integral_beyond(closure_T, two_s);
        const double tl = line ? ext.tail_left().ray_integral_beyond(closure_T, two_s) : 0.0;
        for (int r = 0; r < nI(); ++r) {
            double acc = 0.0;
            for (const auto& [pos, w] : ext_pts[r])
                acc += w * (line ? ext.value(pos) : ext.value(std::abs(pos)));
            acc += closure_right[r] * tr + closure_left[r] * tl;
            b[r] = acc;
        }
        return b;
    }

    std::vector<double> apply(const std::vector<double>& u, const ExteriorData& ext) const {
        const int m = nI();
        if (static_cast<int>(u.size()) != m) throw std::invalid_argument("apply: size");
        std::vector<double> out = exterior_vector(ext);
        for (int i = 0; i < m; ++i) {
            double acc = out[i];
            const double* row = &W[static_cast<std::size_t>(i) * m];
            for (int j = 0; j < m; ++j) acc += row[j] * u[j];
            out[i] = acc;
        }
        return out;
    }
};

namespace detail {

/// Integrals of the two linear cell shape functions of the t-lattice cell
/// [k h, (k+1) h] against c(t) t^{1-2s}; `stub` is the [0,h] integral,
/// assigned to phi_1 = g_1/h^2 (phi is even and smooth at 0).
struct CellWeights {
    std::vector<double> to_left, to_right;
    double stub = 0.0;
};

inline CellWeights lattice_cell_weights(const KernelSpec& k, double h, int K) {
    CellWeights cw;
    cw.to_left.assign(K + 1, 0.0);
    cw.to_right.assign(K + 1, 0.0);
    const double s = k.s;
    const double a = 2.0 - 2.0 * s, b = 3.0 - 2.0 * s;
    if (!k.modulation) {
        const double c0 = k.c(1.0);
        cw.stub = c0 * std::pow(h, a) / a;
        for (int kk = 1; kk < K; ++kk) {
            const double t0 = kk * h, t1 = (kk + 1) * h;
            const double m0 = (std::pow(t1, a) - std::pow(t0, a)) / a;
            const double m1 = (std::pow(t1, b) - std::pow(t0, b)) / b;
            cw.to_left[kk] = c0 * (t1 * m0 - m1) / h;
            cw.to_right[kk] = c0 * (m1 - t0 * m0) / h;
        }
    } else {
        const int ord = 12;
        cw.stub = gauss::panel([&](double t) { return k.c(t) * std::pow(t, 1.0 - 2.0 * s); },
                               0.0, h, ord);
        for (int kk = 1; kk < K; ++kk) {
            const double t0 = kk * h, t1 = (kk + 1) * h;
            cw.to_left[kk] = gauss::panel(
                [&](double t) { return (t1 - t) / h * k.c(t) * std::pow(t, 1.0 - 2.0 * s); },
                t0, t1, ord);
            cw.to_right[kk] = gauss::panel(
                [&](double t) { return (t - t0) / h * k.c(t) * std::pow(t, 1.0 - 2.0 * s); },
                t0, t1, ord);
        }
    }
    return cw;
}

}  // namespace detail

inline DiscreteOperator assemble_operator(const KernelSpec& kernel, const GridSpec& gspec,
                                          const QuadratureOptions& q) {
    kernel.validate();
    gspec.validate();
    q.validate();
    DiscreteOperator op;
    op.spec = gspec;
    op.nodes = build_grid(gspec);
    op.n = kernel.n;
    op.s = kernel.s;
    const int M = gspec.M;
    const bool line = gspec.mode == GridMode::line;
    if (line && kernel.n != 1)
        throw std::domain_error("assemble_operator: line mode requires n = 1");
    op.i_lo = line ? 1 : 0;
    op.i_hi = (gspec.mode == GridMode::radial && gspec.offset_origin) ? M - 1 : M - 2;
    const int nI = op.nI();
    op.W.assign(static_cast<std::size_t>(nI) * nI, 0.0);
    op.ext_pts.assign(nI, {});
    op.closure_right.assign(nI, 0.0);
    op.closure_left.assign(nI, 0.0);
    const double two_s = 2.0 * kernel.s;
    const double X = gspec.R;
    const double omega = sphere_area(kernel.n);
    const double T = std::max(q.t_cut, 3.0 * X);
    op.closure_T = T;
    const double cfar = kernel.c_far(T);
    const std::vector<double>& nd = op.nodes;

    auto mat = [&](int r, int j) -> double& { return op.W[static_cast<std::size_t>(r) * nI + j]; };

    // --- lattice-aligned scheme: uniform 1-D (line, or radial with n = 1) ---
    // g_k = u(x_i + k h) + u(x_i - k h) - 2 u_i at exact lattice points;
    // phi = g/t^2 hat-interpolated against the kernel weight t^{1-2s} c(t).
    // Second-order accurate uniformly in s; all weights nonnegative.
    const bool aligned = kernel.n == 1 && gspec.uniform();
    if (aligned) {
        const double h = gspec.offset_origin ? X / M : (line ? 2.0 * X : X) / (M - 1);
        const int K_max = 2 * M + 2;
        const auto cw = detail::lattice_cell_weights(kernel, h, K_max + 1);
        for (int i = op.i_lo; i <= op.i_hi; ++i) {
            const int r = i - op.i_lo;
            const double xi = nd[i];
            // both rays sample the exterior once t > X + |x_i|
            const int K_i = static_cast<int>(std::ceil((X + std::abs(xi)) / h - 1e-9));
            double diag = 0.0;
            for (int k = 1; k <= K_i; ++k) {
                double w = 0.0;
                if (k == 1) w += cw.stub;
                if (k < K_i) w += cw.to_left[k];
                if (k >= 2) w += cw.to_right[k - 1];
                w /= sq(k * h);
                if (w == 0.0) continue;
                diag -= 2.0 * w;
                for (int sgn : {+1, -1}) {
                    const double pos = xi + sgn * k * h;
                    int j;
                    if (line) {
                        j = i + sgn * k;
                    } else if (gspec.offset_origin) {
                        j = (sgn > 0) ? i + k : (i - k >= 0 ? i - k : k - i - 1);
                    } else {
                        j = std::abs(i + sgn * k);
                    }
                    if (j >= op.i_lo && j <= op.i_hi)
                        mat(r, j - op.i_lo) += w;
                    else
                        op.ext_pts[r].push_back({line ? pos : std::abs(pos), w});
                }
            }
            // pure-exterior range (K_i h, T]
            const double t0 = K_i * h;
            if (T > t0) {
                const int np = std::max(8, static_cast<int>(std::ceil(std::log2(T / t0))) + 4);
                const auto& rule = gauss::rule(q.panel_order);
                for (int pnl = 0; pnl < np; ++pnl) {
                    const double ta = t0 * std::pow(T / t0, static_cast<double>(pnl) / np);
                    const double tb = t0 * std::pow(T / t0, static_cast<double>(pnl + 1) / np);
                    for (std::size_t gq = 0; gq < rule.x.size(); ++gq) {
                        const double t = 0.5 * (ta + tb) + 0.5 * (tb - ta) * rule.x[gq];
                        const double w = 0.5 * (tb - ta) * rule.w[gq] * kernel.c(t) *
                                         std::pow(t, -1.0 - two_s);
                        diag -= 2.0 * w;
                        for (int sgn : {+1, -1}) {
                            const double pos = xi + sgn * t;
                            op.ext_pts[r].push_back({line ? pos : std::abs(pos), w});
                        }
                    }
                }
            }
            diag -= 2.0 * cfar * std::pow(T, -two_s) / two_s;
            if (line) {
                op.closure_right[r] = cfar;
                op.closure_left[r] = cfar;
            } else {
                op.closure_right[r] = 2.0 * cfar;
            }
            mat(r, r) += diag;
        }
        return op;
    }

    // --- general path: per-row quadrature of the hat interpolant ------------
    for (int i = op.i_lo; i <= op.i_hi; ++i) {
        const int r = i - op.i_lo;
        const double xi = nd[i];
        const double ri = std::abs(xi);
        double diag = 0.0;

        auto add_node = [&](int j, double w) {
            if (w == 0.0) return;
            if (j >= op.i_lo && j <= op.i_hi)
                mat(r, j - op.i_lo) += w;
            else
                op.ext_pts[r].push_back({line ? nd[j] : std::abs(nd[j]), w});
        };
        auto hat_distribute = [&](double rho, double w) {
            // weight w on the reconstruction value at rho; -w on the diagonal
            const double lo_edge = line ? -X : nd.front();
            if (rho >= lo_edge - 1e-14 && rho <= X + 1e-14) {
                if (!line && rho <= nd.front()) {
                    add_node(0, w);  // offset grids: even extension is flat below r_0
                } else {
                    const std::size_t c = detail::cell_of(nd, rho);
                    const double t = (rho - nd[c]) / (nd[c + 1] - nd[c]);
                    add_node(static_cast<int>(c), w * (1.0 - t));
                    add_node(static_cast<int>(c) + 1, w * t);
                }
            } else {
                op.ext_pts[r].push_back({line ? rho : std::abs(rho), w});
            }
            diag -= w;
        };

        // near field [0, delta]: spherical mean - center ~ (t^2/2n) Lap u
        const double h_lo =
            i > 0 ? nd[i] - nd[i - 1] : (nd[0] > 0.0 ? 2.0 * nd[0] : nd[1] - nd[0]);
        const double h_hi = i < M - 1 ? nd[i + 1] - nd[i] : nd[i] - nd[i - 1];
        const double delta = std::min({h_lo, h_hi, 1.0});
        const double near_mass = [&] {
            if (!kernel.modulation)
                return kernel.c(1.0) * std::pow(delta, 2.0 - two_s) / (2.0 - two_s);
            return gauss::panel([&](double t) { return kernel.c(t) * std::pow(t, 1.0 - two_s); },
                                0.0, delta, 12);
        }();
        const double near_coeff = omega * near_mass / (2.0 * kernel.n);
        if (gspec.mode == GridMode::radial && i == 0 && !gspec.offset_origin) {
            // origin row: Lap u(0) = n U''(0), even fit through (0,U0),(r1,U1)
            const double w1 = near_coeff * kernel.n * 2.0 / sq(nd[1]);
            mat(r, r) -= w1;
            add_node(1, w1);
        } else {
            const double den = h_lo * h_hi * (h_lo + h_hi);
            double wm = near_coeff * 2.0 * h_hi / den;
            double wp = near_coeff * 2.0 * h_lo / den;
            double wc = -(wm + wp);
            if (gspec.mode == GridMode::radial && kernel.n > 1 && ri > 0.0) {
                const double drift = near_coeff * (kernel.n - 1) / ri;  // U'/r term
                const double cm = -drift / (h_lo + h_hi), cp = drift / (h_lo + h_hi);
                if (wm + cm >= 0.0) {
                    wm += cm;
                    wp += cp;
                } else {  // upwind forward difference keeps weights nonnegative
                    wp += drift / h_hi;
                    wc -= drift / h_hi;
                }
            }
            if (gspec.mode == GridMode::radial && i == 0 && gspec.offset_origin) {
                // lower neighbor is the even reflection of the node itself
                wc += wm;
                add_node(1, wp);
            } else {
                add_node(i - 1, wm);
                add_node(i + 1, wp);
            }
            mat(r, r) += wc;
        }

        // far field [delta, T]
        std::vector<double> bounds{delta};
        for (int kk = q.near_panels - 1; kk >= 0; --kk) {
            const double t = std::pow(q.grading, kk);
            if (t > delta * (1.0 + 1e-12) && t < std::min(1.0, T)) bounds.push_back(t);
        }
        if (T > 1.0 && delta < 1.0) bounds.push_back(1.0);
        {
            const double t_lo = std::max(1.0, delta);
            const int nf = std::max(q.far_panels, static_cast<int>(std::ceil(std::log2(T / t_lo))));
            for (int kk = 1; kk <= nf; ++kk)
                bounds.push_back(t_lo * std::pow(T / t_lo, static_cast<double>(kk) / nf));
        }
        for (double rj : nd) {
            for (double t : {std::abs(rj - ri), gspec.mode == GridMode::radial ? rj + ri : -1.0})
                if (t > delta * (1.0 + 1e-12) && t < T * (1.0 - 1e-12)) bounds.push_back(t);
        }
        std::sort(bounds.begin(), bounds.end());
        bounds.erase(std::unique(bounds.begin(), bounds.end(),
                                 [](double u, double v) {
                                     return std::abs(u - v) < 1e-12 * std::max(1.0, u);
                                 }),
                     bounds.end());

        const auto& trule = gauss::rule(q.panel_order);
        const double ang_norm =
            kernel.n > 1 ? sphere_area(kernel.n) / sphere_area(kernel.n - 1) : 1.0;
        for (std::size_t pnl = 0; pnl + 1 < bounds.size(); ++pnl) {
            const double ta = bounds[pnl], tb = bounds[pnl + 1];
            for (std::size_t gq = 0; gq < trule.x.size(); ++gq) {
                const double t = 0.5 * (ta + tb) + 0.5 * (tb - ta) * trule.x[gq];
                const double wt = 0.5 * (tb - ta) * trule.w[gq] * kernel.c(t) *
                                  std::pow(t, -1.0 - two_s) * omega;
                if (kernel.n == 1) {
                    if (line) {
                        hat_distribute(xi + t, 0.5 * wt);
                        hat_distribute(xi - t, 0.5 * wt);
                    } else {
                        hat_distribute(ri + t, 0.5 * wt);
                        hat_distribute(std::abs(ri - t), 0.5 * wt);
                    }
                } else if (ri == 0.0) {
                    hat_distribute(t, wt);
                } else {
                    // fewer angular nodes once the whole sphere is exterior
                    const int na = (t > X + ri) ? std::min(q.angular_nodes, 8) : q.angular_nodes;
                    const auto& arule = gauss::rule(na);
                    for (std::size_t aq = 0; aq < arule.x.size(); ++aq) {
                        const double phi = 0.5 * std::numbers::pi * (arule.x[aq] + 1.0);
                        double wa = 0.5 * std::numbers::pi * arule.w[aq];
                        if (kernel.n > 2) wa *= std::pow(std::sin(phi), kernel.n - 2);
                        wa /= ang_norm;
                        const double rho =
                            std::sqrt(ri * ri + t * t + 2.0 * ri * t * std::cos(phi));
                        hat_distribute(rho, wt * wa);
                    }
                }
            }
        }
        diag -= omega * cfar * std::pow(T, -two_s) / two_s;
        op.closure_right[r] += omega * cfar;
        mat(r, r) += diag;
    }
    return op;
}

}  // namespace nll
