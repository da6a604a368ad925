#pragma once

#include <map>

#include "nll/solver.hpp"

namespace nll {

struct MovingPlaneGap {
    double min_gap = std::numeric_limits<double>::infinity();
    double argmin = 0.0;
    std::vector<double> xs, gaps;  // per sampled grid point x < lambda
};

/// Reflection gap w_lambda(x) = u(2 lambda - x) - u(x), minimized over grid
/// points left of the plane; reflections beyond the grid use the tails.
inline MovingPlaneGap moving_plane_gap(const LineFunction& u, double lambda) {
    MovingPlaneGap out;
    for (double x : u.grid) {
        if (!(x < lambda)) continue;
        const double gap = u(2.0 * lambda - x) - u(x);
        out.xs.push_back(x);
        out.gaps.push_back(gap);
        if (gap < out.min_gap) {
            out.min_gap = gap;
            out.argmin = x;
        }
    }
    if (out.xs.empty()) out.min_gap = 0.0;
    return out;
}

/// Same gap restricted to the slab lambda - delta < x < lambda.
inline MovingPlaneGap narrow_region_probe(const LineFunction& u, double lambda, double delta) {
    MovingPlaneGap out;
    for (double x : u.grid) {
        if (!(x > lambda - delta && x < lambda)) continue;
        const double gap = u(2.0 * lambda - x) - u(x);
        out.xs.push_back(x);
        out.gaps.push_back(gap);
        if (gap < out.min_gap) {
            out.min_gap = gap;
            out.argmin = x;
        }
    }
    if (out.xs.empty()) out.min_gap = 0.0;
    return out;
}

struct LinearizationCoeffs {
    double sup_a = 0.0, sup_b = 0.0;
    int excluded_points = 0;  // gradient-degenerate points skipped for p < 1
};

/// Sup norms on K = [k_lo, k_hi] of the mean-value coefficients
///   a(x) = int_0^1 H'(u_l + t w) G(grad u_l + t grad w) dt,
///   b(x) = int_0^1 H (u_l + t w) dG(grad u_l + t grad w) dt,
/// where u_l is the reflection of u across lambda and w the gap.
inline LinearizationCoeffs linearization_coeffs(const ProblemSpec& prob, const LineFunction& u,
                                                double lambda, double k_lo, double k_hi,
                                                int grid_points = 64) {
    if (!prob.G.single_term())
        throw std::domain_error("linearization_coeffs: single-term G required");
    const double p = prob.G.terms[0].power;
    LinearizationCoeffs out;
    const auto& rule = gauss::rule(16);
    const double eps = 1e-6;
    auto du = [&](double x) {
        return (u(x + eps) - u(x - eps)) / (2.0 * eps);
    };
    for (int i = 0; i < grid_points; ++i) {
        const double x = k_lo + (k_hi - k_lo) * i / (grid_points - 1.0);
        const double wt = prob.weight(x);
        const double ul = u(2.0 * lambda - x), uu = u(x);
        const double gl = -du(2.0 * lambda - x), gu = du(x);  // chain rule on reflection
        const double w = uu - ul, gw = gu - gl;
        double a = 0.0, b = 0.0;
        bool excluded = false;
        for (std::size_t gq = 0; gq < rule.x.size(); ++gq) {
            const double t = 0.5 * (rule.x[gq] + 1.0);
            const double wq = 0.5 * rule.w[gq];
            const double ut = ul + t * w, gt = gl + t * gw;
            a += wq * wt * eval_H_prime(prob.H, std::max(ut, 0.0)) * eval_G(prob.G, gt);
            if (std::abs(gt) < 1e-8 && p < 1.0) {
                excluded = true;
            } else {
                b += wq * wt * eval_H(prob.H, std::max(ut, 1e-300)) * eval_G_slope(prob.G, gt);
            }
        }
        if (excluded) ++out.excluded_points;
        out.sup_a = std::max(out.sup_a, std::abs(a));
        out.sup_b = std::max(out.sup_b, std::abs(b));
    }
    return out;
}

struct BernsteinRow {
    double R = 0.0;
    double M_R = 0.0;       // 1 + sup_{B_2R} u
    double x_R = 0.0;       // argmax of F_R = eta_R^2 |grad w|^2
    bool x_in_ball = true;  // x_R in B_R (reported, not asserted)
    double grad_w = 0.0;
    double lhs = 0.0;     // R^gamma H(u(x_R)) (M_R-u)^{p-1} |grad w|^p
    double scaled = 0.0;  // lhs * R^{2s}
};

/// Bernstein transform scan: w = -log(M_R - u) on solutions defined on
/// B_{2R}; the localized gradient functional is maximized on the grid.
inline std::vector<BernsteinRow> bernstein_scan(
    const ProblemSpec& prob, const std::function<const SolveReport&(double)>& solution_for,
    const std::vector<double>& R_list) {
    if (!prob.G.single_term()) throw std::domain_error("bernstein_scan: single-term G required");
    const double p = prob.G.terms[0].power;
    const double two_s = 2.0 * prob.kernel.s;
    std::vector<BernsteinRow> rows;
    for (double R : R_list) {
        const SolveReport& run = solution_for(R);
        const std::vector<double>& xs = run.nodes;
        const std::vector<double>& uv = run.values;
        double sup_u = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (std::abs(xs[i]) <= 2.0 * R) sup_u = std::max(sup_u, uv[i]);
        const double MR = 1.0 + sup_u;
        std::vector<double> w(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double gap = MR - uv[i];
            if (!(gap > 0.0)) throw std::runtime_error("bernstein_scan: M_R - u not positive");
            w[i] = -std::log(gap);
        }
        const std::vector<double> gw = gradient_on_grid(xs, w);
        double best = -1.0;
        std::size_t ib = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double eta = smoothstep_cutoff(std::abs(xs[i]) / R);
            const double F = sq(eta) * sq(gw[i]);
            if (F > best) {
                best = F;
                ib = i;
            }
        }
        BernsteinRow row;
        row.R = R;
        row.M_R = MR;
        row.x_R = xs[ib];
        row.x_in_ball = std::abs(xs[ib]) <= R;
        row.grad_w = std::abs(gw[ib]);
        row.lhs = std::pow(R, prob.gamma) * eval_H(prob.H, std::max(uv[ib], 0.0)) *
                  std::pow(MR - uv[ib], p - 1.0) * std::pow(row.grad_w, p);
        row.scaled = row.lhs * std::pow(R, two_s);
        rows.push_back(row);
    }
    return rows;
}

struct LiouvilleTrend {
    std::vector<double> R_list, sup_grad;
    double theta = 0.0;  // fitted decay exponent of sup|grad u_R| ~ R^{-theta}
    Regime regime = Regime::Ambiguous;
};

/// Gradient-decay trend over an exhaustion: sup over B_{R/2} of |grad u_R|,
/// fitted as R^{-Theta}. Constancy of entire solutions is not certifiable by
/// finite computation; the gradient trend is the testable surrogate.
inline LiouvilleTrend liouville_trend(const ProblemSpec& prob, const std::vector<double>& R_list,
                                      const std::function<ExteriorData(double)>& ext_family,
                                      const GridSpec& grid, const SolverOptions& so,
                                      const QuadratureOptions& q = {}) {
    const RegimeReport reg = classify_regime(prob);
    if (reg.regime != Regime::Supercritical && reg.regime != Regime::Critical &&
        reg.regime != Regime::Subcritical)
        throw std::domain_error("liouville_trend: ambiguous regime");
    const ExhaustReport ex = exhaust(prob, R_list, ext_family, grid, so, q);
    if (ex.aborted) throw std::runtime_error("liouville_trend: a member run diverged");
    LiouvilleTrend tr;
    tr.regime = reg.regime;
    std::vector<double> lx, ly;
    for (std::size_t j = 0; j < ex.runs.size(); ++j) {
        const double R = R_list[j];
        const std::vector<double> g = gradient_on_grid(ex.runs[j].nodes, ex.runs[j].values);
        double sup = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (std::abs(ex.runs[j].nodes[i]) <= 0.5 * R) sup = std::max(sup, std::abs(g[i]));
        tr.R_list.push_back(R);
        tr.sup_grad.push_back(sup);
        if (sup > 0.0) {
            lx.push_back(std::log(R));
            ly.push_back(std::log(sup));
        }
    }
    if (lx.size() >= 2) tr.theta = -ls_slope(lx, ly);
    return tr;
}

struct DecayFit {
    double slope = 0.0;     // of log u against log(1+r^2)
    double expected = 0.0;  // -beta when supplied
    double rel_error = 0.0;
    int samples = 0;
};

/// Least-squares decay exponent of a positive profile on a radial window.
inline DecayFit decay_fit(const RadialFunction& u, double r_lo, double r_hi,
                          double expected_beta = 0.0) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < u.grid.size(); ++i) {
        const double r = u.grid[i];
        if (r < r_lo || r > r_hi) continue;
        if (!(u.values[i] > 0.0))
            throw std::domain_error("decay_fit: nonpositive sample inside the window");
        lx.push_back(std::log(1.0 + r * r));
        ly.push_back(std::log(u.values[i]));
    }
    if (lx.size() < 2) throw std::domain_error("decay_fit: window contains too few nodes");
    DecayFit f;
    f.slope = ls_slope(lx, ly);
    f.samples = static_cast<int>(lx.size());
    if (expected_beta != 0.0) {
        f.expected = -expected_beta;
        f.rel_error = std::abs(f.slope - f.expected) / std::abs(expected_beta);
    }
    return f;
}

inline DecayFit decay_fit(const LineFunction& u, double r_lo, double r_hi,
                          double expected_beta = 0.0) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < u.grid.size(); ++i) {
        const double r = std::abs(u.grid[i]);
        if (r < r_lo || r > r_hi) continue;
        if (!(u.values[i] > 0.0))
            throw std::domain_error("decay_fit: nonpositive sample inside the window");
        lx.push_back(std::log(1.0 + r * r));
        ly.push_back(std::log(u.values[i]));
    }
    if (lx.size() < 2) throw std::domain_error("decay_fit: window contains too few nodes");
    DecayFit f;
    f.slope = ls_slope(lx, ly);
    f.samples = static_cast<int>(lx.size());
    if (expected_beta != 0.0) {
        f.expected = -expected_beta;
        f.rel_error = std::abs(f.slope - f.expected) / std::abs(expected_beta);
    }
    return f;
}

struct UniquenessProbe {
    std::vector<double> R_list;
    std::vector<double> discrepancy;  // sup over B_2 after rescaling to u(0)=a
};

/// Exhaust with two exterior families, rescale both solutions multiplicatively
/// to the normalization u(0) = a, and compare on the core per R.
inline UniquenessProbe uniqueness_probe(const ProblemSpec& prob, double normalization_a,
                                        const std::function<ExteriorData(double)>& fam1,
                                        const std::function<ExteriorData(double)>& fam2,
                                        const std::vector<double>& R_list, const GridSpec& grid,
                                        const SolverOptions& so, const QuadratureOptions& q = {}) {
    const ExhaustReport e1 = exhaust(prob, R_list, fam1, grid, so, q);
    const ExhaustReport e2 = exhaust(prob, R_list, fam2, grid, so, q);
    if (e1.aborted || e2.aborted) throw std::runtime_error("uniqueness_probe: a run diverged");
    UniquenessProbe out;
    for (std::size_t j = 0; j < std::min(e1.runs.size(), e2.runs.size()); ++j) {
        const double c1 = e1.runs[j].value_at(0.0), c2 = e2.runs[j].value_at(0.0);
        if (!(c1 != 0.0) || !(c2 != 0.0))
            throw std::runtime_error("uniqueness_probe: zero center value, cannot normalize");
        const double s1 = normalization_a / c1, s2 = normalization_a / c2;
        double d = 0.0;
        for (int i = 0; i <= 80; ++i) {
            const double x = -2.0 + 4.0 * i / 80.0;
            d = std::max(d, std::abs(s1 * e1.runs[j].value_at(x) - s2 * e2.runs[j].value_at(x)));
        }
        out.R_list.push_back(R_list[j]);
        out.discrepancy.push_back(d);
    }
    return out;
}

}  // namespace nll
