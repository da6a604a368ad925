#pragma once

#include "nll/problem.hpp"

namespace nll {

enum class BarrierKind { super, sub };

/// Power barrier U_A(x) = A (1+|x|^2)^{-beta}.
struct BarrierSpec {
    double beta = 1.0;
    double amplitude = 1.0;
    BarrierKind kind = BarrierKind::super;

    void validate() const {
        if (!(beta > 0.0) || !(amplitude > 0.0))
            throw std::domain_error("BarrierSpec: beta and amplitude must be positive");
    }

    double value(double r) const { return amplitude * std::pow(1.0 + r * r, -beta); }
    /// Radial component of the gradient: -2 beta A r (1+r^2)^{-beta-1}.
    double gradient_radial(double r) const {
        return -2.0 * beta * amplitude * r * std::pow(1.0 + r * r, -beta - 1.0);
    }
    double gradient_norm(double r) const { return std::abs(gradient_radial(std::abs(r))); }
    TailModel tail() const { return power_tail(amplitude, 2.0 * beta); }
};

struct BarrierPoint {
    double value = 0.0;
    double gradient_radial = 0.0;
};

inline BarrierPoint barrier_eval(const BarrierSpec& b, double r) {
    b.validate();
    return {b.value(r), b.gradient_radial(r)};
}

/// Operator value on the barrier in the problem's convention.
inline double barrier_operator_value(const ProblemSpec& prob, const BarrierSpec& b, double r,
                                     const QuadratureOptions& q) {
    auto u = [&](double rho) { return b.value(rho); };
    Estimate e = evaluate_L_radial(prob.kernel, u, b.tail(), r, q, q.t_cut, {r});
    return prob.convention == Convention::fractional ? -e.value : e.value;
}

struct DecayBoundAudit {
    double scaled_sup = 0.0;          // sup |L U_A| (1+r^2)^{beta+s} / A
    double scaled_max_over_min = 0.0; // spread of the full scaled column
    double asymptotic_max_over_min = 0.0;  // spread on r >= 8, past the sign change
    double fitted_slope = 0.0;        // log |L U_A| vs log(1+r^2), asymptotic range
    bool tail_dominated = false;      // 2 beta >= n: far field sets the decay
    std::vector<double> radii, scaled;
};

/// Audit of the operator-decay bound |L U_A| <= C A (1+|x|^2)^{-(beta+s)}.
/// When 2 beta >= n the far-field integral dominates and the true decay is
/// (1+|x|^2)^{-(n/2+s)}; flagged, not asserted.
inline DecayBoundAudit decay_bound_audit(const KernelSpec& k, double beta, double amplitude,
                                         const std::vector<double>& radii,
                                         const QuadratureOptions& q) {
    BarrierSpec b{beta, amplitude, BarrierKind::super};
    DecayBoundAudit out;
    out.tail_dominated = 2.0 * beta >= static_cast<double>(k.n);
    std::vector<double> lx, ly;
    double lo = std::numeric_limits<double>::infinity();
    double asy_lo = std::numeric_limits<double>::infinity(), asy_hi = 0.0;
    auto u = [&](double rho) { return b.value(rho); };
    for (double r : radii) {
        Estimate e = evaluate_L_radial(k, u, b.tail(), r, q, q.t_cut, {r});
        const double scaled =
            std::abs(e.value) * std::pow(1.0 + r * r, beta + k.s) / amplitude;
        out.radii.push_back(r);
        out.scaled.push_back(scaled);
        out.scaled_sup = std::max(out.scaled_sup, scaled);
        lo = std::min(lo, scaled);
        if (r >= 8.0 && std::abs(e.value) > 0.0) {
            lx.push_back(std::log(1.0 + r * r));
            ly.push_back(std::log(std::abs(e.value)));
            asy_lo = std::min(asy_lo, scaled);
            asy_hi = std::max(asy_hi, scaled);
        }
    }
    out.scaled_max_over_min = lo > 0.0 ? out.scaled_sup / lo : std::numeric_limits<double>::infinity();
    out.asymptotic_max_over_min = asy_lo > 0.0 ? asy_hi / asy_lo : 0.0;
    if (lx.size() >= 2) out.fitted_slope = ls_slope(lx, ly);
    return out;
}

/// Pointwise audit table of the barrier inequality. Margins are
/// rhs - lhs (super) or lhs - rhs (sub) with lhs the operator value in the
/// problem's convention; min margin >= 0 means the inequality holds on the
/// sample set. Violations are reported, never asserted.
struct MarginTable {
    std::vector<double> radii, lhs, rhs, margin;
    double min_margin = std::numeric_limits<double>::infinity();
    double worst_radius = 0.0;
    std::vector<double> violation_radii;
};

inline MarginTable inequality_scan(const ProblemSpec& prob, const BarrierSpec& b,
                                   const std::vector<double>& radii,
                                   const QuadratureOptions& q) {
    prob.validate();
    b.validate();
    MarginTable t;
    for (double r : radii) {
        const double lhs = barrier_operator_value(prob, b, r, q);
        const double rhs = eval_rhs(prob, r, b.value(r), b.gradient_norm(r));
        const double m = b.kind == BarrierKind::super ? rhs - lhs : lhs - rhs;
        t.radii.push_back(r);
        t.lhs.push_back(lhs);
        t.rhs.push_back(rhs);
        t.margin.push_back(m);
        if (m < t.min_margin) {
            t.min_margin = m;
            t.worst_radius = r;
        }
        if (m < 0.0) t.violation_radii.push_back(r);
    }
    return t;
}

/// 41 log-spaced radii in (0, 100] plus 0: the default audit sample.
inline std::vector<double> default_audit_radii() {
    std::vector<double> r{0.0};
    for (int i = 0; i < 41; ++i) r.push_back(1e-1 * std::pow(1e3, i / 40.0));
    return r;
}

struct AmplitudeSearch {
    bool found = false;
    double amplitude = 0.0;
    double worst_radius = 0.0;  // diagnostics when not found
    double worst_margin = 0.0;
};

/// Smallest (super) / largest (sub) sweep amplitude whose margin table is
/// nonnegative on the sample radii.
inline AmplitudeSearch amplitude_search(const ProblemSpec& prob, double beta, BarrierKind kind,
                                        const std::vector<double>& sweep,
                                        const std::vector<double>& radii,
                                        const QuadratureOptions& q) {
    if (kind == BarrierKind::sub && prob.H.theta() < 0.0)
        throw std::domain_error("amplitude_search: singular H (theta < 0) unsupported for subsolutions");
    AmplitudeSearch out;
    out.worst_margin = -std::numeric_limits<double>::infinity();
    if (sweep.empty()) return out;
    std::vector<double> order = sweep;
    std::sort(order.begin(), order.end());
    if (kind == BarrierKind::sub) std::reverse(order.begin(), order.end());
    double best_margin = -std::numeric_limits<double>::infinity();
    double best_r = 0.0;
    for (double A : order) {
        BarrierSpec b{beta, A, kind};
        const MarginTable t = inequality_scan(prob, b, radii, q);
        if (t.min_margin >= 0.0) {
            out.found = true;
            out.amplitude = A;
            return out;
        }
        if (t.min_margin > best_margin) {
            best_margin = t.min_margin;
            best_r = t.worst_radius;
        }
    }
    out.worst_margin = best_margin;
    out.worst_radius = best_r;
    return out;
}

/// Asymptotic slope fits of both sides of the equation at U_A together with
/// the algebraic exponent-matching check beta(1-p) >= s + p/2 - gamma/2 at
/// beta = (2s+gamma-p)/(1-p). Reports agreement or disagreement, no judgment.
struct ExponentAudit {
    double lhs_slope = 0.0;   // fitted slope of log|L U_A| vs log(1+r^2)
    double rhs_slope = 0.0;   // fitted slope of log rhs(U_A)
    double match1_lhs = 0.0;  // beta (1 - p)
    double match1_rhs = 0.0;  // s + p/2 - gamma/2
    bool claimed_identity_holds = false;
    bool tail_dominated = false;
};

inline ExponentAudit exponent_audit(const ProblemSpec& prob, double beta,
                                    const QuadratureOptions& q) {
    if (!prob.G.single_term())
        throw std::domain_error("exponent_audit: single-term G required");
    const double p = prob.G.terms[0].power;
    const double s = prob.kernel.s;
    ExponentAudit a;
    a.match1_lhs = beta * (1.0 - p);
    a.match1_rhs = s + 0.5 * p - 0.5 * prob.gamma;
    a.claimed_identity_holds = std::abs(a.match1_lhs - a.match1_rhs) <= 1e-9;
    a.tail_dominated = 2.0 * beta >= static_cast<double>(prob.kernel.n);

    BarrierSpec b{beta, 1.0, BarrierKind::super};
    std::vector<double> lx, lyl, lyr;
    for (int i = 0; i <= 12; ++i) {
        const double r = 10.0 * std::pow(10.0, i / 12.0);  // [10, 100]
        const double lhs = barrier_operator_value(prob, b, r, q);
        const double rhs = eval_rhs(prob, r, b.value(r), b.gradient_norm(r));
        if (std::abs(lhs) > 0.0 && rhs > 0.0) {
            lx.push_back(std::log(1.0 + r * r));
            lyl.push_back(std::log(std::abs(lhs)));
            lyr.push_back(std::log(rhs));
        }
    }
    if (lx.size() >= 2) {
        a.lhs_slope = ls_slope(lx, lyl);
        a.rhs_slope = ls_slope(lx, lyr);
    }
    return a;
}

}  // namespace nll
