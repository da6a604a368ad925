#pragma once

#include <optional>
#include <string>

#include "nll/operator.hpp"

namespace nll {

enum class HFamily { polynomial, logarithmic, exponential, singular };

/// Representative nonlinearities of u. Polynomial and logarithmic carry the
/// floor H0 > 0; theta is the declared lower growth order at 0 (0 for the
/// nondecreasing families, -m for the singular one).
struct HSpec {
    HFamily family = HFamily::polynomial;
    double m = 0.0;
    double H0 = 1.0;
    double M_upper = 1.0;

    void validate() const {
        if (m < 0.0) throw std::domain_error("HSpec: m must be >= 0");
        if ((family == HFamily::polynomial || family == HFamily::logarithmic) && !(H0 > 0.0))
            throw std::domain_error("HSpec: floor H0 must be positive");
    }

    double theta() const { return family == HFamily::singular ? -m : 0.0; }
    bool nondecreasing() const { return family != HFamily::singular; }
};

inline double eval_H(const HSpec& h, double u) {
    h.validate();
    switch (h.family) {
        case HFamily::polynomial:
            if (u < 0.0) throw std::domain_error("eval_H: u must be >= 0");
            return h.m == 0.0 ? h.H0 : h.H0 + std::pow(u, h.m);
        case HFamily::logarithmic:
            if (u < 0.0) throw std::domain_error("eval_H: u must be >= 0");
            return h.H0 + std::log1p(u);
        case HFamily::exponential: return std::exp(u);
        case HFamily::singular:
            if (!(u > 0.0)) throw std::domain_error("eval_H: singular family needs u > 0");
            return std::pow(u, -h.m);
    }
    return 0.0;
}

inline double eval_H_prime(const HSpec& h, double u) {
    switch (h.family) {
        case HFamily::polynomial:
            return h.m == 0.0 ? 0.0 : h.m * std::pow(std::max(u, 0.0), h.m - 1.0);
        case HFamily::logarithmic: return 1.0 / (1.0 + u);
        case HFamily::exponential: return std::exp(u);
        case HFamily::singular:
            if (!(u > 0.0)) throw std::domain_error("eval_H_prime: singular needs u > 0");
            return -h.m * std::pow(u, -h.m - 1.0);
    }
    return 0.0;
}

/// G(z) = sum_i c_i |z|^{p_i}, rotation invariant, G(0) = 0.
struct GSpec {
    struct Term {
        double coeff = 1.0;
        double power = 1.0;
    };
    std::vector<Term> terms;

    void validate() const {
        for (const Term& t : terms)
            if (!(t.coeff > 0.0) || !(t.power > 0.0))
                throw std::domain_error("GSpec: coefficients and powers must be positive");
    }

    bool empty() const { return terms.empty(); }
    bool single_term() const { return terms.size() == 1; }

    double p_min() const {
        if (terms.empty()) throw std::domain_error("GSpec: no terms");
        double p = terms.front().power;
        for (const Term& t : terms) p = std::min(p, t.power);
        return p;
    }
    double p_max() const {
        if (terms.empty()) throw std::domain_error("GSpec: no terms");
        double p = terms.front().power;
        for (const Term& t : terms) p = std::max(p, t.power);
        return p;
    }
    double c1() const {
        double c = terms.empty() ? 0.0 : terms.front().coeff;
        for (const Term& t : terms) c = std::min(c, t.coeff);
        return c;
    }
    double c2() const {
        double c = 0.0;
        for (const Term& t : terms) c += t.coeff;
        return c;
    }
};

inline GSpec single_power(double coeff, double power) { return GSpec{{{coeff, power}}}; }

inline double eval_G(const GSpec& g, double grad_norm) {
    g.validate();
    double v = 0.0;
    const double z = std::abs(grad_norm);
    for (const GSpec::Term& t : g.terms) v += t.coeff * std::pow(z, t.power);
    return v;
}

/// |dG/d|z|| for a single-term G; undefined at 0 for p < 1 (callers exclude).
inline double eval_G_slope(const GSpec& g, double grad_norm) {
    if (!g.single_term()) throw std::domain_error("eval_G_slope: single-term G only");
    const double c = g.terms[0].coeff, p = g.terms[0].power;
    const double z = std::abs(grad_norm);
    if (z == 0.0) {
        if (p > 1.0) return 0.0;
        if (p == 1.0) return c;
        throw std::domain_error("eval_G_slope: DG singular at 0 for p < 1");
    }
    return c * p * std::pow(z, p - 1.0);
}

enum class Convention { generator, fractional };

inline const char* to_string(Convention c) {
    return c == Convention::generator ? "generator" : "fractional";
}

/// The full equation: kernel + H + G + Henon weight |x|^gamma (optionally
/// regularized to (eps^2+|x|^2)^{gamma/2}) + sign convention.
struct ProblemSpec {
    KernelSpec kernel;
    HSpec H;
    GSpec G;
    double gamma = 0.0;
    double weight_regularization = 0.0;  // eps >= 0
    Convention convention = Convention::generator;

    void validate() const {
        kernel.validate();
        H.validate();
        G.validate();
        if (weight_regularization < 0.0)
            throw std::domain_error("ProblemSpec: regularization eps must be >= 0");
    }

    double weight(double r) const {
        r = std::abs(r);
        if (gamma == 0.0) return 1.0;
        const double eps = weight_regularization;
        if (eps > 0.0) return std::pow(eps * eps + r * r, 0.5 * gamma);
        if (r == 0.0 && gamma < 0.0)
            throw std::domain_error("weight: |x|^gamma singular at x = 0 (set eps > 0)");
        return std::pow(r, gamma);
    }
};

inline double eval_rhs(const ProblemSpec& p, double r, double u, double grad_norm) {
    return p.weight(r) * eval_H(p.H, u) * eval_G(p.G, grad_norm);
}

enum class Regime { Supercritical, Critical, Subcritical, Ambiguous };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::Supercritical: return "Supercritical";
        case Regime::Critical: return "Critical";
        case Regime::Subcritical: return "Subcritical";
        case Regime::Ambiguous: return "Ambiguous";
    }
    return "?";
}

struct RegimeReport {
    double p_used = 0.0;
    Regime regime = Regime::Ambiguous;
    std::optional<double> beta;              // Subcritical only; absent when p = 1
    std::optional<double> growth_exponent;   // Supercritical only: 1 - (2s+gamma)/p
    bool beta_undefined_p_equals_one = false;
};

/// Compare gamma + p against 2s at p_min and p_max; report Ambiguous when the
/// two labels disagree. Depends only on (s, gamma, p), never on amplitudes.
inline RegimeReport classify_regime(const ProblemSpec& prob) {
    prob.validate();
    const double two_s = 2.0 * prob.kernel.s;
    auto label = [&](double p) {
        const double b = prob.gamma + p;
        if (b > two_s) return Regime::Supercritical;
        if (b < two_s) return Regime::Subcritical;
        return Regime::Critical;
    };
    const double pmin = prob.G.p_min(), pmax = prob.G.p_max();
    RegimeReport rep;
    if (label(pmin) != label(pmax)) {
        rep.regime = Regime::Ambiguous;
        rep.p_used = pmax;
        return rep;
    }
    rep.regime = label(pmax);
    rep.p_used = pmax;
    if (rep.regime == Regime::Subcritical) {
        if (rep.p_used == 1.0)
            rep.beta_undefined_p_equals_one = true;
        else
            rep.beta = (two_s + prob.gamma - rep.p_used) / (1.0 - rep.p_used);
    } else if (rep.regime == Regime::Supercritical) {
        rep.growth_exponent = 1.0 - (two_s + prob.gamma) / rep.p_used;
    }
    return rep;
}

/// Exact power solution u = A |x|^beta of the model equation
///   (convention-consistent operator) u = |x|^gamma |grad u|^p
/// in the subcritical range. `eigen_constant` is the operator constant in the
/// problem's convention (positive in the solvable range); `c_fractional`
/// keeps the raw (-Delta)^s constant for reference.
struct PowerSolution {
    double beta = 0.0;
    double amplitude = 0.0;
    double eigen_constant = 0.0;
    double c_fractional = 0.0;
    Convention convention = Convention::generator;
    double window_lo = 0.5, window_hi = 4.0;
};

inline PowerSolution build_power_solution(const ProblemSpec& prob, const QuadratureOptions& q = {}) {
    prob.validate();
    if (!(prob.H.family == HFamily::polynomial && prob.H.m == 0.0 && prob.H.H0 == 1.0))
        throw std::domain_error("build_power_solution: model needs H == 1 (polynomial, H0=1, m=0)");
    if (!prob.G.single_term())
        throw std::domain_error("build_power_solution: model needs a single-term G");
    const double p = prob.G.terms[0].power;
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("build_power_solution: needs 0 < p < 1 (denominator 1-p vanishes at p = 1)");
    const double two_s = 2.0 * prob.kernel.s;
    if (!(prob.gamma + p < two_s))
        throw std::domain_error("build_power_solution: needs subcriticality gamma + p < 2s");
    const double beta = (two_s + prob.gamma - p) / (1.0 - p);
    if (!(beta > 0.0 && beta < two_s))
        throw std::domain_error("build_power_solution: resulting beta outside (0, 2s)");

    const Estimate c_frac = power_constant(prob.kernel.n, prob.kernel.s, beta, q);
    const double c_op =
        prob.convention == Convention::generator ? -c_frac.value : c_frac.value;
    if (!(c_op > 0.0))
        throw std::domain_error(
            "build_power_solution: operator constant is nonpositive in this convention; "
            "no positive amplitude solves the model equation");

    PowerSolution sol;
    sol.beta = beta;
    sol.c_fractional = c_frac.value;
    sol.eigen_constant = c_op;
    sol.convention = prob.convention;
    sol.amplitude = std::pow(std::pow(std::abs(beta), p) / c_op, 1.0 / (1.0 - p));
    return sol;
}

struct ResidualScan {
    double max_relative = 0.0;
    std::vector<double> radii, lhs, rhs;
};

/// Pointwise residual of the model equation on an annulus: the operator side
/// evaluated by quadrature against the closed-form right side
/// A^p |beta|^p |x|^{gamma + p(beta-1)}, both in the problem's convention.
inline ResidualScan residual_scan(const ProblemSpec& prob, const PowerSolution& sol,
                                  double r_lo, double r_hi, int samples,
                                  const QuadratureOptions& q = {}) {
    if (!(r_lo > 0.0 && r_hi > r_lo)) throw std::domain_error("residual_scan: bad annulus");
    if (samples < 2) throw std::domain_error("residual_scan: need >= 2 samples");
    const double A = sol.amplitude, beta = sol.beta;
    const double p = prob.G.terms.at(0).power;
    auto u = [&](double rho) { return A * std::pow(rho, beta); };
    const TailModel tail = growth_tail(A, beta);
    ResidualScan out;
    for (int i = 0; i < samples; ++i) {
        const double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / (samples - 1));
        Estimate e = evaluate_L_radial(prob.kernel, u, tail, r, q, q.t_cut, {r});
        double lhs = e.value;  // generator value
        if (prob.convention == Convention::fractional) lhs = -lhs;
        const double rhs =
            std::pow(A * std::abs(beta), p) * std::pow(r, prob.gamma + p * (beta - 1.0));
        out.radii.push_back(r);
        out.lhs.push_back(lhs);
        out.rhs.push_back(rhs);
        const double rel = std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
        out.max_relative = std::max(out.max_relative, rel);
    }
    return out;
}

}  // namespace nll
