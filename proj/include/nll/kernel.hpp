#pragma once

#include <functional>
#include <utility>

#include "nll/base.hpp"

namespace nll {

enum class Normalization { raw, fractional };

/// Stable-like kernel K(z) = c(|z|) |z|^{-n-2s} with two-sided ellipticity
/// bounds lambda <= c <= Lambda. The modulation must be bounded and depend
/// on |z| only, so K is even by construction.
struct KernelSpec {
    int n = 1;
    double s = 0.5;
    double lambda = 1.0;
    double Lambda = 1.0;
    Normalization normalization = Normalization::raw;
    /// Optional radial modulation c(t); when absent, c is the constant fixed
    /// by `normalization` (1 for raw, C_{n,s} for fractional).
    std::function<double(double)> modulation;

    void validate() const {
        if (n < 1) throw std::domain_error("KernelSpec: n must be >= 1");
        if (!(s > 0.0 && s < 1.0)) throw std::domain_error("KernelSpec: s must lie in (0,1)");
        if (!(lambda > 0.0) || !(Lambda >= lambda))
            throw std::domain_error("KernelSpec: need 0 < lambda <= Lambda");
    }

    /// Modulation value c(t); constant for raw/fractional normalizations.
    double c(double t) const {
        if (modulation) return modulation(t);
        return normalization == Normalization::fractional ? fractional_constant(n, s) : 1.0;
    }

    /// Limit value of the modulation used for the analytic far-tail closure.
    /// Exact for constant modulations; for a general bounded c(t) the closure
    /// freezes c at the truncation radius (the remainder is O(T^{-2s})).
    double c_far(double t_cut) const { return c(t_cut); }
};

inline KernelSpec make_kernel(int n, double s, Normalization norm = Normalization::raw) {
    KernelSpec k;
    k.n = n;
    k.s = s;
    k.normalization = norm;
    if (norm == Normalization::fractional) k.lambda = k.Lambda = fractional_constant(n, s);
    k.validate();
    return k;
}

/// K-density along a ray: c(t) * t^{-n-2s}, t > 0.
inline double kernel_density(const KernelSpec& k, double t) {
    k.validate();
    if (!(t > 0.0)) throw std::domain_error("kernel_density: radius must be positive");
    return k.c(t) * std::pow(t, -static_cast<double>(k.n) - 2.0 * k.s);
}

/// C_{n,s}: the constant making the raw kernel match (-Delta)^s.
inline double normalization_constant(int n, double s) { return fractional_constant(n, s); }

enum class TailKind { zero, power, power_growth };

/// Analytic description of a represented function beyond its grid:
/// zero, coeff*|x|^{-q} (decay), or coeff*|x|^{+q} with q < 2s (growth kept
/// below the operator order so far-field integrals converge).
struct TailModel {
    TailKind kind = TailKind::zero;
    double coeff = 0.0;
    double q = 0.0;

    double value(double r) const {
        switch (kind) {
            case TailKind::zero: return 0.0;
            case TailKind::power: return coeff * std::pow(r, -q);
            case TailKind::power_growth: return coeff * std::pow(r, q);
        }
        return 0.0;
    }

    void require_convergent(double two_s) const {
        if (kind == TailKind::power_growth && !(q < two_s))
            throw std::domain_error("TailModel: growth exponent must satisfy q < 2s");
    }

    /// Closed form of  int_T^inf  value(t) * t^{-1-2s} dt  (kernel modulation
    /// handled by the caller).
    double ray_integral_beyond(double T, double two_s) const {
        require_convergent(two_s);
        switch (kind) {
            case TailKind::zero: return 0.0;
            case TailKind::power: return coeff * std::pow(T, -q - two_s) / (q + two_s);
            case TailKind::power_growth: return coeff * std::pow(T, q - two_s) / (two_s - q);
        }
        return 0.0;
    }
};

inline TailModel zero_tail() { return {}; }
inline TailModel power_tail(double coeff, double q) { return {TailKind::power, coeff, q}; }
inline TailModel growth_tail(double coeff, double q) { return {TailKind::power_growth, coeff, q}; }

}  // namespace nll
