#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace nll {

/// Value together with a quadrature error estimate (difference of two
/// refinement levels). `degraded` is set when the estimate exceeds the
/// requested tolerance; callers decide whether to escalate.
struct Estimate {
    double value = 0.0;
    double error = 0.0;
    bool degraded = false;
};

inline double sq(double x) { return x * x; }

/// Surface area of the unit sphere S^{n-1} in R^n. n = 1 gives 2 (two points).
inline double sphere_area(int n) {
    if (n < 1) throw std::domain_error("sphere_area: dimension must be >= 1");
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

/// Normalization constant C_{n,s} of the fractional Laplacian,
///   (-Delta)^s u(x) = C_{n,s} PV int (u(x)-u(y)) |x-y|^{-n-2s} dy,
/// C_{n,s} = 4^s Gamma(n/2+s) s / (pi^{n/2} Gamma(1-s)).
inline double fractional_constant(int n, double s) {
    if (n < 1) throw std::domain_error("fractional_constant: n must be >= 1");
    if (!(s > 0.0 && s < 1.0))
        throw std::domain_error("fractional_constant: s must lie in (0,1)");
    return std::pow(4.0, s) * std::tgamma(0.5 * n + s) * s /
           (std::pow(std::numbers::pi, 0.5 * n) * std::tgamma(1.0 - s));
}

/// Quintic smoothstep cutoff: eta == 1 on [0,1], eta == 0 on [2,inf),
/// C^2 transition 1 - S(r-1) with S(t) = 6t^5 - 15t^4 + 10t^3 on [1,2].
/// Shared by the cutoff scan and the Bernstein transform localizer.
inline double smoothstep_cutoff(double r) {
    r = std::abs(r);
    if (r <= 1.0) return 1.0;
    if (r >= 2.0) return 0.0;
    const double t = r - 1.0;
    return 1.0 - ((6.0 * t - 15.0) * t + 10.0) * t * t * t;
}

namespace gauss {

/// Gauss-Legendre nodes/weights on [-1,1], computed by Newton iteration on
/// the Legendre recurrence. Deterministic; cached per order.
inline void legendre(int order, std::vector<double>& x, std::vector<double>& w) {
    x.assign(order, 0.0);
    w.assign(order, 0.0);
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < order; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = order * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[order - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[order - 1 - i] = w[i];
    }
}

struct Rule {
    std::vector<double> x, w;  // on [-1,1]
};

inline const Rule& rule(int order) {
    // thread-local: evaluations may run concurrently per the module contracts
    static thread_local std::vector<Rule> cache(65);
    if (order < 1 || order > 64) throw std::domain_error("gauss rule order out of range");
    Rule& r = cache[static_cast<std::size_t>(order)];
    if (r.x.empty()) legendre(order, r.x, r.w);
    return r;
}

/// Integrate f over [a,b] with a fixed-order rule.
template <class F>
double panel(F&& f, double a, double b, int order) {
    const Rule& r = rule(order);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) acc += r.w[i] * f(mid + half * r.x[i]);
    return acc * half;
}

}  // namespace gauss

/// Least-squares slope of y against x (both already transformed).
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("ls_slope: need two samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw std::invalid_argument("ls_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / den;
}

}  // namespace nll
