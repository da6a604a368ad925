#pragma once

#include <algorithm>
#include <cassert>
#include <vector>

#include "nll/kernel.hpp"

namespace nll {

namespace detail {

/// Index of the cell containing x (clamped), for a strictly increasing grid.
inline std::size_t cell_of(const std::vector<double>& g, double x) {
    if (x <= g.front()) return 0;
    if (x >= g.back()) return g.size() - 2;
    const auto it = std::upper_bound(g.begin(), g.end(), x);
    return static_cast<std::size_t>(it - g.begin()) - 1;
}

/// Fritsch-Carlson monotone cubic slopes: order-preserving, no overshoot.
inline std::vector<double> pchip_slopes(const std::vector<double>& x,
                                        const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    std::vector<double> h(n - 1), del(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        del[i] = (y[i + 1] - y[i]) / h[i];
    }
    if (n == 2) {
        d[0] = d[1] = del[0];
        return d;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (del[i - 1] * del[i] <= 0.0) {
            d[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
        }
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (s * d0 <= 0.0)
            s = 0.0;
        else if (d0 * d1 < 0.0 && std::abs(s) > 3.0 * std::abs(d0))
            s = 3.0 * d0;
        return s;
    };
    d[0] = end_slope(h[0], h[1], del[0], del[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    return d;
}

}  // namespace detail

/// Monotone piecewise-cubic interpolant on a strictly increasing grid.
/// Agrees with the samples at nodes exactly and preserves local monotonicity.
class MonotoneCubic {
  public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)), d_(detail::pchip_slopes(x_, y_)) {}

    double operator()(double x) const {
        const std::size_t i = detail::cell_of(x_, x);
        const double h = x_[i + 1] - x_[i];
        const double t = (x - x_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        return y_[i] * (2 * t3 - 3 * t2 + 1) + h * d_[i] * (t3 - 2 * t2 + t) +
               y_[i + 1] * (-2 * t3 + 3 * t2) + h * d_[i + 1] * (t3 - t2);
    }

    double derivative(double x) const {
        const std::size_t i = detail::cell_of(x_, x);
        const double h = x_[i + 1] - x_[i];
        const double t = (x - x_[i]) / h;
        const double t2 = t * t;
        return (y_[i] * (6 * t2 - 6 * t) + h * d_[i] * (3 * t2 - 4 * t + 1) +
                y_[i + 1] * (-6 * t2 + 6 * t) + h * d_[i + 1] * (3 * t2 - 2 * t)) /
               h;
    }

  private:
    std::vector<double> x_, y_, d_;
};

/// Radial profile U on 0 = r_0 < ... < r_M = R_ext with an analytic tail
/// beyond R_ext. Evaluation between nodes uses the monotone cubic rule; the
/// operator path reconstructs with nodal hats (linear in the samples).
struct RadialFunction {
    std::vector<double> grid;
    std::vector<double> values;
    TailModel tail;

    RadialFunction() = default;
    RadialFunction(std::vector<double> g, std::vector<double> v, TailModel t)
        : grid(std::move(g)), values(std::move(v)), tail(t) {
        validate();
        interp_ = MonotoneCubic(grid, values);
    }

    void validate() const {
        if (grid.size() < 2 || grid.size() != values.size())
            throw std::invalid_argument("RadialFunction: need matching grid/values, size >= 2");
        if (grid.front() != 0.0)
            throw std::invalid_argument("RadialFunction: first node must be r = 0");
        for (std::size_t i = 0; i + 1 < grid.size(); ++i)
            if (!(grid[i] < grid[i + 1]))
                throw std::invalid_argument("RadialFunction: grid must be strictly increasing");
        for (double v : values)
            if (!std::isfinite(v)) throw std::invalid_argument("RadialFunction: non-finite value");
    }

    double r_ext() const { return grid.back(); }

    /// Mismatch between the last sample and the tail value at R_ext.
    double tail_mismatch() const { return std::abs(values.back() - tail.value(r_ext())); }

    double operator()(double r) const {
        r = std::abs(r);
        if (r > r_ext()) return tail.value(r);
        return interp_(r);
    }

    /// Piecewise-linear reconstruction (exactly linear in the samples);
    /// this is what the nonlocal operator and the solver see.
    double linear_at(double r) const {
        r = std::abs(r);
        if (r > r_ext()) return tail.value(r);
        const std::size_t i = detail::cell_of(grid, r);
        const double t = (r - grid[i]) / (grid[i + 1] - grid[i]);
        return values[i] * (1.0 - t) + values[i + 1] * t;
    }

  private:
    MonotoneCubic interp_;
};

/// Sampled function on a symmetric 1-D grid -X = x_0 < ... < x_M = X with
/// independent left/right tails. Used for the n = 1 moving-plane and
/// asymmetric-data experiments.
struct LineFunction {
    std::vector<double> grid;
    std::vector<double> values;
    TailModel tail_left, tail_right;

    LineFunction() = default;
    LineFunction(std::vector<double> g, std::vector<double> v, TailModel tl, TailModel tr)
        : grid(std::move(g)), values(std::move(v)), tail_left(tl), tail_right(tr) {
        validate();
        interp_ = MonotoneCubic(grid, values);
    }

    void validate() const {
        if (grid.size() < 2 || grid.size() != values.size())
            throw std::invalid_argument("LineFunction: need matching grid/values, size >= 2");
        for (std::size_t i = 0; i + 1 < grid.size(); ++i)
            if (!(grid[i] < grid[i + 1]))
                throw std::invalid_argument("LineFunction: grid must be strictly increasing");
        for (double v : values)
            if (!std::isfinite(v)) throw std::invalid_argument("LineFunction: non-finite value");
    }

    double x_min() const { return grid.front(); }
    double x_max() const { return grid.back(); }

    double operator()(double x) const {
        if (x < x_min()) return tail_left.value(std::abs(x));
        if (x > x_max()) return tail_right.value(std::abs(x));
        return interp_(x);
    }

    double linear_at(double x) const {
        if (x < x_min()) return tail_left.value(std::abs(x));
        if (x > x_max()) return tail_right.value(std::abs(x));
        const std::size_t i = detail::cell_of(grid, x);
        const double t = (x - grid[i]) / (grid[i + 1] - grid[i]);
        return values[i] * (1.0 - t) + values[i + 1] * t;
    }

  private:
    MonotoneCubic interp_;
};

/// Sample a callable into a RadialFunction.
template <class F>
RadialFunction sample_radial(F&& f, const std::vector<double>& grid, TailModel tail) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid[i]);
    return RadialFunction(grid, std::move(v), tail);
}

template <class F>
LineFunction sample_line(F&& f, const std::vector<double>& grid, TailModel tl, TailModel tr) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid[i]);
    return LineFunction(grid, std::move(v), tl, tr);
}

}  // namespace nll
