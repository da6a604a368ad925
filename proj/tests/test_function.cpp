#include <catch2/catch_amalgamated.hpp>

#include "nll/function.hpp"

using namespace nll;

TEST_CASE("tail models") {
    CHECK(power_tail(2.0, 3.0).value(2.0) == Catch::Approx(0.25));
    CHECK(growth_tail(1.0, 0.5).value(4.0) == Catch::Approx(2.0));
    CHECK(zero_tail().value(10.0) == 0.0);
    CHECK_THROWS_AS(growth_tail(1.0, 1.5).require_convergent(1.0), std::domain_error);
    CHECK_NOTHROW(growth_tail(1.0, 0.9).require_convergent(1.0));
    // closed-form ray integrals agree with a direct sum
    const TailModel t = power_tail(2.0, 3.0);
    double acc = 0.0;
    const double T = 5.0, s2 = 1.2;
    for (int i = 0; i < 400000; ++i) {
        const double a = T * std::pow(1000.0, i / 400000.0);
        const double b = T * std::pow(1000.0, (i + 1) / 400000.0);
        acc += t.value(0.5 * (a + b)) * std::pow(0.5 * (a + b), -1.0 - s2) * (b - a);
    }
    CHECK(t.ray_integral_beyond(T, s2) == Catch::Approx(acc).epsilon(1e-3));
}

TEST_CASE("radial function invariants") {
    std::vector<double> g{0.0, 1.0, 2.0, 4.0, 8.0};
    std::vector<double> v{1.0, 0.5, 0.2, 0.06, 0.015};
    const RadialFunction u(g, v, power_tail(1.0, 2.0));
    SECTION("nodes reproduce exactly") {
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(u(g[i]) == Catch::Approx(v[i]).margin(0.0));
    }
    SECTION("tail beyond the grid") {
        CHECK(u(10.0) == Catch::Approx(0.01));
        CHECK(u.tail_mismatch() == Catch::Approx(std::abs(0.015 - 1.0 / 64.0)));
    }
    SECTION("monotone data stays monotone between nodes") {
        double prev = u(0.0);
        for (int i = 1; i <= 400; ++i) {
            const double val = u(8.0 * i / 400.0);
            CHECK(val <= prev + 1e-14);
            prev = val;
        }
    }
    SECTION("validation errors") {
        CHECK_THROWS_AS(RadialFunction({1.0, 2.0}, {1.0, 2.0}, zero_tail()),
                        std::invalid_argument);
        CHECK_THROWS_AS(RadialFunction({0.0, 0.0, 1.0}, {1.0, 1.0, 1.0}, zero_tail()),
                        std::invalid_argument);
    }
}

TEST_CASE("line function with asymmetric tails") {
    std::vector<double> g;
    for (int i = 0; i <= 32; ++i) g.push_back(-4.0 + 8.0 * i / 32.0);
    auto f = [](double x) { return std::pow(1.0 + x * x, -1.0) * (1.0 + 0.5 * std::tanh(x)); };
    const LineFunction u = sample_line(f, g, power_tail(0.5, 2.0), power_tail(1.5, 2.0));
    CHECK(u(-6.0) == Catch::Approx(0.5 / 36.0));
    CHECK(u(6.0) == Catch::Approx(1.5 / 36.0));
    CHECK(u(0.0) == Catch::Approx(1.0));
    // interpolation stays within the local data envelope (no overshoot)
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        const double lo = std::min(u.values[i], u.values[i + 1]);
        const double hi = std::max(u.values[i], u.values[i + 1]);
        for (int k = 1; k < 8; ++k) {
            const double x = g[i] + (g[i + 1] - g[i]) * k / 8.0;
            CHECK(u(x) >= lo - 1e-12);
            CHECK(u(x) <= hi + 1e-12);
        }
    }
}

TEST_CASE("piecewise-linear view is linear in the samples") {
    std::vector<double> g{0.0, 1.0, 2.0, 3.0};
    const RadialFunction a(g, {1.0, 0.4, 0.3, 0.1}, zero_tail());
    const RadialFunction b(g, {0.2, 0.5, 0.1, 0.05}, zero_tail());
    std::vector<double> comb(4);
    for (int i = 0; i < 4; ++i) comb[i] = 2.0 * a.values[i] - 0.5 * b.values[i];
    const RadialFunction c(g, comb, zero_tail());
    for (double r : {0.25, 0.9, 1.5, 2.75})
        CHECK(c.linear_at(r) == Catch::Approx(2.0 * a.linear_at(r) - 0.5 * b.linear_at(r))
                                    .margin(1e-15));
}
