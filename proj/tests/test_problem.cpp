#include <catch2/catch_amalgamated.hpp>

#include "nll/problem.hpp"

using namespace nll;

namespace {

ProblemSpec ref_problem(int n, double s, double p, double gamma,
                        Convention conv = Convention::generator) {
    ProblemSpec prob;
    prob.kernel = make_kernel(n, s, Normalization::fractional);
    prob.H = HSpec{HFamily::polynomial, 0.0, 1.0, 1.0};
    prob.G = single_power(1.0, p);
    prob.gamma = gamma;
    prob.convention = conv;
    return prob;
}

}  // namespace

TEST_CASE("H family representatives") {
    CHECK(eval_H(HSpec{HFamily::polynomial, 2.0, 1.0, 1.0}, 3.0) == Catch::Approx(10.0));
    CHECK(eval_H(HSpec{HFamily::exponential}, 0.0) == Catch::Approx(1.0));
    CHECK_THROWS_AS(eval_H(HSpec{HFamily::singular, 1.0, 1.0, 1.0}, 0.0), std::domain_error);
    CHECK(eval_H(HSpec{HFamily::polynomial, 0.0, 1.0, 1.0}, 5.0) == Catch::Approx(1.0));
    CHECK(eval_H(HSpec{HFamily::logarithmic, 0.0, 2.0, 1.0}, std::exp(1.0) - 1.0) ==
          Catch::Approx(3.0));
}

TEST_CASE("H families i-iii are nondecreasing on a log-spaced sample") {
    const std::vector<HSpec> hs{{HFamily::polynomial, 2.0, 1.0, 1.0},
                                {HFamily::logarithmic, 0.0, 1.0, 1.0},
                                {HFamily::exponential, 0.0, 1.0, 1.0}};
    for (const HSpec& h : hs) {
        double prev = eval_H(h, 0.0);
        for (int i = -60; i <= 60; ++i) {
            const double u = std::pow(10.0, i / 20.0);
            if (u > 1e3) break;
            const double v = eval_H(h, u);
            CHECK(v >= prev - 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("H growth envelopes hold by sampling") {
    const HSpec hp{HFamily::polynomial, 2.0, 1.0, 1.0};
    const HSpec hl{HFamily::logarithmic, 0.0, 1.5, 1.0};
    for (int i = 0; i <= 40; ++i) {
        const double u = std::pow(10.0, -2.0 + 0.125 * i);
        CHECK(eval_H(hp, u) >= hp.H0);
        CHECK(eval_H(hp, u) <= (hp.H0 + 1.0) * (1.0 + std::pow(u, hp.m)));
        CHECK(eval_H(hl, u) <= (hl.H0 + 1.0) * (1.0 + std::log1p(u)));
    }
}

TEST_CASE("G evaluation and bounds") {
    CHECK(eval_G(single_power(1.0, 0.5), 4.0) == Catch::Approx(2.0));
    CHECK(eval_G(single_power(1.0, 0.5), 0.0) == 0.0);
    GSpec two{{{1.0, 0.5}, {2.0, 2.0}}};
    CHECK(eval_G(two, 1.0) == Catch::Approx(3.0));
    CHECK(two.p_min() == Catch::Approx(0.5));
    CHECK(two.p_max() == Catch::Approx(2.0));
    CHECK(two.c1() == Catch::Approx(1.0));
    CHECK(two.c2() == Catch::Approx(3.0));
    for (int i = 0; i <= 30; ++i) {  // sampled envelope
        const double z = std::pow(10.0, -2.0 + 0.2 * i);
        const double g = eval_G(two, z);
        if (z <= 1.0) CHECK(g >= two.c1() * std::pow(z, two.p_min()) - 1e-15);
        CHECK(g <= two.c2() * (1.0 + std::pow(z, two.p_max())) + 1e-15);
    }
}

TEST_CASE("right-hand side with the Henon weight") {
    ProblemSpec p = ref_problem(1, 0.5, 1.0, 0.0);
    CHECK(eval_rhs(p, 3.0, 2.0, 2.0) == Catch::Approx(eval_H(p.H, 2.0) * 2.0));

    ProblemSpec p2 = ref_problem(1, 0.5, 1.0, 2.0);
    CHECK(eval_rhs(p2, 3.0, 1.0, 2.0) == Catch::Approx(9.0 * 1.0 * 2.0));

    ProblemSpec p3 = ref_problem(1, 0.5, 1.0, -1.0);
    CHECK_THROWS_AS(eval_rhs(p3, 0.0, 1.0, 1.0), std::domain_error);
    p3.weight_regularization = 1e-3;
    CHECK(std::isfinite(eval_rhs(p3, 0.0, 1.0, 1.0)));
}

TEST_CASE("regime classification") {
    SECTION("subcritical with beta") {
        const RegimeReport r = classify_regime(ref_problem(1, 0.5, 0.5, 0.2));
        CHECK(r.regime == Regime::Subcritical);
        REQUIRE(r.beta);
        CHECK(*r.beta == Catch::Approx(1.4).epsilon(1e-12));
    }
    SECTION("supercritical with growth exponent") {
        const RegimeReport r = classify_regime(ref_problem(1, 0.25, 0.4, 0.3));
        CHECK(r.regime == Regime::Supercritical);
        REQUIRE(r.growth_exponent);
        CHECK(*r.growth_exponent == Catch::Approx(-1.0).epsilon(1e-12));
    }
    SECTION("critical balance") {
        const RegimeReport r = classify_regime(ref_problem(1, 0.5, 0.5, 0.5));
        CHECK(r.regime == Regime::Critical);
    }
    SECTION("ambiguous multi-term G") {
        ProblemSpec p = ref_problem(1, 0.5, 0.5, 0.2);
        p.G.terms.push_back({2.0, 2.0});
        CHECK(classify_regime(p).regime == Regime::Ambiguous);
    }
    SECTION("p = 1 leaves beta undefined but still classifies") {
        const RegimeReport r = classify_regime(ref_problem(1, 0.9, 1.0, 0.0));
        CHECK(r.regime == Regime::Subcritical);
        CHECK(r.beta_undefined_p_equals_one);
        CHECK_FALSE(r.beta);
    }
}

TEST_CASE("classification ignores amplitudes") {
    for (double c : {0.1, 1.0, 7.0, 100.0}) {
        for (double H0 : {0.5, 1.0, 10.0}) {
            ProblemSpec p = ref_problem(1, 0.5, 0.5, 0.2);
            p.G.terms[0].coeff = c;
            p.H.H0 = H0;
            const RegimeReport r = classify_regime(p);
            CHECK(r.regime == Regime::Subcritical);
            CHECK(*r.beta == Catch::Approx(1.4).epsilon(1e-12));
        }
    }
}

TEST_CASE("beta formula identity is floating-point tight") {
    for (double s : {0.3, 0.6, 0.9}) {
        for (double p : {0.2, 0.5, 0.8}) {
            for (double g : {-0.4, 0.0, 0.3}) {
                ProblemSpec prob = ref_problem(1, s, p, g);
                const RegimeReport r = classify_regime(prob);
                if (!r.beta) continue;
                CHECK(std::abs(*r.beta * (1.0 - p) - (2.0 * s + g - p)) <= 1e-12);
            }
        }
    }
}

TEST_CASE("exact power solution of the model equation") {
    ProblemSpec prob = ref_problem(1, 0.9, 0.5, -0.6);
    const PowerSolution sol = build_power_solution(prob);
    CHECK(sol.beta == Catch::Approx(1.4).epsilon(1e-12));
    // amplitude follows from the eigen-constant: A^{1-p} C = |beta|^p
    CHECK(sol.amplitude ==
          Catch::Approx(std::pow(std::sqrt(1.4) / sol.eigen_constant, 2.0)).epsilon(1e-12));
    CHECK(std::abs(std::pow(sol.amplitude, 1.0 - 0.5) * sol.eigen_constant -
                   std::pow(1.4, 0.5)) <= 1e-6 * std::pow(1.4, 0.5));
    CHECK(sol.eigen_constant > 0.0);
    CHECK(sol.c_fractional < 0.0);

    SECTION("p = 1 is rejected with the vanishing-denominator error") {
        ProblemSpec p1 = ref_problem(1, 0.9, 1.0, -0.6);
        CHECK_THROWS_WITH(build_power_solution(p1),
                          Catch::Matchers::ContainsSubstring("1-p"));
    }
    SECTION("precondition failures name the failed hypothesis") {
        ProblemSpec bad = ref_problem(1, 0.9, 0.5, -0.6);
        bad.H.m = 2.0;
        CHECK_THROWS_WITH(build_power_solution(bad),
                          Catch::Matchers::ContainsSubstring("H == 1"));
        ProblemSpec sup = ref_problem(1, 0.25, 0.4, 0.3);
        CHECK_THROWS_WITH(build_power_solution(sup),
                          Catch::Matchers::ContainsSubstring("subcriticality"));
    }
}

TEST_CASE("residual scan validates the power solution and detects tampering") {
    ProblemSpec prob = ref_problem(1, 0.9, 0.5, -0.6);
    const PowerSolution sol = build_power_solution(prob);
    const ResidualScan ok = residual_scan(prob, sol, 0.5, 4.0, 17);
    CHECK(ok.max_relative <= 1e-2);

    SECTION("amplitude perturbation is detected") {
        PowerSolution bad = sol;
        bad.amplitude *= 2.0;
        const ResidualScan r = residual_scan(prob, bad, 0.5, 4.0, 17);
        CHECK(r.max_relative >= 0.1);
    }
    SECTION("slope perturbation grows with the annulus") {
        PowerSolution bad = sol;
        bad.beta += 0.2;
        const ResidualScan narrow = residual_scan(prob, bad, 1.0, 1.5, 9);
        const ResidualScan wide = residual_scan(prob, bad, 0.3, 6.0, 9);
        CHECK(wide.max_relative > narrow.max_relative);
    }
}

TEST_CASE("power-solution self-consistency across a config sweep") {
    // all configs inside the solvable corner: 0<p<1, gamma+p<2s, beta in (0,2s)
    const std::vector<std::array<double, 3>> cfgs{
        {0.9, 0.5, -0.6}, {0.9, 0.4, -0.7}, {0.8, 0.5, -0.5}, {0.8, 0.3, -0.6},
        {0.7, 0.5, -0.4}, {0.7, 0.4, -0.5}, {0.6, 0.3, -0.4}, {0.6, 0.5, -0.35},
        {0.9, 0.6, -0.8}, {0.75, 0.45, -0.5}};
    for (const auto& [s, p, g] : cfgs) {
        ProblemSpec prob = ref_problem(1, s, p, g);
        INFO("s=" << s << " p=" << p << " gamma=" << g);
        PowerSolution sol;
        try {
            sol = build_power_solution(prob);
        } catch (const std::domain_error&) {
            continue;  // outside the solvable corner; preconditions reported
        }
        const ResidualScan r = residual_scan(prob, sol, 0.5, 4.0, 10);
        CHECK(r.max_relative <= 1e-2);
    }
}
