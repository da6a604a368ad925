#include <catch2/catch_amalgamated.hpp>

#include "nll/run.hpp"

using namespace nll;

TEST_CASE("degraded accuracy is flagged, not thrown") {
    QuadratureOptions bad;
    bad.near_panels = 1;
    bad.far_panels = 1;
    bad.panel_order = 1;
    bad.target_rel_tol = 1e-12;
    const KernelSpec k = make_kernel(1, 0.5, Normalization::fractional);
    auto f = [](double x) { return 1.0 / (1.0 + x * x); };
    const Estimate e =
        evaluate_L_line(k, f, power_tail(1.0, 2.0), power_tail(1.0, 2.0), 0.0, bad, 64.0);
    CHECK(e.degraded);
    CHECK(e.error > 0.0);

    io::json cfg;
    cfg["problem"]["kernel"] = {{"n", 1}, {"s", 0.5}, {"normalization", "fractional"}};
    cfg["quadrature"] = {{"near_panels", 1}, {"far_panels", 1}, {"panel_order", 1},
                         {"target_rel_tol", 1e-12}};
    cfg["eval_op"] = {{"target", "barrier"}, {"beta", 1.0}, {"amplitude", 1.0}, {"x", 0.5}};
    const auto r = run::run_command("eval-op", cfg);
    CHECK(r.exit_code == 2);
    CHECK(r.report["status"] == "degraded");
}

TEST_CASE("offset grid solves the singular-weight problem without regularization") {
    ProblemSpec prob;
    prob.kernel = make_kernel(1, 0.9, Normalization::fractional);
    prob.H = HSpec{HFamily::polynomial, 0.0, 1.0, 1.0};
    prob.G = single_power(1.0, 1.2);
    prob.gamma = -0.6;  // |x|^gamma singular at 0; the grid never touches it
    prob.convention = Convention::fractional;
    GridSpec grid{GridMode::radial, 8.0, 64};
    grid.offset_origin = true;
    ExteriorData ext;
    ext.c = 1e-3;
    ext.beta = 2.6;
    ext.beta_decl = 2.6;
    const SolveReport rep = monotone_iterate(prob, grid, ext, SolverOptions{});
    CHECK(rep.status == SolveStatus::Converged);
    for (double v : rep.values) CHECK(std::isfinite(v));
    REQUIRE(rep.radial);
    CHECK((*rep.radial)(0.0) >= 0.0);
}

TEST_CASE("radial n=2 manufactured solution at the general path's accuracy") {
    QuadratureOptions q;
    q.angular_nodes = 24;
    auto ustar = [](double r) { return 1.0 / (1.0 + r * r); };
    ExteriorData ext;
    ext.c = 1.0;
    ext.beta = 1.0;
    ext.beta_decl = 1.0;
    auto run = [&](int M) {
        const KernelSpec k = make_kernel(2, 0.5, Normalization::fractional);
        const GridSpec g{GridMode::radial, 8.0, M};
        const DiscreteOperator op = assemble_operator(k, g, q);
        std::vector<double> f(op.nI());
        for (int i = 0; i < op.nI(); ++i) {
            const double r = op.nodes[i + op.i_lo];
            f[i] = evaluate_L_radial(k, ustar, power_tail(1.0, 2.0), r, q, 64.0, {r}).value;
        }
        const std::vector<double> u = linear_solve(op, f, ext, Convention::generator);
        double err = 0.0;
        for (int i = 0; i < op.nI(); ++i) {
            const double r = op.nodes[i + op.i_lo];
            err = std::max(err, std::abs(u[i] - ustar(r)) / ustar(r));
        }
        return err;
    };
    const double e48 = run(48), e96 = run(96);
    CHECK(e48 <= 5e-2);
    CHECK(e96 < e48 / 1.5);
}

TEST_CASE("genuine blow-up is flagged Diverged and aborts exhaustion") {
    ProblemSpec prob;
    prob.kernel = make_kernel(1, 0.9, Normalization::fractional);
    prob.H = HSpec{HFamily::exponential, 0.0, 1.0, 1.0};
    prob.G = single_power(1.0, 1.5);
    prob.convention = Convention::fractional;
    GridSpec grid{GridMode::radial, 8.0, 48};
    ExteriorData ext;
    ext.c = 20.0;
    ext.beta = 0.5;
    ext.beta_decl = 0.5;
    ext.a_decl = 0.0;
    ext.A_decl = 1e30;
    SolverOptions so;
    so.max_iter = 120;
    const SolveReport rep = monotone_iterate(prob, grid, ext, so);
    CHECK(rep.status == SolveStatus::Diverged);

    const ExhaustReport ex =
        exhaust(prob, {4.0, 8.0}, [&](double) { return ext; }, grid, so);
    CHECK(ex.aborted);
    CHECK(ex.runs.size() <= 2);
}

TEST_CASE("modulated kernels keep the assembly structure") {
    KernelSpec k = make_kernel(1, 0.6);
    k.lambda = 1.0;
    k.Lambda = 1.5;
    k.modulation = [](double t) { return 1.0 + 0.5 * sq(std::sin(t)); };
    QuadratureOptions q;
    const DiscreteOperator op = assemble_operator(k, GridSpec{GridMode::line, 6.0, 32}, q);
    const int m = op.nI();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const double w = op.W[static_cast<std::size_t>(i) * m + j];
            if (i == j)
                CHECK(w < 0.0);
            else
                CHECK(w >= 0.0);
        }
    ExteriorData one;
    one.c = 1.0;
    one.beta = 0.0;
    one.beta_decl = 0.0;
    const auto Lu = op.apply(std::vector<double>(m, 1.0), one);
    for (double v : Lu) CHECK(std::abs(v) <= 1e-8);
}

TEST_CASE("grid-sampled functions agree across the radial and line paths") {
    const KernelSpec k = make_kernel(1, 0.7, Normalization::fractional);
    QuadratureOptions q;
    const double beta = 1.1;
    auto U = [&](double r) { return std::pow(1.0 + r * r, -beta); };
    std::vector<double> rg, lg;
    const int M = 65;
    for (int i = 0; i < M; ++i) rg.push_back(8.0 * i / (M - 1));
    for (int i = 0; i < 2 * M - 1; ++i) lg.push_back(-8.0 + 8.0 * i / (M - 1));
    const RadialFunction ur = sample_radial(U, rg, power_tail(1.0, 2.0 * beta));
    const LineFunction ul = sample_line([&](double x) { return U(std::abs(x)); }, lg,
                                        power_tail(1.0, 2.0 * beta), power_tail(1.0, 2.0 * beta));
    for (double r : {0.0, 1.0, 2.5}) {
        const double a = evaluate_L_radial(k, ur, r, q).value;
        const double b = evaluate_L_line(k, ul, r, q).value;
        CHECK(a == Catch::Approx(b).margin(1e-6 * std::max(1.0, std::abs(a))));
    }
}

TEST_CASE("monotone cubic derivative matches finite differences") {
    std::vector<double> g;
    for (int i = 0; i <= 40; ++i) g.push_back(-4.0 + 8.0 * i / 40.0);
    auto f = [](double x) { return 1.0 / (1.0 + x * x); };
    const LineFunction u = sample_line(f, g, power_tail(1.0, 2.0), power_tail(1.0, 2.0));
    MonotoneCubic mc(g, u.values);
    for (double x : {-2.3, -0.9, 0.4, 1.7, 3.1}) {
        const double h = 1e-6;
        const double fd = (mc(x + h) - mc(x - h)) / (2.0 * h);
        CHECK(mc.derivative(x) == Catch::Approx(fd).margin(1e-5));
    }
}

TEST_CASE("config and command error paths") {
    SECTION("moving-plane demands a line grid") {
        io::json cfg;
        cfg["problem"]["kernel"] = {{"n", 1}, {"s", 0.9}, {"normalization", "fractional"}};
        cfg["problem"]["G"]["terms"] = io::json::array({{{"coeff", 1.0}, {"power", 1.2}}});
        cfg["grid"] = {{"mode", "radial"}, {"R", 8.0}, {"M", 32}};
        CHECK_THROWS_WITH(run::run_command("moving-plane", cfg),
                          Catch::Matchers::ContainsSubstring("line-mode"));
    }
    SECTION("offset grids are uniform radial only") {
        GridSpec g{GridMode::line, 8.0, 32};
        g.offset_origin = true;
        CHECK_THROWS_AS(build_grid(g), std::domain_error);
        GridSpec g2{GridMode::radial, 8.0, 32};
        g2.offset_origin = true;
        g2.grade_inner = 0.8;
        CHECK_THROWS_AS(build_grid(g2), std::domain_error);
    }
    SECTION("nested unknown keys carry their path") {
        io::json cfg;
        cfg["solver"]["omega"] = 0.5;  // the knob is called underrelaxation
        try {
            run::run_command("classify", cfg);
            FAIL("expected rejection");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("$.solver") != std::string::npos);
        }
    }
    SECTION("margin tables carry the declared column order") {
        io::json cfg;
        cfg["problem"]["kernel"] = {{"n", 1}, {"s", 0.9}, {"normalization", "fractional"}};
        cfg["problem"]["G"]["terms"] = io::json::array({{{"coeff", 1.0}, {"power", 0.5}}});
        cfg["verify_barriers"] = {{"beta", 2.6}, {"super_sweep", io::json::array({1.0})},
                                  {"sub_sweep", io::json::array({1e-3})}};
        const auto r = run::run_command("verify-barriers", cfg);
        bool found = false;
        for (const auto& [name, header, cols] : r.tables) {
            if (name != "margins_super.csv") continue;
            found = true;
            REQUIRE(header.size() == 4);
            CHECK(header[0] == "r");
            CHECK(header[1] == "lhs");
            CHECK(header[2] == "rhs");
            CHECK(header[3] == "margin");
        }
        CHECK(found);
    }
}

TEST_CASE("node-coincident queries of kinked reconstructions are flagged") {
    const KernelSpec k = make_kernel(1, 0.9, Normalization::fractional);
    QuadratureOptions q;
    std::vector<double> grid, vals;
    for (int i = 0; i <= 64; ++i) {
        grid.push_back(8.0 * i / 64.0);
        vals.push_back(std::pow(1.0 + grid.back() * grid.back(), -1.3));
    }
    const RadialFunction rf(grid, vals, power_tail(1.0, 2.6));
    const Estimate on_node = evaluate_L_radial(k, rf, grid[32], q);
    CHECK(on_node.degraded);
    CHECK(on_node.error >= std::abs(on_node.value));
    const Estimate off_node = evaluate_L_radial(k, rf, 0.5 * (grid[32] + grid[33]), q);
    CHECK_FALSE(off_node.degraded);
}
