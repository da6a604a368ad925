#pragma once

#include <random>

#include "nll/io.hpp"

namespace nll::run {

using io::json;

struct CommandResult {
    json report;  // full RunReport document
    std::vector<std::tuple<std::string, std::vector<std::string>, std::vector<std::vector<double>>>>
        tables;  // (filename, header, columns)
    int exit_code = 0;
};

struct ResolvedConfig {
    ProblemSpec problem;
    GridSpec grid;
    QuadratureOptions quadrature;
    SolverOptions solver;
    ExteriorData exterior;
    std::uint64_t seed = 0;
    json command_block;  // raw block for the active command
    json echo;           // fully resolved config echo
};

inline ResolvedConfig resolve_config(const std::string& command, const json& cfg) {
    static const std::set<std::string> blocks = {
        "problem",      "grid",      "quadrature",     "solver",          "exterior",
        "seed",         "classify",  "eval_op",        "power_solution",  "verify_barriers",
        "solve_ball",   "exhaust",   "moving_plane",   "bernstein",       "liouville_demo",
        "decay_fit",    "uniqueness", "selftest"};
    io::check_keys(cfg, blocks, "$");
    ResolvedConfig rc;
    if (cfg.contains("problem")) rc.problem = io::parse_problem(cfg.at("problem"), "$.problem");
    if (cfg.contains("grid")) rc.grid = io::parse_grid(cfg.at("grid"), "$.grid");
    if (cfg.contains("quadrature"))
        rc.quadrature = io::parse_quadrature(cfg.at("quadrature"), "$.quadrature");
    if (cfg.contains("solver")) rc.solver = io::parse_solver(cfg.at("solver"), "$.solver");
    if (cfg.contains("exterior")) rc.exterior = io::parse_exterior(cfg.at("exterior"), "$.exterior");
    rc.seed = io::get_or<std::uint64_t>(cfg, "seed", 0);
    std::string block_key = command;
    for (char& ch : block_key)
        if (ch == '-') ch = '_';
    if (cfg.contains(block_key)) rc.command_block = cfg.at(block_key);
    if (rc.command_block.is_null()) rc.command_block = json::object();

    rc.echo = json::object();
    rc.echo["problem"] = io::problem_json(rc.problem);
    rc.echo["grid"] = io::grid_json(rc.grid);
    rc.echo["quadrature"] = io::quadrature_json(rc.quadrature);
    rc.echo["solver"] = io::solver_json(rc.solver);
    rc.echo["exterior"] = io::exterior_json(rc.exterior);
    rc.echo["seed"] = rc.seed;
    rc.echo[block_key] = rc.command_block;
    return rc;
}

namespace detail {

inline json solve_summary(const SolveReport& r) {
    json j;
    j["status"] = to_string(r.status);
    j["iterations"] = r.iterations;
    j["max_monotonicity_violation"] = r.max_violation;
    j["sandwich_lo"] = r.sandwich_lo;
    j["sandwich_hi"] = r.sandwich_hi;
    j["max_linear_residual"] = r.max_linear_residual;
    j["condition_estimate"] = r.condition;
    j["capped_evaluations"] = r.capped_evaluations;
    j["center_value"] = r.value_at(0.0);
    return j;
}

inline std::function<ExteriorData(double)> constant_family(const ExteriorData& e) {
    return [e](double) { return e; };
}

}  // namespace detail

inline CommandResult run_command(const std::string& command, const json& cfg) {
    ResolvedConfig rc = resolve_config(command, cfg);
    CommandResult out;
    json& rep = out.report;
    rep["command"] = command;
    rep["config"] = rc.echo;
    json results;
    json diagnostics;
    diagnostics["warnings"] = json::array();
    std::string status = "ok";

    const ProblemSpec& prob = rc.problem;
    const QuadratureOptions& q = rc.quadrature;

    if (command == "classify") {
        io::check_keys(rc.command_block, {}, "$.classify");
        const RegimeReport r = classify_regime(prob);
        results["regime"] = to_string(r.regime);
        results["p_used"] = r.p_used;
        if (r.beta) results["beta"] = *r.beta;
        if (r.growth_exponent) results["growth_exponent"] = *r.growth_exponent;
        if (r.beta_undefined_p_equals_one) results["beta_undefined"] = "denominator 1-p vanishes";
    } else if (command == "eval-op") {
        io::check_keys(rc.command_block, {"target", "x", "value", "beta", "amplitude"},
                       "$.eval_op");
        const std::string target = io::get_or<std::string>(rc.command_block, "target", "constant");
        const double x = io::get_or(rc.command_block, "x", 0.0);
        Estimate e;
        if (target == "constant") {
            const double v = io::get_or(rc.command_block, "value", 1.0);
            e = evaluate_L_radial(prob.kernel, [v](double) { return v; }, power_tail(v, 0.0),
                                  std::abs(x), q, q.t_cut);
        } else if (target == "barrier") {
            BarrierSpec b{io::get_or(rc.command_block, "beta", 1.0),
                          io::get_or(rc.command_block, "amplitude", 1.0), BarrierKind::super};
            e = evaluate_L_radial(prob.kernel, [&](double r) { return b.value(r); }, b.tail(),
                                  std::abs(x), q, q.t_cut);
        } else if (target == "power") {
            const double beta = io::get_or(rc.command_block, "beta", 0.5);
            const double A = io::get_or(rc.command_block, "amplitude", 1.0);
            e = evaluate_L_radial(prob.kernel, [=](double r) { return A * std::pow(r, beta); },
                                  growth_tail(A, beta), std::abs(x), q, q.t_cut, {std::abs(x)});
        } else {
            throw std::runtime_error("eval-op: target must be constant|barrier|power");
        }
        double v = e.value;
        if (prob.convention == Convention::fractional) v = -v;
        results["value"] = v;
        results["error_estimate"] = e.error;
        results["convention"] = to_string(prob.convention);
        if (e.degraded) {
            diagnostics["warnings"].push_back("quadrature failed to reach target_rel_tol");
            status = "degraded";
        }
    } else if (command == "power-solution") {
        io::check_keys(rc.command_block, {"r_lo", "r_hi", "samples"}, "$.power_solution");
        const PowerSolution sol = build_power_solution(prob, q);
        const double r_lo = io::get_or(rc.command_block, "r_lo", 0.5);
        const double r_hi = io::get_or(rc.command_block, "r_hi", 4.0);
        const int samples = io::get_or(rc.command_block, "samples", 17);
        const ResidualScan scan = residual_scan(prob, sol, r_lo, r_hi, samples, q);
        results["beta"] = sol.beta;
        results["amplitude"] = sol.amplitude;
        results["C_fractional"] = sol.c_fractional;
        results["eigen_constant"] = sol.eigen_constant;
        results["convention"] = to_string(sol.convention);
        results["max_relative_residual"] = scan.max_relative;
        out.tables.push_back({"residual_scan.csv", {"r", "lhs", "rhs"},
                              {scan.radii, scan.lhs, scan.rhs}});
    } else if (command == "verify-barriers") {
        io::check_keys(rc.command_block, {"beta", "super_sweep", "sub_sweep"}, "$.verify_barriers");
        const RegimeReport reg = classify_regime(prob);
        double beta = io::get_or(rc.command_block, "beta", reg.beta ? *reg.beta : 1.0);
        std::vector<double> super_sweep =
            io::get_or<std::vector<double>>(rc.command_block, "super_sweep",
                                            {1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6});
        std::vector<double> sub_sweep = io::get_or<std::vector<double>>(
            rc.command_block, "sub_sweep", {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0});
        const std::vector<double> radii = default_audit_radii();

        const AmplitudeSearch sup_s =
            amplitude_search(prob, beta, BarrierKind::super, super_sweep, radii, q);
        const AmplitudeSearch sub_s =
            amplitude_search(prob, beta, BarrierKind::sub, sub_sweep, radii, q);
        auto search_json = [](const AmplitudeSearch& s) {
            json j;
            j["found"] = s.found;
            if (s.found)
                j["amplitude"] = s.amplitude;
            else {
                j["worst_radius"] = s.worst_radius;
                j["worst_margin"] = s.worst_margin;
            }
            return j;
        };
        results["super_search"] = search_json(sup_s);
        results["sub_search"] = search_json(sub_s);

        const BarrierSpec bsup{beta, sup_s.found ? sup_s.amplitude : super_sweep.back(),
                               BarrierKind::super};
        const BarrierSpec bsub{beta, sub_s.found ? sub_s.amplitude : sub_sweep.front(),
                               BarrierKind::sub};
        const MarginTable msup = inequality_scan(prob, bsup, radii, q);
        const MarginTable msub = inequality_scan(prob, bsub, radii, q);
        auto table_json = [](const MarginTable& m) {
            json j;
            j["min_margin"] = m.min_margin;
            j["worst_radius"] = m.worst_radius;
            j["violations"] = m.violation_radii;
            return j;
        };
        results["super_table"] = table_json(msup);
        results["sub_table"] = table_json(msub);
        results["super_amplitude_used"] = bsup.amplitude;
        results["sub_amplitude_used"] = bsub.amplitude;
        out.tables.push_back({"margins_super.csv", {"r", "lhs", "rhs", "margin"},
                              {msup.radii, msup.lhs, msup.rhs, msup.margin}});
        out.tables.push_back({"margins_sub.csv", {"r", "lhs", "rhs", "margin"},
                              {msub.radii, msub.lhs, msub.rhs, msub.margin}});

        const ExponentAudit ea = exponent_audit(prob, beta, q);
        json je;
        je["lhs_slope"] = ea.lhs_slope;
        je["rhs_slope"] = ea.rhs_slope;
        je["match1_lhs"] = ea.match1_lhs;
        je["match1_rhs"] = ea.match1_rhs;
        je["claimed_identity_holds"] = ea.claimed_identity_holds;
        je["tail_dominated"] = ea.tail_dominated;
        results["exponent_audit"] = je;

        const DecayBoundAudit da = decay_bound_audit(prob.kernel, beta, 1.0, radii, q);
        json jd;
        jd["scaled_sup"] = da.scaled_sup;
        jd["scaled_max_over_min"] = da.scaled_max_over_min;
        jd["fitted_slope"] = da.fitted_slope;
        jd["tail_dominated"] = da.tail_dominated;
        results["decay_bound_audit"] = jd;
    } else if (command == "solve-ball") {
        io::check_keys(rc.command_block, {}, "$.solve_ball");
        const SolveReport r = monotone_iterate(prob, rc.grid, rc.exterior, rc.solver, q);
        results = detail::solve_summary(r);
        const double margin = rc.exterior.sandwich_margin(rc.grid.R);
        if (margin < 0.0)
            diagnostics["warnings"].push_back("exterior data violates its declared envelope");
        std::vector<double> g = gradient_on_grid(r.nodes, r.values);
        out.tables.push_back({"solution.csv", {"r", "u", "grad_u"}, {r.nodes, r.values, g}});
        std::vector<double> iters(r.residual_history.size());
        for (std::size_t i = 0; i < iters.size(); ++i) iters[i] = static_cast<double>(i + 1);
        out.tables.push_back({"history.csv", {"iter", "residual", "monotonicity_violation"},
                              {iters, r.residual_history, r.monotonicity_violation}});
        if (r.status == SolveStatus::Diverged) status = "failed";
    } else if (command == "exhaust") {
        io::check_keys(rc.command_block, {"R_list"}, "$.exhaust");
        const std::vector<double> R_list = io::get_or<std::vector<double>>(
            rc.command_block, "R_list", {4.0, 8.0, 16.0, 32.0});
        const ExhaustReport ex =
            exhaust(prob, R_list, detail::constant_family(rc.exterior), rc.grid, rc.solver, q);
        json runs = json::array();
        for (const SolveReport& r : ex.runs) runs.push_back(detail::solve_summary(r));
        results["runs"] = runs;
        results["core_diffs"] = ex.core_diffs;
        results["aborted"] = ex.aborted;
        if (!ex.aborted && !ex.runs.empty()) {
            const RegimeReport reg = classify_regime(prob);
            const double beta_exp = reg.beta ? *reg.beta : 0.0;
            const SolveReport& last = ex.runs.back();
            const double R = R_list[ex.runs.size() - 1];
            const DecayFit f = last.radial ? decay_fit(*last.radial, R / 4.0, R / 2.0, beta_exp)
                                           : decay_fit(*last.linef, R / 4.0, R / 2.0, beta_exp);
            results["decay_fit"] = {{"slope", f.slope},
                                    {"expected", f.expected},
                                    {"rel_error", f.rel_error},
                                    {"samples", f.samples}};
            std::vector<double> g = gradient_on_grid(last.nodes, last.values);
            out.tables.push_back(
                {"final_solution.csv", {"r", "u", "grad_u"}, {last.nodes, last.values, g}});
        }
        {
            std::vector<double> rr(ex.core_diffs.size());
            for (std::size_t i = 0; i < rr.size(); ++i) rr[i] = R_list[i + 1];
            out.tables.push_back({"core_diffs.csv", {"R", "core_diff"}, {rr, ex.core_diffs}});
        }
        if (ex.aborted) status = "failed";
    } else if (command == "moving-plane") {
        io::check_keys(rc.command_block, {"lambdas", "narrow_deltas", "narrow_lambda"},
                       "$.moving_plane");
        if (rc.grid.mode != GridMode::line)
            throw std::runtime_error("moving-plane requires a line-mode grid");
        const std::vector<double> lambdas = io::get_or<std::vector<double>>(
            rc.command_block, "lambdas", {-2.0, -1.0, -0.5});
        const std::vector<double> deltas = io::get_or<std::vector<double>>(
            rc.command_block, "narrow_deltas", {0.1, 0.2, 0.5});
        const double nl = io::get_or(rc.command_block, "narrow_lambda", -1.0);
        const SolveReport r = monotone_iterate(prob, rc.grid, rc.exterior, rc.solver, q);
        results["solve"] = detail::solve_summary(r);
        json gaps = json::array();
        std::vector<double> col_l, col_g;
        for (double l : lambdas) {
            const MovingPlaneGap g = moving_plane_gap(*r.linef, l);
            gaps.push_back({{"lambda", l}, {"min_gap", g.min_gap}, {"argmin", g.argmin}});
            col_l.push_back(l);
            col_g.push_back(g.min_gap);
        }
        results["moving_plane_gaps"] = gaps;
        json slabs = json::array();
        std::vector<double> col_d, col_s;
        for (double d : deltas) {
            const MovingPlaneGap g = narrow_region_probe(*r.linef, nl, d);
            slabs.push_back({{"delta", d}, {"min_gap", g.min_gap}, {"argmin", g.argmin}});
            col_d.push_back(d);
            col_s.push_back(g.min_gap);
        }
        results["narrow_region"] = slabs;
        out.tables.push_back({"moving_plane.csv", {"lambda", "min_gap"}, {col_l, col_g}});
        out.tables.push_back({"narrow_region.csv", {"delta", "min_gap"}, {col_d, col_s}});
    } else if (command == "bernstein") {
        io::check_keys(rc.command_block, {"R_list"}, "$.bernstein");
        const std::vector<double> R_list =
            io::get_or<std::vector<double>>(rc.command_block, "R_list", {2.0, 4.0, 8.0, 16.0});
        std::map<double, SolveReport> sols;
        for (double R : R_list) {
            GridSpec g = rc.grid;
            g.R = 2.0 * R;  // solutions live on B_{2R}
            sols.emplace(R, monotone_iterate(prob, g, rc.exterior, rc.solver, q));
        }
        const std::vector<BernsteinRow> rows = bernstein_scan(
            prob, [&](double R) -> const SolveReport& { return sols.at(R); }, R_list);
        json jr = json::array();
        std::vector<double> cR, cM, cx, clhs, csc;
        double mx = 0.0, mn = std::numeric_limits<double>::infinity();
        for (const BernsteinRow& row : rows) {
            jr.push_back({{"R", row.R},
                          {"M_R", row.M_R},
                          {"x_R", row.x_R},
                          {"x_in_ball", row.x_in_ball},
                          {"lhs", row.lhs},
                          {"scaled", row.scaled}});
            if (!row.x_in_ball)
                diagnostics["warnings"].push_back("F_R argmax left B_R at R=" +
                                                  std::to_string(row.R));
            cR.push_back(row.R);
            cM.push_back(row.M_R);
            cx.push_back(row.x_R);
            clhs.push_back(row.lhs);
            csc.push_back(row.scaled);
            mx = std::max(mx, row.scaled);
            mn = std::min(mn, row.scaled);
        }
        results["rows"] = jr;
        results["scaled_max_over_min"] = mn > 0.0 ? mx / mn : 0.0;
        out.tables.push_back(
            {"bernstein.csv", {"R", "M_R", "x_R", "lhs", "scaled"}, {cR, cM, cx, clhs, csc}});
    } else if (command == "liouville-demo") {
        io::check_keys(rc.command_block, {"R_list"}, "$.liouville_demo");
        const std::vector<double> R_list = io::get_or<std::vector<double>>(
            rc.command_block, "R_list", {4.0, 8.0, 16.0, 32.0});
        const LiouvilleTrend tr = liouville_trend(prob, R_list,
                                                  detail::constant_family(rc.exterior), rc.grid,
                                                  rc.solver, q);
        results["regime"] = to_string(tr.regime);
        results["theta"] = tr.theta;
        results["sup_grad"] = tr.sup_grad;
        out.tables.push_back({"liouville.csv", {"R", "sup_grad"}, {tr.R_list, tr.sup_grad}});
    } else if (command == "decay-fit") {
        io::check_keys(rc.command_block, {"r_lo", "r_hi"}, "$.decay_fit");
        const SolveReport r = monotone_iterate(prob, rc.grid, rc.exterior, rc.solver, q);
        const double r_lo = io::get_or(rc.command_block, "r_lo", rc.grid.R / 4.0);
        const double r_hi = io::get_or(rc.command_block, "r_hi", rc.grid.R / 2.0);
        const RegimeReport reg = classify_regime(prob);
        const double beta_exp = reg.beta ? *reg.beta : 0.0;
        const DecayFit f = r.radial ? decay_fit(*r.radial, r_lo, r_hi, beta_exp)
                                    : decay_fit(*r.linef, r_lo, r_hi, beta_exp);
        results["slope"] = f.slope;
        results["expected"] = f.expected;
        results["rel_error"] = f.rel_error;
        results["samples"] = f.samples;
        results["solve"] = detail::solve_summary(r);
    } else if (command == "uniqueness") {
        io::check_keys(rc.command_block, {"R_list", "normalization", "mod_amp"}, "$.uniqueness");
        const std::vector<double> R_list =
            io::get_or<std::vector<double>>(rc.command_block, "R_list", {8.0, 16.0, 32.0});
        const double norm_a = io::get_or(rc.command_block, "normalization", 1e-3);
        const double amp = io::get_or(rc.command_block, "mod_amp", 0.3);
        ExteriorData e2 = rc.exterior;
        e2.modulate = [amp](double x) { return 1.0 + amp * std::exp(-std::abs(x)); };
        const UniquenessProbe up =
            uniqueness_probe(prob, norm_a, detail::constant_family(rc.exterior),
                             detail::constant_family(e2), R_list, rc.grid, rc.solver, q);
        results["R_list"] = up.R_list;
        results["discrepancy"] = up.discrepancy;
        out.tables.push_back({"uniqueness.csv", {"R", "discrepancy"}, {up.R_list, up.discrepancy}});
    } else if (command == "selftest") {
        io::check_keys(rc.command_block, {}, "$.selftest");
        json cases = json::array();
        int failures = 0;
        auto record = [&](const std::string& name, bool ok, double got, double want) {
            cases.push_back({{"name", name}, {"pass", ok}, {"got", got}, {"want", want}});
            if (!ok) ++failures;
        };
        {  // constants annihilated
            const KernelSpec k = make_kernel(1, 0.5, Normalization::fractional);
            const Estimate e = evaluate_L_radial(k, [](double) { return 7.0; },
                                                 power_tail(7.0, 0.0), 1.0, q, 4.0);
            record("L(const)=0", std::abs(e.value) <= 1e-10, e.value, 0.0);
        }
        {  // kernel density at t=1 is the modulation value
            const KernelSpec k = make_kernel(2, 0.75);
            record("kernel_density(1)=1", std::abs(kernel_density(k, 1.0) - 1.0) <= 1e-14,
                   kernel_density(k, 1.0), 1.0);
        }
        {  // classification formula
            ProblemSpec p;
            p.kernel = make_kernel(1, 0.5);
            p.G = single_power(1.0, 0.5);
            p.gamma = 0.2;
            const RegimeReport r = classify_regime(p);
            record("classify beta=1.4", r.beta && std::abs(*r.beta - 1.4) <= 1e-12,
                   r.beta ? *r.beta : -1.0, 1.4);
        }
        {  // barrier closed forms
            const BarrierSpec b{1.0, 2.0, BarrierKind::super};
            record("barrier grad at |x|=1", std::abs(b.gradient_norm(1.0) - 1.0) <= 1e-14,
                   b.gradient_norm(1.0), 1.0);
        }
        {  // seeded random bump maximum principle (small suite)
            std::mt19937_64 rng(rc.seed);
            std::uniform_real_distribution<double> U(0.0, 1.0);
            const KernelSpec k = make_kernel(1, 0.5, Normalization::fractional);
            bool all = true;
            double worst = -1e300;
            for (int c = 0; c < 10; ++c) {
                const double ctr = -2.0 + 4.0 * U(rng), wid = 0.3 + 1.2 * U(rng),
                             amp = 0.2 + 2.0 * U(rng);
                auto f = [=](double x) { return amp * sq(smoothstep_cutoff((x - ctr) / wid)); };
                std::vector<double> gs;
                for (int i = 0; i <= 800; ++i) gs.push_back(-8.0 + 16.0 * i / 800.0);
                const MaxPrincipleResult r =
                    maximum_principle_probe(k, f, gs, q, std::abs(ctr) + 2.0 * wid);
                worst = std::max(worst, r.value_at_argmax);
                if (r.value_at_argmax > 1e-8 * amp) all = false;
            }
            record("maximum principle bumps", all, worst, 0.0);
        }
        results["cases"] = cases;
        results["failures"] = failures;
        if (failures > 0) status = "failed";
    } else {
        throw std::runtime_error("unknown command: " + command);
    }

    rep["results"] = results;
    rep["diagnostics"] = diagnostics;
    rep["status"] = status;
    out.exit_code = status == "ok" ? 0 : (status == "degraded" ? 2 : 1);
    return out;
}

/// Execute and write report.json plus CSV tables; nothing is written when the
/// command throws (no partial files on failure).
inline int run_and_write(const std::string& command, const json& cfg,
                         const std::filesystem::path& outdir, bool overwrite = true) {
    const CommandResult r = run_command(command, cfg);
    std::filesystem::create_directories(outdir);
    io::emit_json(outdir / "report.json", r.report, overwrite);
    for (const auto& [name, header, cols] : r.tables)
        io::emit_csv(outdir / name, header, cols, overwrite);
    return r.exit_code;
}

}  // namespace nll::run
