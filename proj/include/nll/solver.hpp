#pragma once

#include "nll/discrete.hpp"

namespace nll {

/// Second-order gradient samples on a (possibly nonuniform) grid:
/// central three-point formula in the interior, one-sided at the ends.
inline std::vector<double> gradient_on_grid(const std::vector<double>& x,
                                            const std::vector<double>& u) {
    const std::size_t m = x.size();
    if (m < 3 || u.size() != m)
        throw std::invalid_argument("gradient_on_grid: need >= 3 matching nodes");
    std::vector<double> g(m);
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double hm = x[i] - x[i - 1], hp = x[i + 1] - x[i];
        g[i] = (u[i + 1] * hm * hm - u[i - 1] * hp * hp + u[i] * (hp * hp - hm * hm)) /
               (hm * hp * (hm + hp));
    }
    {
        const double h0 = x[1] - x[0], h1 = x[2] - x[1];
        g[0] = -u[0] * (2.0 * h0 + h1) / (h0 * (h0 + h1)) + u[1] * (h0 + h1) / (h0 * h1) -
               u[2] * h0 / (h1 * (h0 + h1));
        const double hK = x[m - 1] - x[m - 2], hJ = x[m - 2] - x[m - 3];
        g[m - 1] = u[m - 1] * (2.0 * hK + hJ) / (hK * (hK + hJ)) -
                   u[m - 2] * (hK + hJ) / (hK * hJ) + u[m - 3] * hK / (hJ * (hK + hJ));
    }
    return g;
}

/// Discrete operator with a cached factorization of the generator matrix.
class FactoredOperator {
  public:
    explicit FactoredOperator(DiscreteOperator op) : op_(std::move(op)) {
        lu_ = DenseLU(op_.W, op_.nI());
        rcond_ = lu_.condition_estimate(op_.W);
    }

    const DiscreteOperator& op() const { return op_; }
    double condition() const { return rcond_; }

    /// Solve the linear Dirichlet problem (operator in `conv`) u = f with
    /// exterior data `ext`. Generator: W u = f - b; fractional: W u = -f - b.
    std::vector<double> solve(const std::vector<double>& f, const ExteriorData& ext,
                              Convention conv, double* algebraic_residual = nullptr) const {
        const int m = op_.nI();
        if (static_cast<int>(f.size()) != m) throw std::invalid_argument("linear_solve: size");
        const std::vector<double> b = op_.exterior_vector(ext);
        std::vector<double> rhs(m);
        for (int i = 0; i < m; ++i)
            rhs[i] = (conv == Convention::generator ? f[i] : -f[i]) - b[i];
        std::vector<double> u = rhs;
        lu_.solve(u);
        // one step of iterative refinement, then report the algebraic residual
        std::vector<double> r(m, 0.0);
        double rn = 0.0, sn = 0.0;
        for (int i = 0; i < m; ++i) {
            double acc = -rhs[i];
            const double* row = &op_.W[static_cast<std::size_t>(i) * m];
            for (int j = 0; j < m; ++j) acc += row[j] * u[j];
            r[i] = acc;
            sn = std::max(sn, std::abs(rhs[i]));
        }
        lu_.solve(r);
        for (int i = 0; i < m; ++i) u[i] -= r[i];
        for (int i = 0; i < m; ++i) {
            double acc = -rhs[i];
            const double* row = &op_.W[static_cast<std::size_t>(i) * m];
            for (int j = 0; j < m; ++j) acc += row[j] * u[j];
            rn = std::max(rn, std::abs(acc));
        }
        if (algebraic_residual) *algebraic_residual = rn / std::max(sn, 1e-300);
        return u;
    }

  private:
    DiscreteOperator op_;
    DenseLU lu_;
    double rcond_ = 0.0;
};

/// Standalone linear Dirichlet solve per the iteration's sub-problem.
inline std::vector<double> linear_solve(const DiscreteOperator& op, const std::vector<double>& f,
                                        const ExteriorData& ext,
                                        Convention conv = Convention::generator) {
    FactoredOperator fo(op);
    double res = 0.0;
    std::vector<double> u = fo.solve(f, ext, conv, &res);
    if (res > 1e-8) throw std::runtime_error("linear_solve: algebraic residual too large");
    return u;
}

enum class SolveStatus { Converged, NonConverged, Diverged };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "Converged";
        case SolveStatus::NonConverged: return "NonConverged";
        case SolveStatus::Diverged: return "Diverged";
    }
    return "?";
}

struct SolverOptions {
    int max_iter = 500;
    double tol = 1e-8;          // stop when sup increment < tol*(1+sup|u|)
    double underrelaxation = 1.0;
    double g_cap = 0.0;         // truncation G <= cap; 0 disables
    bool cold_start_exterior = false;  // start from the exterior profile, not aV
};

struct SolveReport {
    SolveStatus status = SolveStatus::NonConverged;
    int iterations = 0;
    std::vector<double> residual_history;       // sup|u^{k+1}-u^k| per step
    std::vector<double> monotonicity_violation; // max(0, max_i(u^k_i - u^{k+1}_i))
    double max_violation = 0.0;
    double sandwich_lo = 0.0;  // min(u - a_decl V)
    double sandwich_hi = 0.0;  // min(A_decl V - u)
    double max_linear_residual = 0.0;
    double condition = 0.0;
    long capped_evaluations = 0;
    std::vector<double> nodes;   // full grid
    std::vector<double> values;  // full nodal values incl. boundary
    std::optional<RadialFunction> radial;
    std::optional<LineFunction> linef;

    double value_at(double x) const {
        if (radial) return (*radial)(std::abs(x));
        return (*linef)(x);
    }
};

namespace detail {

/// Full nodal vector: interior unknowns plus boundary node values from ext.
inline std::vector<double> complete_nodal(const DiscreteOperator& op,
                                          const std::vector<double>& u,
                                          const ExteriorData& ext) {
    const bool line = op.spec.mode == GridMode::line;
    std::vector<double> full(op.nodes.size());
    for (std::size_t i = 0; i < op.nodes.size(); ++i) {
        const int ii = static_cast<int>(i);
        if (ii >= op.i_lo && ii <= op.i_hi)
            full[i] = u[ii - op.i_lo];
        else
            full[i] = line ? ext.value(op.nodes[i]) : ext.value(std::abs(op.nodes[i]));
    }
    return full;
}

inline void attach_final(SolveReport& rep, const DiscreteOperator& op,
                         const std::vector<double>& u, const ExteriorData& ext) {
    rep.nodes = op.nodes;
    rep.values = complete_nodal(op, u, ext);
    if (op.spec.mode == GridMode::line) {
        rep.linef = LineFunction(rep.nodes, rep.values, ext.tail_left(), ext.tail_right());
    } else {
        std::vector<double> g = rep.nodes, v = rep.values;
        if (g.front() > 0.0) {  // offset grid: prepend the origin, even extension
            g.insert(g.begin(), 0.0);
            v.insert(v.begin(), v.front());
        }
        rep.radial = RadialFunction(g, v, ext.tail_radial());
    }
}

}  // namespace detail

/// Monotone iteration of the frozen-coefficient scheme: u^(0) = aV, then
/// repeatedly solve the linear Dirichlet problem with the right-hand side
/// evaluated at the previous iterate (gradient by central differences).
/// Monotonicity and sandwich margins are observed and reported, not enforced.
inline SolveReport monotone_iterate(const ProblemSpec& prob, const GridSpec& grid,
                                    const ExteriorData& ext, const SolverOptions& so,
                                    const QuadratureOptions& q = {}) {
    prob.validate();
    if (!prob.H.nondecreasing())
        throw std::domain_error("monotone_iterate: singular H rejected (comparison needs H nondecreasing)");
    if (grid.mode == GridMode::radial && ext.delta != 0.0)
        throw std::domain_error("monotone_iterate: asymmetric exterior data needs a line grid");
    DiscreteOperator op = assemble_operator(prob.kernel, grid, q);
    FactoredOperator fo(std::move(op));
    const DiscreteOperator& dop = fo.op();
    const int m = dop.nI();
    const bool line = grid.mode == GridMode::line;

    SolveReport rep;
    rep.condition = fo.condition();
    std::vector<double> u(m);
    for (int i = 0; i < m; ++i) {
        const double x = dop.nodes[i + dop.i_lo];
        u[i] = so.cold_start_exterior ? (line ? ext.value(x) : ext.value(std::abs(x)))
                                      : ext.a_decl * ext.envelope(x);
    }

    double scale0 = 1.0;
    for (double v : u) scale0 = std::max(scale0, std::abs(v));
    std::vector<double> rel_window;
    const double om = so.underrelaxation;
    if (!(om > 0.0 && om <= 1.0))
        throw std::domain_error("monotone_iterate: underrelaxation must lie in (0,1]");
    for (int k = 0; k < so.max_iter; ++k) {
        const std::vector<double> full = detail::complete_nodal(dop, u, ext);
        const std::vector<double> grad = gradient_on_grid(dop.nodes, full);
        std::vector<double> f(m);
        for (int i = 0; i < m; ++i) {
            const double x = dop.nodes[i + dop.i_lo];
            double gv = eval_G(prob.G, grad[i + dop.i_lo]);
            if (so.g_cap > 0.0 && gv > so.g_cap) {
                gv = so.g_cap;
                ++rep.capped_evaluations;
            }
            f[i] = prob.weight(x) * eval_H(prob.H, std::max(full[i + dop.i_lo], 0.0)) * gv;
        }
        double lin_res = 0.0;
        std::vector<double> raw = fo.solve(f, ext, prob.convention, &lin_res);
        rep.max_linear_residual = std::max(rep.max_linear_residual, lin_res);
        std::vector<double> unew(m);
        double inc = 0.0, viol = 0.0, sup = 0.0;
        for (int i = 0; i < m; ++i) {
            unew[i] = (1.0 - om) * u[i] + om * raw[i];
            inc = std::max(inc, std::abs(unew[i] - u[i]));
            viol = std::max(viol, u[i] - unew[i]);
            sup = std::max(sup, std::abs(unew[i]));
        }
        rep.residual_history.push_back(inc);
        rep.monotonicity_violation.push_back(std::max(0.0, viol));
        rep.max_violation = std::max(rep.max_violation, std::max(0.0, viol));
        u = std::move(unew);
        rep.iterations = k + 1;
        if (inc < so.tol * (1.0 + sup)) {
            rep.status = SolveStatus::Converged;
            break;
        }
        // Divergence: non-finite values, runaway solution scale, or a step
        // exceeding the solution scale while 10x above its recent floor.
        // Bounded chaotic bands (which this iteration can settle into) are
        // NonConverged, not Diverged.
        bool blown = !std::isfinite(inc) || !std::isfinite(sup) || sup > 1e8 * scale0;
        const double rel = inc / (1.0 + sup);
        rel_window.push_back(rel);
        if (rel_window.size() > 25) rel_window.erase(rel_window.begin());
        const double rel_floor = *std::min_element(rel_window.begin(), rel_window.end());
        if (k > 5 && rel > 1.0 && rel > 10.0 * rel_floor) blown = true;
        if (blown) {
            rep.status = SolveStatus::Diverged;
            break;
        }
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
        const double x = dop.nodes[i + dop.i_lo];
        const double env = ext.envelope(x);
        lo = std::min(lo, u[i] - ext.a_decl * env);
        hi = std::min(hi, ext.A_decl * env - u[i]);
    }
    rep.sandwich_lo = lo;
    rep.sandwich_hi = hi;
    detail::attach_final(rep, dop, u, ext);
    return rep;
}

struct ExhaustReport {
    std::vector<double> R_list;
    std::vector<SolveReport> runs;
    std::vector<double> core_diffs;  // sup over B_2 of |u_{R_{j+1}} - u_{R_j}|
    bool aborted = false;
};

/// Solve on an increasing family of balls with exterior data from ext_family;
/// the grid node count is held fixed while R grows. A diverging member run
/// aborts with partial results.
inline ExhaustReport exhaust(const ProblemSpec& prob, const std::vector<double>& R_list,
                             const std::function<ExteriorData(double)>& ext_family,
                             const GridSpec& grid_template, const SolverOptions& so,
                             const QuadratureOptions& q = {}) {
    for (std::size_t i = 0; i + 1 < R_list.size(); ++i)
        if (!(R_list[i] < R_list[i + 1]))
            throw std::domain_error("exhaust: R_list must be increasing");
    if (!R_list.empty() && R_list.front() < 4.0)
        throw std::domain_error("exhaust: minimum ball radius is 4");
    ExhaustReport rep;
    rep.R_list = R_list;
    for (double R : R_list) {
        GridSpec g = grid_template;
        g.R = R;
        SolveReport run = monotone_iterate(prob, g, ext_family(R), so, q);
        const bool diverged = run.status == SolveStatus::Diverged;
        rep.runs.push_back(std::move(run));
        if (diverged) {
            rep.aborted = true;
            break;
        }
    }
    for (std::size_t j = 0; j + 1 < rep.runs.size(); ++j) {
        double d = 0.0;
        for (int i = 0; i <= 80; ++i) {
            const double x = -2.0 + 4.0 * i / 80.0;
            d = std::max(d, std::abs(rep.runs[j + 1].value_at(x) - rep.runs[j].value_at(x)));
        }
        rep.core_diffs.push_back(d);
    }
    return rep;
}

}  // namespace nll
