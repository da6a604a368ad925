#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nll/qualitative.hpp"

namespace nll::io {

using json = nlohmann::ordered_json;

/// Reject unknown keys with the offending location, so config typos surface
/// instead of silently running defaults.
inline void check_keys(const json& o, const std::set<std::string>& allowed,
                       const std::string& path) {
    if (!o.is_object()) throw std::runtime_error("config: expected object at " + path);
    for (const auto& [k, v] : o.items())
        if (!allowed.count(k))
            throw std::runtime_error("config: unknown key '" + k + "' at " + path);
}

template <class T>
T get_or(const json& o, const char* key, T fallback) {
    if (o.contains(key)) return o.at(key).get<T>();
    return fallback;
}

// --- parsing ------------------------------------------------------------

inline KernelSpec parse_kernel(const json& j, const std::string& path) {
    check_keys(j, {"n", "s", "lambda", "Lambda", "normalization"}, path);
    KernelSpec k;
    k.n = get_or(j, "n", 1);
    k.s = get_or(j, "s", 0.5);
    const std::string norm = get_or<std::string>(j, "normalization", "raw");
    if (norm == "raw")
        k.normalization = Normalization::raw;
    else if (norm == "fractional")
        k.normalization = Normalization::fractional;
    else
        throw std::runtime_error("config: normalization must be raw|fractional at " + path);
    if (k.normalization == Normalization::fractional)
        k.lambda = k.Lambda = fractional_constant(k.n, k.s);
    k.lambda = get_or(j, "lambda", k.lambda);
    k.Lambda = get_or(j, "Lambda", k.Lambda);
    k.validate();
    return k;
}

inline json kernel_json(const KernelSpec& k) {
    json j;
    j["n"] = k.n;
    j["s"] = k.s;
    j["lambda"] = k.lambda;
    j["Lambda"] = k.Lambda;
    j["normalization"] = k.normalization == Normalization::fractional ? "fractional" : "raw";
    return j;
}

inline HSpec parse_H(const json& j, const std::string& path) {
    check_keys(j, {"family", "m", "H0", "M"}, path);
    HSpec h;
    const std::string fam = get_or<std::string>(j, "family", "polynomial");
    if (fam == "polynomial")
        h.family = HFamily::polynomial;
    else if (fam == "logarithmic")
        h.family = HFamily::logarithmic;
    else if (fam == "exponential")
        h.family = HFamily::exponential;
    else if (fam == "singular")
        h.family = HFamily::singular;
    else
        throw std::runtime_error("config: unknown H family at " + path);
    h.m = get_or(j, "m", 0.0);
    h.H0 = get_or(j, "H0", 1.0);
    h.M_upper = get_or(j, "M", 1.0);
    h.validate();
    return h;
}

inline json H_json(const HSpec& h) {
    json j;
    switch (h.family) {
        case HFamily::polynomial: j["family"] = "polynomial"; break;
        case HFamily::logarithmic: j["family"] = "logarithmic"; break;
        case HFamily::exponential: j["family"] = "exponential"; break;
        case HFamily::singular: j["family"] = "singular"; break;
    }
    j["m"] = h.m;
    j["H0"] = h.H0;
    j["M"] = h.M_upper;
    return j;
}

inline GSpec parse_G(const json& j, const std::string& path) {
    check_keys(j, {"terms"}, path);
    GSpec g;
    if (j.contains("terms"))
        for (const auto& t : j.at("terms")) {
            check_keys(t, {"coeff", "power"}, path + ".terms[]");
            g.terms.push_back({t.at("coeff").get<double>(), t.at("power").get<double>()});
        }
    g.validate();
    return g;
}

inline json G_json(const GSpec& g) {
    json terms = json::array();
    for (const auto& t : g.terms) terms.push_back({{"coeff", t.coeff}, {"power", t.power}});
    return json{{"terms", terms}};
}

inline ProblemSpec parse_problem(const json& j, const std::string& path) {
    check_keys(j, {"kernel", "H", "G", "gamma", "weight_regularization", "convention"}, path);
    ProblemSpec p;
    if (j.contains("kernel")) p.kernel = parse_kernel(j.at("kernel"), path + ".kernel");
    if (j.contains("H")) p.H = parse_H(j.at("H"), path + ".H");
    if (j.contains("G")) p.G = parse_G(j.at("G"), path + ".G");
    p.gamma = get_or(j, "gamma", 0.0);
    p.weight_regularization = get_or(j, "weight_regularization", 0.0);
    const std::string conv = get_or<std::string>(j, "convention", "generator");
    if (conv == "generator")
        p.convention = Convention::generator;
    else if (conv == "fractional")
        p.convention = Convention::fractional;
    else
        throw std::runtime_error("config: convention must be generator|fractional at " + path);
    p.validate();
    return p;
}

inline json problem_json(const ProblemSpec& p) {
    json j;
    j["kernel"] = kernel_json(p.kernel);
    j["H"] = H_json(p.H);
    j["G"] = G_json(p.G);
    j["gamma"] = p.gamma;
    j["weight_regularization"] = p.weight_regularization;
    j["convention"] = to_string(p.convention);
    return j;
}

inline GridSpec parse_grid(const json& j, const std::string& path) {
    check_keys(j, {"mode", "R", "M", "grade_inner", "grade_outer", "offset_origin"}, path);
    GridSpec g;
    const std::string mode = get_or<std::string>(j, "mode", "radial");
    if (mode == "radial")
        g.mode = GridMode::radial;
    else if (mode == "line")
        g.mode = GridMode::line;
    else
        throw std::runtime_error("config: grid mode must be radial|line at " + path);
    g.R = get_or(j, "R", 8.0);
    g.M = get_or(j, "M", 128);
    g.grade_inner = get_or(j, "grade_inner", 1.0);
    g.grade_outer = get_or(j, "grade_outer", 1.0);
    g.offset_origin = get_or(j, "offset_origin", false);
    g.validate();
    return g;
}

inline json grid_json(const GridSpec& g) {
    json j;
    j["mode"] = g.mode == GridMode::radial ? "radial" : "line";
    j["R"] = g.R;
    j["M"] = g.M;
    j["grade_inner"] = g.grade_inner;
    j["grade_outer"] = g.grade_outer;
    j["offset_origin"] = g.offset_origin;
    return j;
}

inline QuadratureOptions parse_quadrature(const json& j, const std::string& path) {
    check_keys(j,
               {"near_panels", "far_panels", "grading", "panel_order", "t_cut", "angular_nodes",
                "target_rel_tol"},
               path);
    QuadratureOptions q;
    q.near_panels = get_or(j, "near_panels", q.near_panels);
    q.far_panels = get_or(j, "far_panels", q.far_panels);
    q.grading = get_or(j, "grading", q.grading);
    q.panel_order = get_or(j, "panel_order", q.panel_order);
    q.t_cut = get_or(j, "t_cut", q.t_cut);
    q.angular_nodes = get_or(j, "angular_nodes", q.angular_nodes);
    q.target_rel_tol = get_or(j, "target_rel_tol", q.target_rel_tol);
    q.validate();
    return q;
}

inline json quadrature_json(const QuadratureOptions& q) {
    json j;
    j["near_panels"] = q.near_panels;
    j["far_panels"] = q.far_panels;
    j["grading"] = q.grading;
    j["panel_order"] = q.panel_order;
    j["t_cut"] = q.t_cut;
    j["angular_nodes"] = q.angular_nodes;
    j["target_rel_tol"] = q.target_rel_tol;
    return j;
}

inline SolverOptions parse_solver(const json& j, const std::string& path) {
    check_keys(j, {"max_iter", "tol", "underrelaxation", "g_cap", "cold_start_exterior"}, path);
    SolverOptions s;
    s.max_iter = get_or(j, "max_iter", s.max_iter);
    s.tol = get_or(j, "tol", s.tol);
    s.underrelaxation = get_or(j, "underrelaxation", s.underrelaxation);
    s.g_cap = get_or(j, "g_cap", s.g_cap);
    s.cold_start_exterior = get_or(j, "cold_start_exterior", s.cold_start_exterior);
    return s;
}

inline json solver_json(const SolverOptions& s) {
    json j;
    j["max_iter"] = s.max_iter;
    j["tol"] = s.tol;
    j["underrelaxation"] = s.underrelaxation;
    j["g_cap"] = s.g_cap;
    j["cold_start_exterior"] = s.cold_start_exterior;
    return j;
}

inline ExteriorData parse_exterior(const json& j, const std::string& path) {
    check_keys(j, {"c", "beta", "delta", "a_decl", "A_decl", "beta_decl"}, path);
    ExteriorData e;
    e.c = get_or(j, "c", 1.0);
    e.beta = get_or(j, "beta", 1.0);
    e.delta = get_or(j, "delta", 0.0);
    e.a_decl = get_or(j, "a_decl", 0.0);
    e.A_decl = get_or(j, "A_decl", 1e308);
    e.beta_decl = get_or(j, "beta_decl", e.beta);
    return e;
}

inline json exterior_json(const ExteriorData& e) {
    json j;
    j["c"] = e.c;
    j["beta"] = e.beta;
    j["delta"] = e.delta;
    j["a_decl"] = e.a_decl;
    j["A_decl"] = e.A_decl;
    j["beta_decl"] = e.beta_decl;
    return j;
}

// --- emission -------------------------------------------------------------

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// CSV with a header row and 17-significant-digit values.
inline void emit_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& columns, bool overwrite = true) {
    if (!overwrite && std::filesystem::exists(path))
        throw std::runtime_error("emit_csv: refusing to overwrite " + path.string());
    if (header.size() != columns.size())
        throw std::invalid_argument("emit_csv: header/column mismatch");
    std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& c : columns)
        if (c.size() != rows) throw std::invalid_argument("emit_csv: ragged columns");
    std::ofstream f(path);
    if (!f) throw std::runtime_error("emit_csv: cannot open " + path.string());
    for (std::size_t j = 0; j < header.size(); ++j)
        f << header[j] << (j + 1 < header.size() ? "," : "\n");
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < columns.size(); ++j)
            f << fmt17(columns[j][i]) << (j + 1 < columns.size() ? "," : "\n");
    if (!f) throw std::runtime_error("emit_csv: write failed for " + path.string());
}

inline void emit_json(const std::filesystem::path& path, const json& j, bool overwrite = true) {
    if (!overwrite && std::filesystem::exists(path))
        throw std::runtime_error("emit_json: refusing to overwrite " + path.string());
    std::ofstream f(path);
    if (!f) throw std::runtime_error("emit_json: cannot open " + path.string());
    f << j.dump(2) << "\n";
    if (!f) throw std::runtime_error("emit_json: write failed for " + path.string());
}

}  // namespace nll::io
