#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "lot/checks.hpp"
#include "lot/jko.hpp"

namespace lot {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Report serialization. Floats are written with 17 significant digits so
// reports diff bit-for-bit across runs; object keys keep insertion order.

namespace detail {

inline void json_escape(const std::string& s, std::string& out) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

inline void format_double(double v, std::string& out) {
    if (std::isnan(v)) {
        out += "\"nan\"";
        return;
    }
    if (std::isinf(v)) {
        out += v > 0 ? "\"inf\"" : "\"-inf\"";
        return;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

inline void dump_json(const json& j, std::string& out, int indent, int depth) {
    const std::string pad(std::size_t(indent) * std::size_t(depth), ' ');
    const std::string pad_in(std::size_t(indent) * std::size_t(depth + 1), ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in;
                json_escape(it.key(), out);
                out += ": ";
                dump_json(it.value(), out, indent, depth + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in;
                dump_json(v, out, indent, depth + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case json::value_t::string: json_escape(j.get<std::string>(), out); return;
        case json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; return;
        case json::value_t::number_integer: out += std::to_string(j.get<long long>()); return;
        case json::value_t::number_unsigned: out += std::to_string(j.get<unsigned long long>()); return;
        case json::value_t::number_float: format_double(j.get<double>(), out); return;
        default: out += "null"; return;
    }
}

}  // namespace detail

inline std::string dump_report_json(const json& j) {
    std::string out;
    detail::dump_json(j, out, 2, 0);
    out += "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Scenario files.

struct ScenarioSpec {
    std::size_t index = 0;  // position in the file; seeds derive from it
    std::string name;
    std::string kind;       // functional_check | ot_solve | potential_comparison | jko_check
    std::string certifies;  // traceability tag
    json payload;
};

struct ScenarioFile {
    std::string version;
    std::uint64_t seed = 0;
    double default_tol = 1e-6;
    std::vector<ScenarioSpec> scenarios;
};

namespace detail {

[[noreturn]] inline void fail_at(const std::string& path, const std::string& msg) {
    throw ValidationError(path + ": " + msg);
}

inline Vec require_vec(const json& j, const std::string& path, bool nonnegative = false) {
    if (!j.is_array() || j.empty()) fail_at(path, "expected a nonempty array of numbers");
    Vec v;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const auto& x = j[k];
        if (!x.is_number()) fail_at(path + "/" + std::to_string(k), "expected a number");
        double d = x.get<double>();
        if (!std::isfinite(d)) fail_at(path + "/" + std::to_string(k), "value must be finite");
        if (nonnegative && d < 0)
            fail_at(path + "/" + std::to_string(k), "negative entry in a nonnegative measure");
        v.push_back(d);
    }
    return v;
}

inline const json& require_field(const json& j, const char* key, const std::string& path) {
    if (!j.is_object() || !j.contains(key))
        fail_at(path, std::string("missing field '") + key + "'");
    return j.at(key);
}

inline double require_number(const json& j, const char* key, const std::string& path,
                             std::optional<double> fallback = {}) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        fail_at(path, std::string("missing field '") + key + "'");
    }
    if (!j[key].is_number()) fail_at(path + "/" + key, "expected a number");
    return j[key].get<double>();
}

inline EntropyFunction parse_entropy(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("type")) fail_at(path, "entropy needs a 'type'");
    std::string type = j.at("type").get<std::string>();
    double lambda = require_number(j, "lambda", path, 1.0);
    if (type == "kl") return kl_entropy(lambda);
    if (type == "quadratic") return quadratic_entropy(lambda);
    if (type == "square") return square_entropy(lambda);
    fail_at(path + "/type", "unknown entropy '" + type + "' (allowed: kl, quadratic, square)");
}

inline CostMatrix parse_cost(const json& j, const std::string& path,
                             std::optional<std::size_t> want_n = {},
                             std::optional<std::size_t> want_m = {}) {
    if (!j.is_object()) fail_at(path, "cost must be an object");
    CostMatrix C;
    if (j.contains("values")) {
        const auto& rows = j.at("values");
        if (!rows.is_array() || rows.empty()) fail_at(path + "/values", "expected a matrix");
        std::size_t m = 0;
        Vec flat;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            Vec row = require_vec(rows[i], path + "/values/" + std::to_string(i));
            if (i == 0)
                m = row.size();
            else if (row.size() != m)
                fail_at(path + "/values", "ragged matrix");
            flat.insert(flat.end(), row.begin(), row.end());
        }
        C = cost_from_values(make_space(rows.size()), make_space(m), std::move(flat));
    } else if (j.contains("csv")) {
        C = cost_from_csv(j.at("csv").get<std::string>());
    } else if (j.contains("ground")) {
        if (!j.contains("coords")) fail_at(path, "ground cost needs 'coords'");
        auto parse_coords = [&](const json& cj, const std::string& p) {
            std::vector<std::vector<double>> pts;
            for (std::size_t i = 0; i < cj.size(); ++i)
                pts.push_back(require_vec(cj[i], p + "/" + std::to_string(i)));
            return pts;
        };
        auto rows_pts = parse_coords(j.at("coords"), path + "/coords");
        auto cols_pts = j.contains("coords_cols") ? parse_coords(j.at("coords_cols"), path + "/coords_cols")
                                                  : rows_pts;
        C = ground_cost(make_space(rows_pts.size(), rows_pts),
                        make_space(cols_pts.size(), cols_pts), j.at("ground").get<std::string>(),
                        require_number(j, "q", path, 2.0));
    } else if (j.contains("constant")) {
        std::size_t n = std::size_t(require_number(j, "n", path));
        std::size_t m = std::size_t(require_number(j, "m", path, double(n)));
        C = constant_cost(make_space(n), make_space(m), j.at("constant").get<double>());
    } else {
        fail_at(path, "cost needs one of: values, csv, ground, constant");
    }
    if (want_n && C.n() != *want_n) fail_at(path, "cost row count does not match the source measure");
    if (want_m && C.m() != *want_m) fail_at(path, "cost column count does not match the target measure");
    return C;
}

// Descriptor -> Functional; the contract behind the scenario-file catalog.
inline Functional parse_functional(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("type")) fail_at(path, "functional needs a 'type'");
    const std::string type = j.at("type").get<std::string>();
    if (type == "quadratic") {
        const auto& rows = require_field(j, "A", path);
        Matrix A;
        for (std::size_t i = 0; i < rows.size(); ++i)
            A.push_back(require_vec(rows[i], path + "/A/" + std::to_string(i)));
        Vec b = j.contains("b") ? require_vec(j.at("b"), path + "/b") : Vec{};
        return quadratic_functional(A, b);
    }
    if (type == "convex_diff") {
        double p = require_number(j, "power", path, 2.0);
        if (p < 1) fail_at(path + "/power", "power must be >= 1 for convexity");
        std::size_t dim = std::size_t(require_number(j, "dim", path));
        std::size_t i = std::size_t(require_number(j, "i", path, 0.0));
        std::size_t k = std::size_t(require_number(j, "j", path, 1.0));
        return convex_diff_functional([p](double t) { return std::pow(std::abs(t), p); }, dim, i, k);
    }
    if (type == "concave_of_sum") {
        Vec w = require_vec(require_field(j, "weights", path), path + "/weights");
        std::string g = j.value("g", "neg_square");
        std::function<double(double)> fn;
        if (g == "neg_square")
            fn = [](double s) { return -s * s; };
        else if (g == "neg_exp")
            fn = [](double s) { return -std::exp(s); };
        else if (g == "square")
            fn = [](double s) { return s * s; };  // deliberately non-concave
        else
            fail_at(path + "/g", "unknown scalar '" + g + "'");
        return concave_of_sum_functional(std::move(fn), std::move(w));
    }
    if (type == "sup") return sup_coord_functional(std::size_t(require_number(j, "dim", path)));
    if (type == "dirichlet") {
        std::vector<Edge> edges;
        for (const auto& e : require_field(j, "edges", path)) {
            Vec t = require_vec(e, path + "/edges");
            if (t.size() != 3) fail_at(path + "/edges", "edge format is [i, j, w]");
            edges.push_back({std::size_t(t[0]), std::size_t(t[1]), t[2]});
        }
        return dirichlet_functional(std::size_t(require_number(j, "dim", path)), std::move(edges));
    }
    if (type == "gagliardo") {
        std::vector<Vec> pts;
        for (const auto& p : require_field(j, "points", path)) pts.push_back(require_vec(p, path + "/points"));
        return gagliardo_functional(pts, require_number(j, "s", path), require_number(j, "p", path));
    }
    if (type == "internal_energy")
        return internal_energy_functional(parse_entropy(require_field(j, "entropy", path), path + "/entropy"),
                                          require_vec(require_field(j, "m", path), path + "/m", true));
    if (type == "kl") return kl_divergence_functional(require_vec(require_field(j, "m", path), path + "/m", true));
    if (type == "linear") return linear_functional(require_vec(require_field(j, "mu", path), path + "/mu"));
    if (type == "indicator_box")
        return indicator_box_functional(require_vec(require_field(j, "lo", path), path + "/lo"),
                                        require_vec(require_field(j, "hi", path), path + "/hi"));
    if (type == "indicator_simplex")
        return indicator_simplex_functional(std::size_t(require_number(j, "dim", path)),
                                            require_number(j, "mass", path, 1.0));
    fail_at(path + "/type", "unknown functional '" + type +
                                "' (allowed: quadratic, convex_diff, concave_of_sum, sup, dirichlet, "
                                "gagliardo, internal_energy, kl, linear, indicator_box, "
                                "indicator_simplex)");
}

inline std::string default_tag(const std::string& kind, const json& payload) {
    if (kind == "functional_check") {
        std::string check = payload.value("check", "p_dominance");
        if (check == "p_dominance")
            return payload.contains("functional2") ? "p-dominance" : "submodularity";
        if (check == "q_dominance")
            return payload.contains("functional2") ? "q-dominance" : "substitutability";
        if (check == "cross_derivatives") return "cross-derivative-criterion";
        if (check == "totally_substitutable") return "total-substitutability";
        if (check == "argmin_dominance")
            return payload.value("mode", "P") == "P" ? "argmin-strong-set-order"
                                                     : "argmin-mass-shift-order";
        if (check == "conjugate_duality") return "conjugate-duality";
        return check;
    }
    if (kind == "ot_solve") return "strong-duality";
    if (kind == "potential_comparison") {
        std::string check = payload.value("check", "potential");
        if (check == "standard") return "standard-comparison";
        if (check == "max_principle") return "max-principle";
        if (check == "uot_full_support") return "uot-full-support-comparison";
        std::string prob = payload.value("problem", "exact");
        return prob + "-potential-comparison";
    }
    if (kind == "jko_check") {
        std::string check = payload.value("check", "step");
        if (check == "stationarity") return "jko-stationarity";
        if (check == "comparison") return "jko-order-preservation";
        if (check == "tv_contraction") return "jko-tv-contraction";
        if (check == "max_principle") return "jko-max-principle";
        return "jko-" + check;
    }
    return kind;
}

}  // namespace detail

// Parses and validates a scenario file; throws ValidationError with a
// JSON-pointer-style path on bad content.
inline ScenarioFile load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scenario file: " + path);
    json j;
    in >> j;  // nlohmann throws parse_error on bad JSON

    ScenarioFile file;
    if (!j.is_object()) detail::fail_at("/", "top level must be an object");
    file.version = j.value("version", "");
    if (file.version != "1") detail::fail_at("/version", "unrecognized version (expected \"1\")");
    file.seed = j.value("seed", 0ull);
    file.default_tol = j.value("tol", 1e-6);

    if (!j.contains("scenarios") || !j["scenarios"].is_array() || j["scenarios"].empty())
        detail::fail_at("/scenarios", "expected a nonempty array");
    static const std::vector<std::string> kinds = {"functional_check", "ot_solve",
                                                   "potential_comparison", "jko_check"};
    for (std::size_t idx = 0; idx < j["scenarios"].size(); ++idx) {
        const std::string base = "/scenarios/" + std::to_string(idx);
        const auto& sj = j["scenarios"][idx];
        if (!sj.is_object()) detail::fail_at(base, "scenario must be an object");
        ScenarioSpec spec;
        spec.index = idx;
        spec.kind = sj.value("kind", "");
        if (std::find(kinds.begin(), kinds.end(), spec.kind) == kinds.end())
            detail::fail_at(base + "/kind",
                            "unknown kind '" + spec.kind +
                                "' (allowed: functional_check, ot_solve, potential_comparison, "
                                "jko_check)");
        spec.name = sj.value("name", spec.kind + "-" + std::to_string(idx));
        spec.payload = sj;
        spec.certifies = sj.value("certifies", detail::default_tag(spec.kind, sj));

        // structural validation: measures nonnegative, costs parse, sizes line up
        auto check_measure = [&](const char* key, bool required) -> std::optional<std::size_t> {
            if (!sj.contains(key)) {
                if (required) detail::fail_at(base, std::string("missing field '") + key + "'");
                return {};
            }
            return detail::require_vec(sj.at(key), base + "/" + key, true).size();
        };
        if (spec.kind == "ot_solve" || spec.kind == "jko_check") {
            auto n = check_measure("mu", true);
            std::optional<std::size_t> m;
            if (spec.kind == "ot_solve")
                m = check_measure("nu", true);
            else
                m = check_measure("m", true);
            detail::parse_cost(detail::require_field(sj, "cost", base), base + "/cost", n, m);
            check_measure("mu2", false);
            check_measure("alpha", false);
            check_measure("beta", false);
        } else if (spec.kind == "potential_comparison") {
            auto n = check_measure("mu1", true);
            auto m = check_measure("nu", true);
            detail::parse_cost(detail::require_field(sj, "cost", base), base + "/cost", n, m);
            check_measure("mu2", spec.payload.value("check", "potential") != "uot_full_support");
            check_measure("eta", false);
        } else {
            detail::parse_functional(detail::require_field(sj, "functional", base), base + "/functional");
            if (sj.contains("functional2"))
                detail::parse_functional(sj.at("functional2"), base + "/functional2");
        }
        file.scenarios.push_back(std::move(spec));
    }
    return file;
}

// ---------------------------------------------------------------------------
// Scenario execution.

struct ScenarioResult {
    std::size_t index = 0;
    std::string name, kind, certifies;
    std::string status;  // pass | fail | not_applicable | inconclusive | error
    json details;        // residuals, witnesses, recorded defaults
    double time_ms = 0;

    bool applicable() const { return status == "pass" || status == "fail" || status == "error"; }
    bool passed() const { return status == "pass"; }
};

namespace detail {

inline json report_from_check(const CheckReport& rep) {
    json d;
    d["passed"] = rep.passed;
    d["n_trials"] = rep.n_trials;
    d["n_skipped"] = rep.n_skipped;
    d["worst_violation"] = rep.worst_violation;
    d["tolerance"] = rep.tolerance;
    d["exhaustive"] = rep.exhaustive;
    if (!rep.note.empty()) d["note"] = rep.note;
    if (rep.witness) {
        json w = json::array();
        for (const auto& v : *rep.witness) w.push_back(v);
        d["witness"] = w;
    }
    return d;
}

inline ScenarioResult run_functional_check(const ScenarioSpec& spec, std::uint64_t seed,
                                           double default_tol) {
    const json& p = spec.payload;
    const std::string base = "payload";
    Functional F1 = parse_functional(require_field(p, "functional", base), base + "/functional");
    Functional F2 = p.contains("functional2") ? parse_functional(p.at("functional2"), base + "/functional2")
                                              : F1;
    const std::string check = p.value("check", "p_dominance");
    const double tol = p.value("tol", default_tol);
    const long n_trials = p.value("n_trials", 2000);
    Vec box_lo(F1.dim, -4.0), box_hi(F1.dim, 4.0);
    if (p.contains("box")) {
        Vec b = require_vec(p.at("box"), base + "/box");
        if (b.size() != 2) fail_at(base + "/box", "box format is [lo, hi]");
        box_lo.assign(F1.dim, b[0]);
        box_hi.assign(F1.dim, b[1]);
    }
    auto sampler = box_sampler(box_lo, box_hi);

    ScenarioResult out;
    CheckReport rep;
    if (check == "p_dominance") {
        rep = check_p_dominance(F1, F2, sampler, n_trials, tol, Rng(seed));
    } else if (check == "q_dominance") {
        QSearchConfig qc;
        qc.levels = p.value("levels", 32);
        rep = check_q_dominance(F1, F2, sampler, qc, tol, Rng(seed), p.value("n_pairs", 60));
    } else if (check == "totally_substitutable") {
        rep = check_totally_substitutable(F1, sampler, n_trials, tol, Rng(seed));
    } else if (check == "cross_derivatives") {
        std::vector<Vec> pts;
        if (p.contains("points"))
            for (const auto& pt : p.at("points")) pts.push_back(require_vec(pt, base + "/points"));
        else {
            Rng rng(seed);
            for (int k = 0; k < 8; ++k) pts.push_back(sampler(rng));
        }
        rep = check_cross_derivatives(F1, pts, p.value("step", 1e-4), tol);
    } else if (check == "argmin_dominance") {
        GridSpec g = GridSpec::cube(F1.dim, p.value("grid_lo", -2.0), p.value("grid_hi", 2.0),
                                    p.value("levels", 9));
        DominanceMode mode = p.value("mode", "P") == "P" ? DominanceMode::P : DominanceMode::Q;
        rep = check_argmin_dominance(mode, F1, F2, g, tol);
    } else if (check == "conjugate_duality") {
        GridSpec g = GridSpec::cube(F1.dim, p.value("grid_lo", -3.0), p.value("grid_hi", 3.0),
                                    p.value("levels", 41));
        DualityCheckConfig cfg;
        cfg.n_pairs_p = p.value("n_pairs_p", 2000);
        cfg.n_pairs_q = p.value("n_pairs_q", 25);
        cfg.q.levels = p.value("q_levels", 17);
        cfg.tol_p = p.value("tol_p", 1e-9);
        cfg.tol_q = p.value("tol_q", 0.05);
        auto verdict = verify_conjugate_duality(F1, g, cfg, Rng(seed));
        out.details["primal"] = report_from_check(verdict.primal);
        out.details["dual"] = report_from_check(verdict.dual);
        out.details["boundary_fraction"] = verdict.boundary_fraction;
        out.status = verdict.agree ? "pass" : "fail";
        return out;
    } else {
        fail_at(base + "/check", "unknown functional check '" + check + "'");
    }
    out.details = report_from_check(rep);
    out.status = rep.passed ? "pass" : "fail";
    return out;
}

inline ScenarioResult run_ot_solve(const ScenarioSpec& spec, double default_tol) {
    const json& p = spec.payload;
    const std::string base = "payload";
    Vec mu = require_vec(require_field(p, "mu", base), base + "/mu", true);
    Vec nu = require_vec(require_field(p, "nu", base), base + "/nu", true);
    CostMatrix C = parse_cost(require_field(p, "cost", base), base + "/cost", mu.size(), nu.size());
    const std::string prob = p.value("problem", "exact");
    PositiveMeasure pmu(C.rows, mu), pnu(C.cols, nu);

    OtSolution sol;
    if (prob == "exact") {
        ExactOtConfig cfg;
        cfg.tol = p.value("tol", 1e-9);
        cfg.max_pivots = p.value("max_pivots", 0l);
        sol = solve_exact(pmu, pnu, C, cfg);
    } else if (prob == "entropic") {
        EntropicConfig cfg;
        cfg.tol = p.value("tol", 1e-10);
        cfg.max_iters = p.value("max_iters", cfg.max_iters);
        double eps = require_number(p, "epsilon", base);
        PositiveMeasure alpha(C.rows, p.contains("alpha") ? require_vec(p.at("alpha"), base + "/alpha", true)
                                                          : Vec(C.n(), 1.0 / double(C.n())));
        PositiveMeasure beta(C.cols, p.contains("beta") ? require_vec(p.at("beta"), base + "/beta", true)
                                                        : Vec(C.m(), 1.0 / double(C.m())));
        sol = solve_entropic(pmu, pnu, C, eps, alpha, beta, cfg);
    } else if (prob == "unbalanced") {
        UotConfig cfg;
        cfg.tol = p.value("tol", 1e-9);
        cfg.max_iters = p.value("max_iters", cfg.max_iters);
        UotProblem up{parse_entropy(p.value("h0", json{{"type", "kl"}}), base + "/h0"),
                      parse_entropy(p.value("h1", json{{"type", "kl"}}), base + "/h1")};
        sol = solve_unbalanced(pmu, pnu, C, up, cfg);
    } else {
        fail_at(base + "/problem", "unknown problem '" + prob + "'");
    }

    ScenarioResult out;
    out.details["primal"] = sol.primal;
    out.details["dual"] = sol.dual;
    out.details["gap"] = sol.gap;
    out.details["iterations"] = sol.iterations;
    out.details["phi"] = sol.phi.values();
    out.details["psi"] = sol.psi.values();
    out.details["plan"] = sol.plan.values;
    double max_gap = p.value("max_gap", prob == "unbalanced" ? 1e-5 : 1e-6);
    bool ok = std::abs(sol.gap) <= max_gap;
    if (p.contains("expect_cost")) {
        double want = p.at("expect_cost").get<double>();
        double ctol = p.value("cost_tol", default_tol);
        out.details["expect_cost"] = want;
        ok = ok && std::abs(sol.primal - want) <= ctol;
    }
    out.status = ok ? "pass" : "fail";
    return out;
}

inline ScenarioResult run_potential_comparison(const ScenarioSpec& spec, double default_tol) {
    const json& p = spec.payload;
    const std::string base = "payload";
    const std::string check = p.value("check", "potential");
    const std::string prob = p.value("problem", "exact");

    Vec mu1 = require_vec(require_field(p, "mu1", base), base + "/mu1", true);
    Vec nu = require_vec(require_field(p, "nu", base), base + "/nu", true);
    CostMatrix C = parse_cost(require_field(p, "cost", base), base + "/cost", mu1.size(), nu.size());
    const double tol = p.value("tol", prob == "unbalanced" ? 1e-5 : default_tol);

    ScenarioResult out;
    if (check == "uot_full_support") {
        UotProblem up{parse_entropy(p.value("h0", json{{"type", "kl"}}), base + "/h0"),
                      parse_entropy(p.value("h1", json{{"type", "kl"}}), base + "/h1")};
        UotConfig cfg;
        cfg.tol = p.value("solver_tol", 1e-9);
        double worst = 0;
        bool ok = verify_uot_full_support(PositiveMeasure(C.rows, mu1),
                                          PositiveMeasure(C.rows, require_vec(require_field(p, "eta", base), base + "/eta", true)),
                                          PositiveMeasure(C.cols, nu), C, up, cfg, tol, &worst);
        out.details["worst_violation"] = worst;
        out.details["tolerance"] = tol;
        out.status = ok ? "pass" : "fail";
        return out;
    }

    PotentialScenario s;
    s.name = spec.name;
    s.kind = prob == "exact" ? ProblemKind::exact
             : prob == "entropic" ? ProblemKind::entropic
                                  : ProblemKind::unbalanced;
    s.C = C;
    s.mu1 = PositiveMeasure(C.rows, mu1);
    s.mu2 = PositiveMeasure(C.rows, require_vec(require_field(p, "mu2", base), base + "/mu2", true));
    s.nu = PositiveMeasure(C.cols, nu);
    if (p.contains("U"))
        for (const auto& u : p.at("U")) s.U.push_back(u.get<std::size_t>());
    else
        for (std::size_t i = 0; i < C.n(); ++i) s.U.push_back(i);
    if (s.kind == ProblemKind::entropic) {
        s.epsilon = require_number(p, "epsilon", base);
        s.alpha = PositiveMeasure(C.rows, p.contains("alpha") ? require_vec(p.at("alpha"), base + "/alpha", true)
                                                              : Vec(C.n(), 1.0 / double(C.n())));
        s.beta = PositiveMeasure(C.cols, p.contains("beta") ? require_vec(p.at("beta"), base + "/beta", true)
                                                            : Vec(C.m(), 1.0 / double(C.m())));
        s.entropic_cfg.tol = p.value("solver_tol", 1e-11);
    }
    if (s.kind == ProblemKind::unbalanced) {
        s.uot = UotProblem{parse_entropy(p.value("h0", json{{"type", "kl"}}), base + "/h0"),
                           parse_entropy(p.value("h1", json{{"type", "kl"}}), base + "/h1")};
        s.uot_cfg.tol = p.value("solver_tol", 1e-9);
    }

    if (check == "potential") {
        auto v = verify_potential_comparison(s, tol);
        out.details["h1_ok"] = v.h1_ok;
        out.details["h2_ok"] = v.h2_ok;
        out.details["meet_optimal"] = v.meet_optimal;
        out.details["join_optimal"] = v.join_optimal;
        out.details["support_order_ok"] = v.support_order_ok;
        out.details["shift_applied"] = v.shift_applied;
        json res;
        for (const auto& [k, val] : v.residuals) res[k] = val;
        out.details["residuals"] = res;
        if (!v.note.empty()) out.details["note"] = v.note;
        out.status = !v.applicable ? "not_applicable" : v.passed ? "pass" : "fail";
    } else if (check == "standard") {
        ComparisonVerdict v;
        auto verdict = verify_standard_comparison(s, tol, {}, &v);
        out.details["shift_applied"] = v.shift_applied;
        out.status = verdict == Verdict::Pass ? "pass"
                     : verdict == Verdict::Fail ? "fail"
                                                : "inconclusive";
    } else if (check == "max_principle") {
        auto rep = verify_max_principle(s, tol, p.value("single_potential_form", false));
        out.details["max_gap"] = rep.max_gap;
        out.details["min_gap"] = rep.min_gap;
        if (!rep.note.empty()) out.details["note"] = rep.note;
        out.status = rep.verdict == Verdict::Pass ? "pass"
                     : rep.verdict == Verdict::Fail ? "fail"
                                                    : "inconclusive";
    } else {
        fail_at(base + "/check", "unknown comparison check '" + check + "'");
    }
    return out;
}

inline ScenarioResult run_jko_check(const ScenarioSpec& spec, double default_tol) {
    const json& p = spec.payload;
    const std::string base = "payload";
    const std::string check = p.value("check", "step");
    const std::string prob = p.value("problem", "exact");

    Vec mu = require_vec(require_field(p, "mu", base), base + "/mu", true);
    Vec mref = require_vec(require_field(p, "m", base), base + "/m", true);
    CostMatrix C = parse_cost(require_field(p, "cost", base), base + "/cost", mu.size(), mref.size());

    JkoConfig cfg;
    cfg.kind = prob == "exact" ? ProblemKind::exact
               : prob == "entropic" ? ProblemKind::entropic
                                    : ProblemKind::unbalanced;
    cfg.C = C;
    cfg.cost_scale = p.value("cost_scale", 1.0);
    cfg.f = parse_entropy(p.value("entropy", json{{"type", "kl"}}), base + "/entropy");
    cfg.m = PositiveMeasure(C.cols, mref);
    cfg.V = LatticeVector(C.cols, p.contains("V") ? require_vec(p.at("V"), base + "/V") : Vec(C.m(), 0.0));
    cfg.tol = p.value("solver_tol", cfg.kind == ProblemKind::unbalanced ? 1e-8 : 1e-9);
    cfg.steps = p.value("steps", 1);
    if (cfg.kind == ProblemKind::entropic) {
        cfg.epsilon = require_number(p, "epsilon", base);
        cfg.alpha = PositiveMeasure(C.rows, p.contains("alpha") ? require_vec(p.at("alpha"), base + "/alpha", true)
                                                                : Vec(C.n(), 1.0 / double(C.n())));
        cfg.beta = PositiveMeasure(C.cols, p.contains("beta") ? require_vec(p.at("beta"), base + "/beta", true)
                                                              : Vec(C.m(), 1.0 / double(C.m())));
    }
    if (cfg.kind == ProblemKind::unbalanced)
        cfg.uot = UotProblem{parse_entropy(p.value("h0", json{{"type", "kl"}}), base + "/h0"),
                             parse_entropy(p.value("h1", json{{"type", "kl"}}), base + "/h1")};

    const double tol = p.value("tol", default_tol);
    PositiveMeasure pmu(C.rows, mu);
    ScenarioResult out;

    if (check == "step" || check == "stationarity") {
        auto step = jko_step_full(pmu, cfg);
        out.details["nu"] = step.nu.values();
        out.details["objective"] = step.objective;
        out.details["inner_residual"] = step.inner_residual;
        bool ok = true;
        if (check == "stationarity") {
            double worst = linf_dist(step.nu.values(), mu);
            out.details["stationarity_gap"] = worst;
            ok = worst <= tol;
        } else if (p.contains("expect_nu")) {
            Vec want = require_vec(p.at("expect_nu"), base + "/expect_nu", true);
            ok = linf_dist(step.nu.values(), want) <= tol;
        }
        out.status = ok ? "pass" : "fail";
    } else if (check == "flow") {
        auto traj = jko_flow(pmu, cfg);
        out.details["objectives"] = traj.objectives;
        out.details["final"] = traj.measures.back().values();
        if (p.contains("trajectory_csv")) {
            std::ofstream csv(p.at("trajectory_csv").get<std::string>());
            csv << "step,atom,mass\n";
            char buf[64];
            for (std::size_t k = 0; k < traj.measures.size(); ++k)
                for (std::size_t j = 0; j < traj.measures[k].size(); ++j) {
                    std::snprintf(buf, sizeof buf, "%.17g", traj.measures[k][j]);
                    csv << k << "," << j << "," << buf << "\n";
                }
        }
        out.status = "pass";  // flows are diagnostic; objectives are recorded, not asserted
    } else if (check == "comparison") {
        PositiveMeasure mu2(C.rows, require_vec(require_field(p, "mu2", base), base + "/mu2", true));
        auto rep = verify_jko_comparison(pmu, mu2, cfg, tol);
        out.details = report_from_check(rep);
        out.status = rep.passed ? "pass" : "fail";
    } else if (check == "tv_contraction") {
        PositiveMeasure mu2(C.rows, require_vec(require_field(p, "mu2", base), base + "/mu2", true));
        auto rep = verify_tv_contraction(pmu, mu2, cfg, tol);
        out.details = report_from_check(rep);
        out.status = rep.passed ? "pass" : "fail";
    } else if (check == "max_principle") {
        auto rep = verify_jko_max_principle(pmu, require_number(p, "C0", base),
                                            require_number(p, "C1", base), cfg, tol);
        out.details = report_from_check(rep);
        out.status = rep.passed ? "pass" : "fail";
    } else {
        fail_at(base + "/check", "unknown jko check '" + check + "'");
    }
    return out;
}

}  // namespace detail

inline ScenarioResult run_scenario(const ScenarioSpec& spec, std::uint64_t seed, double default_tol) {
    ScenarioResult out;
    auto start = std::chrono::steady_clock::now();
    try {
        if (spec.kind == "functional_check")
            out = detail::run_functional_check(spec, seed, default_tol);
        else if (spec.kind == "ot_solve")
            out = detail::run_ot_solve(spec, default_tol);
        else if (spec.kind == "potential_comparison")
            out = detail::run_potential_comparison(spec, default_tol);
        else
            out = detail::run_jko_check(spec, default_tol);
    } catch (const SolverError& e) {
        out.status = "error";
        out.details["error"] = std::string("solver: ") + e.what();
    } catch (const Error& e) {
        out.status = "error";
        out.details["error"] = e.what();
    }
    out.index = spec.index;
    out.name = spec.name;
    out.kind = spec.kind;
    out.certifies = spec.certifies;
    out.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                      .count();
    return out;
}

struct SuiteReport {
    std::uint64_t seed = 0;
    std::vector<ScenarioResult> results;

    long n_pass() const {
        long k = 0;
        for (const auto& r : results) k += r.passed();
        return k;
    }
    long n_applicable() const {
        long k = 0;
        for (const auto& r : results) k += r.applicable();
        return k;
    }
    // exit contract: success iff every applicable scenario passes
    bool all_pass() const {
        for (const auto& r : results)
            if (r.applicable() && !r.passed()) return false;
        return true;
    }

    json to_json(bool with_timings) const {
        json j;
        j["version"] = "1";
        j["seed"] = seed;
        json env;
        env["float_digits"] = 17;
#if defined(__clang__)
        env["compiler"] = "clang";
#elif defined(__GNUC__)
        env["compiler"] = "gcc";
#else
        env["compiler"] = "other";
#endif
        env["pointer_bits"] = int(sizeof(void*) * 8);
        j["environment"] = env;
        json arr = json::array();
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            json e;
            e["index"] = r.index;
            e["name"] = r.name;
            e["kind"] = r.kind;
            e["certifies"] = r.certifies;
            e["status"] = r.status;
            e["details"] = r.details;
            if (with_timings) e["time_ms"] = r.time_ms;
            arr.push_back(std::move(e));
        }
        j["scenarios"] = std::move(arr);
        json agg;
        agg["total"] = results.size();
        agg["passed"] = n_pass();
        agg["applicable"] = n_applicable();
        agg["all_applicable_pass"] = all_pass();
        j["aggregate"] = std::move(agg);
        return j;
    }
};

// Runs every scenario with a per-scenario seed derived as seed xor index;
// scenario-level parallelism with a deterministic reduction into index order.
inline SuiteReport run_suite(const ScenarioFile& file, unsigned parallelism = 1) {
    SuiteReport report;
    report.seed = file.seed;
    report.results.resize(file.scenarios.size());
    if (parallelism < 1) parallelism = 1;
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= file.scenarios.size()) break;
            report.results[i] = run_scenario(file.scenarios[i],
                                             file.seed ^ std::uint64_t(file.scenarios[i].index),
                                             file.default_tol);
        }
    };
    if (parallelism == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < parallelism; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return report;
}

inline void write_suite_report(const SuiteReport& report, const std::string& path) {
    {
        std::ofstream out(path);
        if (!out) throw Error("cannot write report: " + path);
        out << dump_report_json(report.to_json(true));
    }
    {
        std::ofstream csv(path + ".summary.csv");
        csv << "index,name,kind,certifies,status,time_ms\n";
        char buf[64];
        for (std::size_t i = 0; i < report.results.size(); ++i) {
            const auto& r = report.results[i];
            std::snprintf(buf, sizeof buf, "%.17g", r.time_ms);
            csv << i << "," << r.name << "," << r.kind << "," << r.certifies << "," << r.status
                << "," << buf << "\n";
        }
    }
    {
        // traceability matrix: which scenario certifies which statement
        std::ofstream csv(path + ".traceability.csv");
        csv << "certifies,scenario_index,name,status\n";
        std::map<std::string, std::vector<std::size_t>> tags;
        for (std::size_t i = 0; i < report.results.size(); ++i)
            tags[report.results[i].certifies].push_back(i);
        for (const auto& [tag, idxs] : tags)
            for (std::size_t i : idxs)
                csv << tag << "," << i << "," << report.results[i].name << ","
                    << report.results[i].status << "\n";
    }
}

}  // namespace lot
