// Command-line surface: scenario ingestion, suite orchestration, report
// persistence. Exit codes: 0 pass, 1 verified failure, 2 parse error,
// 3 validation error, 4 solver nonconvergence.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "lot/io.hpp"

namespace {

constexpr const char* kCatalogText = R"(functional descriptors (functional_check scenarios):
  {"type":"quadratic","A":[[...]],"b":[...]}          0.5 x'Ax + b'x, A symmetric
  {"type":"convex_diff","dim":n,"i":0,"j":1,"power":p} |x_i - x_j|^p, p >= 1
  {"type":"concave_of_sum","weights":[...],"g":"neg_square|neg_exp|square"}
  {"type":"sup","dim":n}                               max_i x_i
  {"type":"dirichlet","dim":n,"edges":[[i,j,w],...]}   sum w (x_i - x_j)^2
  {"type":"gagliardo","points":[[...]],"s":s,"p":p}    s in (0,1), p > 1
  {"type":"internal_energy","entropy":{...},"m":[...]} sum f(nu_j/m_j) m_j
  {"type":"kl","m":[...]}                              density integrand s log s - s
  {"type":"linear","mu":[...]}
  {"type":"indicator_box","lo":[...],"hi":[...]}
  {"type":"indicator_simplex","dim":n,"mass":M}

entropies: {"type":"kl|quadratic|square","lambda":l}
ground costs: sqeuclidean, euclidean, lp (with "q"), zero-diagonal-indicator
scenario kinds: functional_check, ot_solve, potential_comparison, jko_check
)";

int run_kinds(const std::string& path, const std::vector<std::string>& kinds,
              std::optional<std::uint64_t> seed, std::optional<double> tol, unsigned jobs,
              const std::string& report_path, bool suite_mode) {
    lot::ScenarioFile file;
    try {
        file = lot::load_scenario(path);
    } catch (const lot::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    }
    if (seed) file.seed = *seed;
    if (tol) file.default_tol = *tol;
    if (!kinds.empty()) {
        std::vector<lot::ScenarioSpec> kept;
        for (auto& s : file.scenarios)
            if (std::find(kinds.begin(), kinds.end(), s.kind) != kinds.end()) kept.push_back(s);
        file.scenarios = std::move(kept);
        if (file.scenarios.empty()) {
            std::cerr << "no scenarios of the requested kind in " << path << "\n";
            return 3;
        }
    }

    auto report = lot::run_suite(file, jobs);
    bool solver_error = false;
    for (const auto& r : report.results) {
        std::cout << "[" << r.status << "] " << r.name << " (" << r.kind << ", certifies "
                  << r.certifies << ")\n";
        if (r.kind == "ot_solve" && r.details.contains("primal"))
            std::cout << "    primal=" << r.details["primal"].get<double>()
                      << " dual=" << r.details["dual"].get<double>()
                      << " gap=" << r.details["gap"].get<double>() << "\n";
        if (r.status == "error") {
            std::cout << "    " << r.details.value("error", "") << "\n";
            if (r.details.value("error", "").rfind("solver:", 0) == 0) solver_error = true;
        }
    }
    std::cout << report.n_pass() << "/" << report.n_applicable()
              << " applicable scenarios passed (" << report.results.size() << " total)\n";
    if (!report_path.empty()) {
        lot::write_suite_report(report, report_path);
        std::cout << "report written to " << report_path << "\n";
    }
    if (report.all_pass()) return 0;
    return (!suite_mode && solver_error) ? 4 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-space lattice and optimal-transport verification"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    unsigned jobs = 1;
    std::string report_path;
    app.add_option("--seed", seed, "override the scenario file seed");
    app.add_option("--tol", tol, "override the default tolerance");
    app.add_option("--jobs", jobs, "scenario-level parallelism");
    app.add_option("--report", report_path, "write a JSON report (plus CSV summaries)");

    std::string file;
    auto* solve = app.add_subcommand("solve", "run ot_solve scenarios from a file");
    solve->add_option("file", file)->required();
    auto* check = app.add_subcommand("check", "run functional_check scenarios from a file");
    check->add_option("file", file)->required();
    auto* vpot = app.add_subcommand("verify-potentials", "run potential_comparison scenarios");
    vpot->add_option("file", file)->required();
    auto* vjko = app.add_subcommand("verify-jko", "run jko_check scenarios");
    vjko->add_option("file", file)->required();
    auto* suite = app.add_subcommand("suite", "run every scenario and write a report");
    suite->add_option("file", file)->required();
    auto* catalog = app.add_subcommand("catalog", "list descriptor schemas");

    CLI11_PARSE(app, argc, argv);

    if (const char* env = std::getenv("LATTICE_OT_JOBS")) {
        char* end = nullptr;
        unsigned long v = std::strtoul(env, &end, 10);
        if (end && *end == '\0' && v >= 1) jobs = unsigned(v);
    }

    if (catalog->parsed()) {
        std::cout << kCatalogText;
        return 0;
    }
    std::vector<std::string> kinds;
    bool suite_mode = suite->parsed();
    if (solve->parsed()) kinds = {"ot_solve"};
    if (check->parsed()) kinds = {"functional_check"};
    if (vpot->parsed()) kinds = {"potential_comparison"};
    if (vjko->parsed()) kinds = {"jko_check"};
    return run_kinds(file, kinds, seed, tol, jobs, report_path, suite_mode);
}
