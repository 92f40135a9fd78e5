// perctree: exact bond-percolation thresholds for tree-like graphs.
//
// Deterministic payloads go to stdout; timings and progress to stderr.
// Exit codes: 0 success, 2 usage, 3 solver/size guard, 4 non-convergence.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "perctree/builders.hpp"
#include "perctree/closedform.hpp"
#include "perctree/montecarlo.hpp"
#include "perctree/solver.hpp"
#include "perctree/structure.hpp"

namespace {

using nlohmann::ordered_json;
using namespace perctree;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitGuard = 3;
constexpr int kExitConvergence = 4;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

TreeStructure load_structure(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_structure(ss.str());
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw std::invalid_argument("cannot write '" + out_path + "'");
        out << text;
    }
}

std::vector<std::vector<int>> parse_coset_spec(const std::string& spec) {
    // "0,3;1,4;2,5" -> {{0,3},{1,4},{2,5}}
    std::vector<std::vector<int>> out;
    std::stringstream groups(spec);
    std::string group;
    while (std::getline(groups, group, ';')) {
        std::vector<int> coset;
        std::stringstream items(group);
        std::string item;
        while (std::getline(items, item, ',')) coset.push_back(std::stoi(item));
        out.push_back(std::move(coset));
    }
    return out;
}

int resolve_threads(int threads) {
    if (threads > 0) return threads;
    if (const char* env = std::getenv("PERCTREE_THREADS")) {
        try {
            int t = std::stoi(env);
            if (t > 0) return t;
        } catch (...) {
        }
    }
    return 1;
}

int cmd_build(const std::string& family, const std::vector<std::string>& factors, int rank, int k,
              const std::string& g1, const std::string& g1_cosets, const std::string& g2,
              const std::string& g2_cosets, const std::string& base, const std::string& h_cosets,
              const std::string& k_cosets, const std::string& alpha_spec,
              const std::string& out_path) {
    TreeStructure s;
    if (family == "sl2z") {
        s = sl2z();
    } else if (family == "grandparent") {
        s = grandparent();
    } else if (family == "fball") {
        s = free_group_ball(rank, k);
    } else if (family == "free-product") {
        std::vector<FiniteGraph> fs;
        for (const auto& f : factors) fs.push_back(named_graph(f));
        s = free_product(fs);
    } else if (family == "amalgam") {
        FactorWithCosets f1{named_graph(g1), parse_coset_spec(g1_cosets)};
        FactorWithCosets f2{named_graph(g2), parse_coset_spec(g2_cosets)};
        s = amalgam(f1, f2);
    } else if (family == "hnn") {
        FiniteGraph b = named_graph(base);
        auto hc = parse_coset_spec(h_cosets);
        auto kc = parse_coset_spec(k_cosets);
        std::vector<int> alpha;
        if (alpha_spec.empty()) {
            for (size_t i = 0; i < (hc.empty() ? 0 : hc[0].size()); ++i)
                alpha.push_back(static_cast<int>(i));
        } else {
            for (const auto& c : parse_coset_spec(alpha_spec))
                for (int v : c) alpha.push_back(v);
        }
        s = hnn(b, hc, kc, alpha);
    } else {
        throw std::invalid_argument("unknown family '" + family + "'");
    }
    emit(serialize_structure(s), out_path);
    return kExitOk;
}

int cmd_pc(const std::string& path, int grid, double tol, double fp_tol, long max_iter) {
    TreeStructure s = load_structure(path);
    SolverOptions opt;
    opt.grid = grid;
    opt.pc_tol = tol;
    opt.fp_tol = fp_tol;
    opt.max_iter = max_iter;
    const auto t0 = std::chrono::steady_clock::now();
    Engine engine(s, opt);
    PcResult res = engine.critical_probability();
    ColorSpace colors = engine.reachable_colors();
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    ordered_json rep;
    rep["structure"] = s.name;
    rep["p_c"] = res.pc;
    rep["bracket"] = {res.bracket_lo, res.bracket_hi};
    rep["tolerance"] = tol;
    rep["grid"] = grid;
    rep["no_subcritical_root"] = res.no_subcritical_root;
    rep["color_space_size"] = colors.size();
    ordered_json supp = ordered_json::object();
    const auto& support = engine.partition_support();
    for (size_t j = 0; j < s.models.size(); ++j)
        supp[s.models[j].name] = support[j].size();
    rep["partition_support_sizes"] = supp;
    rep["det_residual_at_pc"] = res.det_at_pc;
    std::cout << rep.dump(2) << "\n";
    std::fprintf(stderr, "wall time: %.1f ms\n", ms);
    return kExitOk;
}

int cmd_scan(const std::string& path, double pmin, double pmax, int steps, double fp_tol,
             long max_iter) {
    TreeStructure s = load_structure(path);
    SolverOptions opt;
    opt.fp_tol = fp_tol;
    opt.max_iter = max_iter;
    Engine engine(s, opt);
    ColorSpace colors = engine.reachable_colors();
    std::cout << "p,rho,det_residual\n";
    for (int i = 0; i < steps; ++i) {
        const double p =
            steps == 1 ? pmin : pmin + (pmax - pmin) * static_cast<double>(i) / (steps - 1);
        PartitionDistribution d = engine.partition_distribution(p);
        if (!d.converged)
            throw ConvergenceError("fixed point did not converge at p = " + fmt17(p));
        MomentMatrix M = engine.moment_matrix(p, d, colors);
        std::cout << fmt17(p) << "," << fmt17(spectral_radius(M)) << ","
                  << fmt17(det_minus_identity(M)) << "\n";
    }
    return kExitOk;
}

int cmd_mc(const std::string& path, double p, bool has_p, bool bracket, int depth, long trials,
           std::uint64_t seed, double theta, int threads) {
    TreeStructure s = load_structure(path);
    if (bracket) {
        Bracket b = bracket_pc(s, depth, trials, seed, theta, 0.02, threads);
        ordered_json rep;
        rep["structure"] = s.name;
        rep["p_lo"] = b.p_lo;
        rep["p_hi"] = b.p_hi;
        rep["theta_ref"] = b.theta_ref;
        rep["theta_hi"] = b.theta_hi;
        rep["grid_step"] = b.grid_step;
        rep["depth"] = depth;
        rep["trials"] = trials;
        rep["seed"] = seed;
        rep["inconclusive"] = b.inconclusive;
        if (!b.warning.empty()) rep["warning"] = b.warning;
        std::cout << rep.dump(2) << "\n";
        return kExitOk;
    }
    if (!has_p) throw std::invalid_argument("mc: need --p or --bracket");
    UnfoldedGraph g = unfold(s, depth);
    ReachEstimate est = estimate_reach(g, p, trials, seed, threads);
    std::cout << "p,reach_estimate,ci_lo,ci_hi,trials,depth,seed\n";
    std::cout << fmt17(p) << "," << fmt17(est.p_hat) << "," << fmt17(est.ci_lo) << ","
              << fmt17(est.ci_hi) << "," << trials << "," << depth << "," << seed << "\n";
    return kExitOk;
}

int cmd_chi(const std::vector<std::string>& factors) {
    ordered_json rep;
    rep["factors"] = ordered_json::array();
    std::vector<Poly> chis;
    for (const auto& name : factors) {
        FiniteGraph g = named_graph(name);
        Poly chi = chi_polynomial(g);
        chis.push_back(chi);
        ordered_json jf;
        jf["graph"] = name;
        jf["chi_coefficients"] = chi.c;
        rep["factors"].push_back(jf);
    }
    if (chis.size() >= 2) rep["free_product_pc"] = free_product_pc(chis);
    std::cout << rep.dump(2) << "\n";
    return kExitOk;
}

int cmd_z2z() {
    Z2zReport r = z2z_amalgam_pc();
    ordered_json rep;
    rep["p_c"] = r.pc;
    rep["connection_probabilities"] = {{"A", r.a}, {"B", r.b}, {"C", r.c}};
    rep["residuals"] = {{"abc", r.abc_residual},
                        {"det", r.det_residual},
                        {"series_vs_partial_sum", r.series_gap}};
    rep["iterations"] = r.iterations;
    std::cout << rep.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact bond-percolation thresholds for graphs with tree-like structure"};
    app.require_subcommand(1);

    // build
    auto* build = app.add_subcommand("build", "emit a structure file for a named family");
    std::string family;
    build->add_option("family", family, "free-product | amalgam | hnn | fball | grandparent | sl2z")
        ->required();
    std::vector<std::string> factors;
    build->add_option("--factor", factors, "free-product factor graph (kN, cN, pN); repeatable");
    int rank = 2, ball_k = 2;
    build->add_option("--rank", rank, "free group rank (only 2)");
    build->add_option("--k", ball_k, "ball radius k (1..3)");
    std::string g1, g1_cosets, g2, g2_cosets;
    build->add_option("--g1", g1, "amalgam factor 1 graph");
    build->add_option("--g1-cosets", g1_cosets, "factor 1 cosets, e.g. \"0,2;1,3\"");
    build->add_option("--g2", g2, "amalgam factor 2 graph");
    build->add_option("--g2-cosets", g2_cosets, "factor 2 cosets, e.g. \"0,3;1,4;2,5\"");
    std::string hnn_base, h_cosets, k_cosets, alpha_spec;
    build->add_option("--base", hnn_base, "hnn base graph");
    build->add_option("--h-cosets", h_cosets, "H cosets");
    build->add_option("--k-cosets", k_cosets, "K cosets");
    build->add_option("--alpha", alpha_spec, "position matching, e.g. \"0,1\" (default identity)");
    std::string out_path;
    build->add_option("--out", out_path, "write to file instead of stdout");

    // pc
    auto* pc = app.add_subcommand("pc", "critical probability of a structure file");
    std::string pc_file;
    pc->add_option("file", pc_file, "structure JSON file")->required();
    int grid = 256;
    double tol = 1e-10, fp_tol = 1e-12;
    long max_iter = 1000000;
    pc->add_option("--grid", grid, "scan grid size over (0,1)")->default_val(256);
    pc->add_option("--tol", tol, "bisection tolerance for p_c")->default_val(1e-10);
    pc->add_option("--fp-tol", fp_tol, "fixed-point tolerance")->default_val(1e-12);
    pc->add_option("--max-iter", max_iter, "fixed-point iteration cap")->default_val(1000000);
    int threads = 0;
    pc->add_option("--threads", threads, "worker threads (deterministic output for any value)")
        ->envname("PERCTREE_THREADS");

    // scan
    auto* scan = app.add_subcommand("scan", "CSV scan of rho and det(M-I) over p");
    std::string scan_file;
    scan->add_option("file", scan_file, "structure JSON file")->required();
    double pmin = 0.01, pmax = 0.99;
    int steps = 99;
    scan->add_option("--pmin", pmin)->default_val(0.01);
    scan->add_option("--pmax", pmax)->default_val(0.99);
    scan->add_option("--steps", steps)->default_val(99);
    double scan_fp_tol = 1e-12;
    long scan_max_iter = 1000000;
    scan->add_option("--fp-tol", scan_fp_tol)->default_val(1e-12);
    scan->add_option("--max-iter", scan_max_iter)->default_val(1000000);

    // mc
    auto* mc = app.add_subcommand("mc", "Monte Carlo reach estimate or p_c bracket");
    std::string mc_file;
    mc->add_option("file", mc_file, "structure JSON file")->required();
    double mc_p = 0.0;
    auto* popt = mc->add_option("--p", mc_p, "edge probability for a single estimate");
    bool mc_bracket = false;
    mc->add_flag("--bracket", mc_bracket, "scan and report an advisory [p_lo, p_hi]");
    int depth = 8;
    long trials = 10000;
    std::uint64_t seed = 1;
    double theta = 0.02;
    mc->add_option("--depth", depth)->default_val(8);
    mc->add_option("--trials", trials)->default_val(10000);
    mc->add_option("--seed", seed)->default_val(1);
    mc->add_option("--theta", theta, "subcritical reference threshold")->default_val(0.02);
    int mc_threads = 0;
    mc->add_option("--threads", mc_threads, "worker threads (deterministic output for any value)")
        ->envname("PERCTREE_THREADS");

    // chi
    auto* chi = app.add_subcommand("chi", "expected cluster-size polynomials and the free-product root");
    std::vector<std::string> chi_factors;
    chi->add_option("factors", chi_factors, "factor graphs (kN, cN, pN)")->required();

    // z2z
    app.add_subcommand("z2z", "closed form for the ladder-with-Z4 amalgam over Z2");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (build->parsed())
            return cmd_build(family, factors, rank, ball_k, g1, g1_cosets, g2, g2_cosets, hnn_base,
                             h_cosets, k_cosets, alpha_spec, out_path);
        if (pc->parsed()) return cmd_pc(pc_file, grid, tol, fp_tol, max_iter);
        if (scan->parsed())
            return cmd_scan(scan_file, pmin, pmax, steps, scan_fp_tol, scan_max_iter);
        if (mc->parsed())
            return cmd_mc(mc_file, mc_p, popt->count() > 0, mc_bracket, depth, trials, seed, theta,
                          resolve_threads(mc_threads));
        if (chi->parsed()) return cmd_chi(chi_factors);
        return cmd_z2z();
    } catch (const GuardError& e) {
        std::cerr << "guard: " << e.what() << "\n";
        return kExitGuard;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const ParseError& e) {
        std::cerr << "parse: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
