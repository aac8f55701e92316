// Command-line front end: analyze, predict, simulate, verify, repro.
//
// Exit codes: 0 success, 1 verification failure or numerical failure, 2 input error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hycon/hycon.hpp"
#include "hycon/report.hpp"

#ifndef HYCON_DATA_DIR
#define HYCON_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace hycon;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitInput = 2;

struct RunConfig {
    std::string flow_path;
    std::string jump_path;
    std::string alpha = "auto";
    std::optional<double> periodic;
    std::vector<double> random;  // {tau_min, tau_max}
    std::uint64_t seed = 1;
    double horizon = 30.0;
    std::string x0 = "indexed";
    std::optional<double> dt;
    std::string out = "hycon_out";
    double tol = 1e-3;
    double perturb = 0.0;
    int example = 0;
    std::string data_dir = HYCON_DATA_DIR;
};

class InputError : public Error {
  public:
    using Error::Error;
};

Digraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open graph file '" + path + "'");
    try {
        return parse_edge_list(in);
    } catch (const ParseError& e) {
        throw InputError(path + ": " + e.what());
    }
}

double parse_real(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw InputError(what + ": not a number: '" + text + "'");
    }
}

Vector parse_x0(const std::string& spec, std::size_t n) {
    Vector x;
    if (spec == "indexed") {
        for (std::size_t i = 0; i < n; ++i) x.push_back(static_cast<double>(i + 1));
        return x;
    }
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) x.push_back(parse_real(tok, "--x0"));
    if (x.size() != n) {
        throw InputError("--x0 has " + std::to_string(x.size()) + " entries, graphs have " + std::to_string(n) +
                         " nodes");
    }
    return x;
}

struct Setup {
    Digraph flow;
    Digraph jump;
    Matrix l_flow;
    Matrix l_jump;
    GainBounds bounds;
    double alpha = 0.0;
    HybridTimeDomain domain;
    Vector x0;
    double dt = 0.0;
};

/// alpha "auto": 0.9 times the bound that also keeps the jump map's diagonal positive.
double resolve_alpha(const std::string& spec, const GainBounds& b) {
    if (spec == "auto") return std::isfinite(b.alpha_nonneg) ? 0.9 * b.alpha_nonneg : 1.0;
    const double a = parse_real(spec, "--alpha");
    if (!(a > 0.0)) throw InputError("--alpha must be positive");
    return a;
}

Setup build_setup(const RunConfig& cfg) {
    Setup s;
    s.flow = load_graph(cfg.flow_path);
    s.jump = load_graph(cfg.jump_path);
    if (s.flow.size() != s.jump.size()) {
        throw InputError("flow graph has " + std::to_string(s.flow.size()) + " nodes, jump graph " +
                         std::to_string(s.jump.size()));
    }
    s.l_flow = real_laplacian(s.flow);
    s.l_jump = real_laplacian(s.jump);
    s.bounds = alpha_convergence_bound(s.l_jump);
    s.alpha = resolve_alpha(cfg.alpha, s.bounds);
    if (!(cfg.horizon > 0.0)) throw InputError("--horizon must be positive");
    try {
        if (cfg.periodic) {
            s.domain = periodic_domain(*cfg.periodic, cfg.horizon);
        } else {
            const double lo = cfg.random.empty() ? 0.1 : cfg.random.at(0);
            const double hi = cfg.random.empty() ? 1.0 : cfg.random.at(1);
            s.domain = random_domain(lo, hi, cfg.seed, cfg.horizon);
        }
    } catch (const InvalidArgument& e) {
        throw InputError(e.what());
    }
    s.x0 = parse_x0(cfg.x0, s.flow.size());
    s.dt = cfg.dt ? *cfg.dt : s.domain.tau_min / 10.0;
    if (!(s.dt > 0.0)) throw InputError("--dt must be positive");
    return s;
}

void write_json(const fs::path& path, Json j) {
    fs::create_directories(path.parent_path());
    j["generated_at"] = utc_timestamp();
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    if (!out) throw InputError("cannot write '" + path.string() + "'");
}

Json config_json(const RunConfig& cfg, const Setup& s) {
    return Json{{"flow", cfg.flow_path},   {"jump", cfg.jump_path},        {"alpha", s.alpha},
                {"alpha_spec", cfg.alpha}, {"domain", to_json(s.domain)}, {"x0", s.x0},
                {"sample_dt", s.dt},       {"tol", cfg.tol}};
}

Json analyze_json(const RunConfig& cfg, const Setup& s) {
    const Digraph un = union_graph(s.flow, s.jump);
    const Digraph in = intersection_graph(s.flow, s.jump);
    const ReachDecomposition df = decompose(s.flow);
    const ReachDecomposition dj = decompose(s.jump);
    const JointAep joint = joint_coarsest_aep(s.flow, s.jump);

    Json mono = Json::array();
    std::vector<double> taus{s.domain.tau_min};
    if (s.domain.tau_max != s.domain.tau_min) taus.push_back(s.domain.tau_max);
    for (double tau : taus) mono.push_back(to_json(monodromy(s.l_flow, s.l_jump, s.alpha, tau)));

    Json spectra;
    for (const auto& [name, l] : {std::pair{"flow", &s.l_flow}, std::pair{"jump", &s.l_jump}}) {
        Json ev = Json::array();
        for (const auto& e : spectrum(*l)) ev.push_back({{"re", e.real()}, {"im", e.imag()}});
        spectra[name] = ev;
    }

    return Json{{"config", config_json(cfg, s)},
                {"flow_graph", to_json(s.flow)},
                {"jump_graph", to_json(s.jump)},
                {"union_graph", to_json(un)},
                {"intersection_graph", to_json(in)},
                {"flow_reaches", to_json(df)},
                {"jump_reaches", to_json(dj)},
                {"union_reaches", to_json(joint.union_reach)},
                {"flow_coarsest_aep", to_json(coarsest_aep(s.flow, reach_seed(df, s.flow.size())))},
                {"jump_coarsest_aep", to_json(coarsest_aep(s.jump, reach_seed(dj, s.jump.size())))},
                {"joint_coarsest_aep", to_json(joint.partition)},
                {"joint_common_invariant_under_intersection", joint.common_invariant_under_intersection},
                {"spectra", spectra},
                {"gain_bounds", to_json(s.bounds)},
                {"monodromy", mono}};
}

ConsensusReport make_report(const RunConfig& cfg, const Setup& s) {
    ConsensusReport rep = predict(s.flow, s.jump, s.alpha, s.x0);
    if (cfg.perturb != 0.0 && !rep.reaches.empty()) {
        rep.reaches.front().value += cfg.perturb;
        rep.warnings.push_back("reach 1 value perturbed by " + std::to_string(cfg.perturb) + " (negative control)");
    }
    return rep;
}

Json simulate_summary(const HybridTrajectory& traj, const Partition& p) {
    const auto& last = traj.final_sample();
    Json means = Json::array();
    for (const auto& cell : p.cells()) {
        double m = 0.0;
        for (Node v : cell) m += last.x[v];
        means.push_back(m / static_cast<double>(cell.size()));
    }
    return Json{{"samples", traj.samples.size()},
                {"jumps", traj.domain.jump_count()},
                {"final_t", last.t},
                {"final_j", last.j},
                {"final_state", last.x},
                {"final_cell_spread", cell_spread(last.x, p)},
                {"cluster_partition", to_json(p)},
                {"cluster_means", means}};
}

void write_trajectory(const fs::path& path, const HybridTrajectory& traj) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    write_trajectory_csv(out, traj);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
}

void print_checks(const VerificationRecord& rec) {
    for (const auto& c : rec.checks) {
        if (!c.applicable) continue;
        std::cout << "  " << std::left << std::setw(16) << c.name << (c.passed ? "PASS" : "FAIL")
                  << "  error=" << std::scientific << std::setprecision(3) << c.error << std::defaultfloat << '\n';
    }
    std::cout << "verification " << (rec.passed() ? "PASSED" : "FAILED") << " at tol " << rec.tol << '\n';
}

int cmd_analyze(const RunConfig& cfg) {
    const Setup s = build_setup(cfg);
    const Json j = analyze_json(cfg, s);
    write_json(fs::path(cfg.out) / "analyze.json", j);
    std::cout << "joint coarsest AEP: " << j["joint_coarsest_aep"].dump() << '\n'
              << "alpha = " << s.alpha << " (alpha_conv = " << j["gain_bounds"]["alpha_conv"].dump() << ")\n"
              << "wrote " << (fs::path(cfg.out) / "analyze.json").string() << '\n';
    return kExitOk;
}

int cmd_predict(const RunConfig& cfg) {
    const Setup s = build_setup(cfg);
    const ConsensusReport rep = make_report(cfg, s);
    Json j = to_json(rep);
    j["config"] = config_json(cfg, s);
    write_json(fs::path(cfg.out) / "predict.json", j);
    for (std::size_t i = 0; i < rep.reaches.size(); ++i)
        std::cout << "reach " << i + 1 << " value " << std::setprecision(10) << rep.reaches[i].value << '\n';
    std::cout << "common: " << j["common_kind"].dump() << '\n';
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
    return kExitOk;
}

int cmd_simulate(const RunConfig& cfg) {
    const Setup s = build_setup(cfg);
    const HybridTrajectory traj = simulate(s.l_flow, s.l_jump, s.alpha, s.domain, s.x0, s.dt);
    const Partition p = joint_coarsest_aep(s.flow, s.jump).partition;
    write_trajectory(fs::path(cfg.out) / "trajectory.csv", traj);
    Json j = simulate_summary(traj, p);
    j["config"] = config_json(cfg, s);
    write_json(fs::path(cfg.out) / "simulate.json", j);
    std::cout << "final cell spread " << j["final_cell_spread"].dump() << ", cluster means "
              << j["cluster_means"].dump() << '\n';
    return kExitOk;
}

int cmd_verify(const RunConfig& cfg) {
    const Setup s = build_setup(cfg);
    const ConsensusReport rep = make_report(cfg, s);
    const HybridTrajectory traj = simulate(s.l_flow, s.l_jump, s.alpha, s.domain, s.x0, s.dt);
    const VerificationRecord rec = verify(traj, rep, cfg.tol);
    write_json(fs::path(cfg.out) / "verify.json",
               Json{{"config", config_json(cfg, s)}, {"prediction", to_json(rep)}, {"verification", to_json(rec)}});
    print_checks(rec);
    return rec.passed() ? kExitOk : kExitFailed;
}

struct PrintedValue {
    std::string quantity;
    double printed;
    double computed;
    bool internally_consistent;
};

Json comparison_json(const std::vector<PrintedValue>& rows, double tol) {
    Json out = Json::array();
    std::cout << std::left << std::setw(28) << "quantity" << std::setw(14) << "printed" << std::setw(20)
              << "computed" << "status\n";
    for (const auto& r : rows) {
        const bool match = std::abs(r.printed - r.computed) <= tol;
        const std::string status =
            match ? "match" : (r.internally_consistent ? "MISMATCH" : "differs (printed value inconsistent)");
        std::cout << std::left << std::setw(28) << r.quantity << std::setw(14) << std::setprecision(6) << r.printed
                  << std::setw(20) << std::setprecision(10) << r.computed << status << '\n';
        out.push_back({{"quantity", r.quantity},
                       {"printed", r.printed},
                       {"computed", r.computed},
                       {"match", match},
                       {"printed_internally_consistent", r.internally_consistent}});
    }
    return out;
}

int cmd_repro(RunConfig cfg) {
    if (cfg.example < 1 || cfg.example > 3) throw InputError("--example must be 1, 2 or 3");
    const std::string tag = "ex" + std::to_string(cfg.example);
    cfg.flow_path = (fs::path(cfg.data_dir) / "examples" / (tag + "_flow.txt")).string();
    cfg.jump_path = (fs::path(cfg.data_dir) / "examples" / (tag + "_jump.txt")).string();
    if (!fs::exists(cfg.flow_path) || !fs::exists(cfg.jump_path)) {
        throw InputError("missing example bundle under '" + cfg.data_dir + "/examples'");
    }
    cfg.out = (fs::path(cfg.out) / tag).string();
    const Setup s = build_setup(cfg);

    write_json(fs::path(cfg.out) / "analyze.json", analyze_json(cfg, s));
    const ConsensusReport rep = make_report(cfg, s);
    write_json(fs::path(cfg.out) / "predict.json", to_json(rep));
    const HybridTrajectory traj = simulate(s.l_flow, s.l_jump, s.alpha, s.domain, s.x0, s.dt);
    write_trajectory(fs::path(cfg.out) / "trajectory.csv", traj);
    write_json(fs::path(cfg.out) / "simulate.json", simulate_summary(traj, rep.partition));
    const VerificationRecord rec = verify(traj, rep, cfg.tol);

    std::vector<PrintedValue> rows;
    const auto& r = rep.reaches;
    if (cfg.example == 1) {
        rows.push_back({"cells", 1.0, static_cast<double>(rep.partition.num_cells()), true});
        rows.push_back({"consensus value", 2.87, r.at(0).value, false});
    } else if (cfg.example == 2) {
        rows.push_back({"x_1^ss", 2.6098, r.at(0).value, true});
        rows.push_back({"x_2^ss", 4.5, r.at(1).value, true});
        rows.push_back({"v_1 (node 1)", 30.0 / 41.0 / 6.0, r.at(0).left_eigvec.at(0), true});
        rows.push_back({"v_1 (node 2)", 30.0 / 41.0 / 5.0, r.at(0).left_eigvec.at(1), true});
        rows.push_back({"v_1 (node 3)", 30.0 / 41.0, r.at(0).left_eigvec.at(2), true});
        if (rep.reduced) {
            rows.push_back({"A_c(0,0)", -3.0, rep.reduced->a_c(0, 0), true});
            rows.push_back({"A_c(0,1)", 1.0, rep.reduced->a_c(0, 1), true});
        }
    } else {
        rows.push_back({"x_1^ss", 2.0, r.at(0).value, true});
        rows.push_back({"x_2^ss", 4.5, r.at(1).value, true});
        rows.push_back({"v_1 (node 1)", 5.0 / 11.0, r.at(0).left_eigvec.at(0), false});
        rows.push_back({"v_1 (node 2)", 1.0 / 11.0, r.at(0).left_eigvec.at(1), false});
        rows.push_back({"v_1 (node 3)", 6.0 / 11.0, r.at(0).left_eigvec.at(2), false});
        if (!rep.gammas.empty()) rows.push_back({"gamma_1 (node 6)", 0.5, rep.gammas.at(0).at(0), true});
        if (rep.common_is_constant()) {
            const auto& cc = std::get<ConstantCommon>(*rep.common_kind);
            rows.push_back({"common constant", 3.25, cc.cell_values.at(0), true});
        }
    }
    std::cout << "example " << cfg.example << ": alpha=" << s.alpha << ", random dwell (" << s.domain.tau_min << ", "
              << s.domain.tau_max << "), seed " << cfg.seed << ", horizon " << cfg.horizon << "\n";
    const Json table = comparison_json(rows, 1e-3);
    print_checks(rec);
    write_json(fs::path(cfg.out) / "verify.json",
               Json{{"config", config_json(cfg, s)}, {"verification", to_json(rec)}, {"comparison", table}});
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
    return rec.passed() ? kExitOk : kExitFailed;
}

void add_run_options(CLI::App* sub, RunConfig& cfg, bool need_graphs) {
    auto* flow = sub->add_option("--flow", cfg.flow_path, "flow graph edge list");
    auto* jump = sub->add_option("--jump", cfg.jump_path, "jump graph edge list");
    if (need_graphs) {
        flow->required();
        jump->required();
    }
    sub->add_option("--alpha", cfg.alpha, "coupling gain, or 'auto'");
    auto* per = sub->add_option("--periodic", cfg.periodic, "periodic jumps with this period");
    auto* rnd = sub->add_option("--random", cfg.random, "random dwell times in (tau_min, tau_max)")->expected(2);
    per->excludes(rnd);
    sub->add_option("--seed", cfg.seed, "seed for random dwell times");
    sub->add_option("--horizon", cfg.horizon, "final continuous time");
    sub->add_option("--x0", cfg.x0, "initial state: comma-separated values or 'indexed' (x_i = i + 1)");
    sub->add_option("--dt", cfg.dt, "sampling interval (default tau_min / 10)");
    sub->add_option("--out", cfg.out, "output directory");
    sub->add_option("--tol", cfg.tol, "verification tolerance");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-consensus analysis of hybrid flow/jump networks"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* analyze = app.add_subcommand("analyze", "reach structure, coarsest AEPs, gain bounds, monodromy");
    auto* pred = app.add_subcommand("predict", "closed-form consensus prediction");
    auto* sim = app.add_subcommand("simulate", "simulate the hybrid network");
    auto* ver = app.add_subcommand("verify", "predict, simulate and compare");
    auto* repro = app.add_subcommand("repro", "reproduce a bundled example");
    for (auto* sub : {analyze, pred, sim, ver}) add_run_options(sub, cfg, true);
    pred->add_option("--perturb", cfg.perturb, "shift the first reach value (negative control)");
    ver->add_option("--perturb", cfg.perturb, "shift the first reach value (negative control)");
    add_run_options(repro, cfg, false);
    repro->add_option("--example", cfg.example, "example id (1, 2 or 3)")->required();
    repro->add_option("--data", cfg.data_dir, "data directory holding examples/");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*analyze) return cmd_analyze(cfg);
        if (*pred) return cmd_predict(cfg);
        if (*sim) return cmd_simulate(cfg);
        if (*ver) return cmd_verify(cfg);
        if (*repro) {
            if (cfg.alpha == "auto") cfg.alpha = "0.2";
            return cmd_repro(cfg);
        }
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitFailed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailed;
    }
    return kExitOk;
}
