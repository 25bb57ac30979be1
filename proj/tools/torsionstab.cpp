// Command-line front end: stability analysis of dot r = A r via the torsion
// and higher curvatures of its trajectories, cross-checked against the
// classical eigenvalue criterion.
//
// Exit codes: 0 success/consistent, 1 usage or input error, 2 verification
// failure or geometric/oracle contradiction.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <torsionstab/builtin_systems.hpp>
#include <torsionstab/discriminance.hpp>
#include <torsionstab/io.hpp>
#include <torsionstab/suites.hpp>

namespace ts = torsionstab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerification = 2;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& cli_seed) {
    if (cli_seed) return *cli_seed;
    if (const char* env = std::getenv("TORSIONSTAB_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw ts::PreconditionError("TORSIONSTAB_SEED must be an unsigned integer");
        }
    }
    return 42;
}

std::vector<double> parse_vector(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            double v = std::stod(item, &pos);
            if (pos != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (...) {
            throw ts::PreconditionError("cannot parse --r0 component '" + item + "'");
        }
    }
    if (out.empty()) throw ts::PreconditionError("--r0 must hold at least one coordinate");
    return out;
}

std::string json_mirror_path(const std::string& out) {
    auto dot = out.find_last_of('.');
    auto slash = out.find_last_of('/');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
        return out.substr(0, dot) + ".json";
    return out + ".json";
}

struct TraceFlags {
    double t_start = 1.0;
    double t_end = 60.0;
    int points = 256;

    ts::TraceConfig config() const {
        ts::TraceConfig cfg;
        cfg.t_start = t_start;
        cfg.t_end = t_end;
        cfg.num_points = points;
        return cfg;
    }
};

void add_trace_flags(CLI::App* cmd, TraceFlags& flags) {
    cmd->add_option("--t-start", flags.t_start, "grid start time (default 1)");
    cmd->add_option("--t-end", flags.t_end, "grid end time (default 60)");
    cmd->add_option("--points", flags.points, "grid points (default 256)");
}

int cmd_analyze(const std::string& path, const TraceFlags& flags, int samples,
                std::uint64_t seed, const std::string& out) {
    ts::MatrixDocument doc = ts::read_matrix_document(path);
    ts::RealMatrix a = doc.matrix();
    ts::ReconciliationReport report = ts::reconcile(a, flags.config(), samples, seed);

    std::string text = ts::report_text(report, doc.label);
    if (!out.empty()) {
        std::ofstream f(out);
        if (!f) throw ts::PreconditionError("cannot write " + out);
        f << text;
        std::ofstream fj(json_mirror_path(out));
        if (!fj) throw ts::PreconditionError("cannot write " + json_mirror_path(out));
        fj << ts::report_json(report, doc.label).dump(2) << "\n";
    }
    std::cout << text;
    return report.consistent ? kExitOk : kExitVerification;
}

int cmd_trace(const std::string& path, const std::string& r0_text,
              const std::string& quantity, bool allow_degenerate, const TraceFlags& flags,
              const std::string& out) {
    ts::MatrixDocument doc = ts::read_matrix_document(path);
    ts::RealMatrix a = doc.matrix();
    std::vector<double> coords = parse_vector(r0_text);
    if (static_cast<int>(coords.size()) != a.n())
        throw ts::PreconditionError("--r0 has " + std::to_string(coords.size()) +
                                    " coordinates but the system dimension is " +
                                    std::to_string(a.n()));
    if (!allow_degenerate)
        for (double v : coords)
            if (v == 0.0)
                throw ts::PreconditionError(
                    "--r0 has a zero coordinate (outside the genericity set S); pass "
                    "--allow-degenerate to trace it anyway");

    ts::Vector r0(a.n());
    for (int i = 0; i < a.n(); ++i) r0(i) = coords[static_cast<std::size_t>(i)];

    int order = a.n();
    if (quantity == "tau") {
        order = std::min(a.n(), 3);
    } else if (quantity.rfind("kappa_", 0) == 0) {
        int idx = std::stoi(quantity.substr(6));
        if (idx < 1 || idx > a.n() - 1)
            throw ts::PreconditionError("quantity " + quantity + " is out of range for n = " +
                                        std::to_string(a.n()));
        order = idx + 1;
    } else if (!quantity.empty() && quantity != "all") {
        throw ts::PreconditionError("unknown quantity '" + quantity +
                                    "' (expected tau, kappa_<i>, or all)");
    }
    order = std::max(order, 2);

    ts::SpectralSummary s = ts::summarize(a);
    bool structural = ts::detail::structural_v2_flag(a, s);
    auto engine = std::make_shared<ts::TrajectoryEngine>(a);
    ts::Trajectory traj(engine, r0);
    ts::ProfileTrace profile =
        ts::sample_profile_trace(traj, flags.config(), order, structural);

    if (!out.empty()) {
        std::ofstream f(out);
        if (!f) throw ts::PreconditionError("cannot write " + out);
        ts::write_trace_csv(profile, f);
    } else {
        ts::write_trace_csv(profile, std::cout);
    }
    return kExitOk;
}

int cmd_examples(const std::string& name) {
    auto names = ts::builtin_names();
    bool known = false;
    for (const auto& n : names) known = known || n == name;
    if (!known) {
        std::cerr << "unknown example '" << name << "'; valid names:";
        for (const auto& n : names) std::cerr << " " << n;
        std::cerr << "\n";
        return kExitUsage;
    }
    auto sys = *ts::builtin_system(name);
    std::cout << name << ": " << sys.summary << "\n";
    double elapsed = 0.0;
    auto checks = ts::run_example_checks(name, &elapsed);
    bool all = true;
    for (const auto& c : checks) {
        std::cout << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name << "\n"
                  << "         expected: " << c.expected << "\n"
                  << "         observed: " << c.observed << "\n";
        all = all && c.pass;
    }
    std::cout << (all ? "all checks passed" : "some checks FAILED") << " ("
              << ts::format_human(elapsed) << "s)\n";
    return all ? kExitOk : kExitVerification;
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
    auto reports = ts::run_suites(suite, seed);
    bool all = true;
    int total = 0, passed = 0;
    for (const auto& rep : reports) {
        std::cout << "suite " << rep.suite << "\n";
        for (const auto& c : rep.cases) {
            std::cout << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name;
            if (!c.detail.empty()) std::cout << ": " << c.detail;
            std::cout << "\n";
        }
        std::cout << "  => " << rep.aggregate << " [" << (rep.pass ? "PASS" : "FAIL") << "]\n";
        all = all && rep.pass;
        total += static_cast<int>(rep.cases.size());
        passed += rep.passed();
    }
    std::cout << "verify: " << passed << "/" << total << " cases, "
              << (all ? "all suites passed" : "suite FAILURES present") << "\n";
    return all ? kExitOk : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stability analysis of linear time-invariant systems from the torsion "
                 "and higher curvatures of their trajectories"};
    app.require_subcommand(1);

    std::string matrix_path, out_path, r0_text, quantity, suite = "all", example_name;
    bool allow_degenerate = false;
    int samples = 32;
    std::optional<std::uint64_t> seed_opt;
    TraceFlags analyze_flags, trace_flags;

    CLI::App* analyze = app.add_subcommand("analyze", "full report for a matrix file");
    analyze->add_option("matrix", matrix_path, "matrix JSON file")->required();
    analyze->add_option("--samples", samples, "sampled initial conditions (default 32)");
    analyze->add_option("--seed", seed_opt, "RNG seed (default TORSIONSTAB_SEED or 42)");
    analyze->add_option("--out", out_path, "write the text report here and a .json mirror");
    add_trace_flags(analyze, analyze_flags);

    CLI::App* trace = app.add_subcommand("trace", "CSV of volumes, curvatures and torsion");
    trace->add_option("matrix", matrix_path, "matrix JSON file")->required();
    trace->add_option("--r0", r0_text, "initial condition, comma-separated")->required();
    trace->add_option("--quantity", quantity,
                      "tau, kappa_<i>, or all: how many derivatives to carry");
    trace->add_flag("--allow-degenerate", allow_degenerate,
                    "accept r0 with zero coordinates");
    trace->add_option("--out", out_path, "output CSV path (default stdout)");
    add_trace_flags(trace, trace_flags);

    CLI::App* examples = app.add_subcommand("examples", "reproduce a built-in reference system");
    examples->add_option("name", example_name, "paper1|paper2|remark1|remark2|lemma46")
        ->required();

    CLI::App* verify = app.add_subcommand("verify", "run the seeded verification suites");
    verify->add_option("--suite", suite, "trichotomy|lemmas|properties|all (default all)");
    verify->add_option("--seed", seed_opt, "RNG seed (default TORSIONSTAB_SEED or 42)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (analyze->parsed())
            return cmd_analyze(matrix_path, analyze_flags, samples, resolve_seed(seed_opt),
                               out_path);
        if (trace->parsed())
            return cmd_trace(matrix_path, r0_text, quantity, allow_degenerate, trace_flags,
                             out_path);
        if (examples->parsed()) return cmd_examples(example_name);
        if (verify->parsed()) return cmd_verify(suite, resolve_seed(seed_opt));
    } catch (const ts::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
