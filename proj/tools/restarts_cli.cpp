// restarts: command-line front end for restart analysis and simulation.
//
// Exit codes: 0 success, 2 usage or validation error, 3 restarts cannot
// improve the expected runtime (optimal).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "restarts/analysis.hpp"
#include "restarts/io.hpp"
#include "restarts/simulation.hpp"

namespace {

using namespace restarts;
using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitNoImprovement = 3;
constexpr const char* kOutputDirEnv = "RESTARTS_OUTPUT_DIR";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string human(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.6g}", v);
}

std::string human(const ExtendedNonNegReal& v) { return human(v.value()); }

GridSpec parse_range(const std::string& text, const char* flag) {
    const auto a = text.find(':');
    const auto b = a == std::string::npos ? a : text.find(':', a + 1);
    if (a == std::string::npos || b == std::string::npos) {
        throw UsageError(fmt::format("{} expects lo:hi:n, got '{}'", flag, text));
    }
    GridSpec g;
    try {
        std::size_t used = 0;
        g.lo = std::stod(text.substr(0, a), &used);
        g.hi = std::stod(text.substr(a + 1, b - a - 1));
        const long long n = std::stoll(text.substr(b + 1));
        if (n <= 0) throw UsageError(fmt::format("{}: point count must be >= 1", flag));
        g.n = static_cast<std::size_t>(n);
    } catch (const std::logic_error&) {
        throw UsageError(fmt::format("{} expects lo:hi:n, got '{}'", flag, text));
    }
    try {
        (void)g.values();
    } catch (const std::invalid_argument& e) {
        throw UsageError(fmt::format("{}: {}", flag, e.what()));
    }
    return g;
}

std::filesystem::path resolve_output(const std::string& out) {
    std::filesystem::path path(out);
    if (path.is_relative()) {
        if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) {
            path = std::filesystem::path(dir) / path;
        }
    }
    return path;
}

void write_file(const std::string& out, const std::string& content) {
    const auto path = resolve_output(out);
    std::ofstream file(path, std::ios::binary);
    if (!file) throw UsageError(fmt::format("cannot open '{}' for writing", path.string()));
    file << content;
    if (!file.flush()) throw UsageError(fmt::format("failed writing '{}'", path.string()));
}

bool wants_json_file(const std::string& out) {
    return std::filesystem::path(out).extension() == ".json";
}

// ---------------------------------------------------------------------------

struct Common {
    std::vector<std::string> dist;
    bool json = false;
};

int cmd_analyze(const Common& c, std::size_t grid_points) {
    const Distribution d = io::parse_distribution(c.dist);
    if (grid_points == 0) throw UsageError("--grid must be >= 1");
    const auto grid = default_verdict_grid(grid_points);
    const UsefulnessVerdict v = usefulness_verdict(d, grid);
    const auto m = mean(d);
    std::optional<bool> median_test;
    if (m.is_finite()) median_test = quick_median_test(d);

    if (c.json) {
        json j = io::to_json(v);
        j["distribution"] = io::to_json(d);
        j["mean"] = io::to_json(m);
        j["grid_points"] = grid.size();
        j["grid_lo"] = grid.front().p();
        j["grid_hi"] = grid.back().p();
        j["quick_median_test"] = median_test ? json(*median_test) : json(nullptr);
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    std::cout << "distribution: " << io::to_text(d) << '\n';
    std::cout << "mean: " << human(m) << '\n';
    std::cout << "status: " << to_string(v.status) << '\n';
    if (v.witness_p) std::cout << "witness p: " << human(*v.witness_p) << '\n';
    if (!v.useful_intervals.empty()) {
        std::cout << "useful p intervals:";
        for (const auto& iv : v.useful_intervals) {
            std::cout << " [" << human(iv.lo) << ", " << human(iv.hi) << ']';
        }
        std::cout << '\n';
    }
    if (median_test) {
        std::cout << "median test Q(0.5)/E[X] < 0.5: " << (*median_test ? "yes" : "no (inconclusive)")
                  << '\n';
    }
    if (v.status == UsefulnessStatus::NotUseful) {
        std::cout << fmt::format(
            "note: verdict from {} levels in [{}, {}]; restarts at levels closer to p = 1 "
            "were not examined and may still help\n",
            grid.size(), human(grid.front().p()), human(grid.back().p()));
    }
    return 0;
}

int cmd_optimal(const Common& c) {
    const Distribution d = io::parse_distribution(c.dist);
    const OptimalRestart r = optimal_restart(d);
    if (c.json) {
        json j = io::to_json(r);
        j["distribution"] = io::to_json(d);
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    std::cout << "distribution: " << io::to_text(d) << '\n';
    if (r.boundary_case) {
        std::cout << "p*: p*->0 (boundary)\n";
    } else {
        std::cout << "p*: " << human(r.p_star) << "  (1-p*: " << human(r.q_star) << ")\n";
    }
    std::cout << "t*: " << human(r.t_star) << '\n';
    std::cout << "expected runtime at optimum: " << human(r.expected_runtime) << '\n';
    std::cout << "unrestarted mean: " << human(r.unrestarted_mean) << '\n';
    std::cout << "speedup: " << human(r.unrestarted_mean.value() / r.expected_runtime.value())
              << "x\n";
    return 0;
}

int cmd_region(const std::string& sigma_range, const std::string& p_range, const std::string& out,
               bool as_json) {
    const GridSpec sigma = parse_range(sigma_range, "--sigma");
    const GridSpec p = parse_range(p_range, "--p");
    const RegionScan scan = region_scan_lognormal(sigma, p);
    if (!out.empty()) {
        std::ostringstream body;
        if (wants_json_file(out)) {
            body << io::to_json(scan).dump() << '\n';
        } else {
            io::write_region_csv(body, scan);
        }
        write_file(out, body.str());
    }
    const auto smallest = scan.smallest_useful_shape();
    if (as_json) {
        std::cout << json{{"smallest_useful_sigma", smallest ? json(*smallest) : json(nullptr)},
                          {"sigma_points", scan.shape_values.size()},
                          {"p_points", scan.p_values.size()}}
                         .dump(2)
                  << '\n';
    } else {
        std::cout << "smallest useful sigma: " << (smallest ? human(*smallest) : "none") << '\n';
    }
    return 0;
}

int cmd_curve(const Common& c, const std::string& p_range, const std::string& out) {
    const Distribution d = io::parse_distribution(c.dist);
    const GridSpec p = parse_range(p_range, "--p");
    const auto values = p.values();
    const auto curve = restarted_mean_curve(d, values);
    const auto m = mean(d);
    std::ostringstream body;
    if (c.json || (!out.empty() && wants_json_file(out))) {
        json j = io::to_json(curve, m);
        j["distribution"] = io::to_json(d);
        body << j.dump() << '\n';
    } else {
        io::write_curve_csv(body, curve, m);
    }
    if (out.empty()) {
        std::cout << body.str();
    } else {
        write_file(out, body.str());
        std::cout << "wrote " << curve.size() << " points to " << resolve_output(out).string() << '\n';
    }
    return 0;
}

struct SimOptions {
    std::vector<std::string> policies;
    std::uint64_t seed = 0;
    std::uint64_t reps = 100000;
    double budget = 0.0;
    unsigned threads = 1;
    std::string out;
};

int cmd_simulate(const Common& c, const SimOptions& o) {
    const Distribution d = io::parse_distribution(c.dist);
    if (o.reps == 0) throw UsageError("--reps must be >= 1");
    std::vector<io::ResolvedPolicy> resolved;
    std::vector<Policy> policies;
    for (const auto& text : o.policies.empty() ? std::vector<std::string>{"none"} : o.policies) {
        resolved.push_back(io::parse_policy(text, d));
        policies.push_back(resolved.back().policy);
    }
    SimulationConfig cfg;
    cfg.seed = o.seed;
    cfg.replications = o.reps;
    if (o.budget > 0.0) cfg.max_total_time = o.budget;
    cfg.threads = o.threads;
    const auto results = compare_policies(d, policies, cfg);

    if (!o.out.empty()) {
        std::ostringstream body;
        if (wants_json_file(o.out)) {
            body << io::simulation_report(d, cfg, resolved, results).dump(2) << '\n';
        } else {
            io::write_simulation_csv(body, resolved, results);
        }
        write_file(o.out, body.str());
    }
    if (c.json) {
        std::cout << io::simulation_report(d, cfg, resolved, results).dump(2) << '\n';
        return 0;
    }
    std::cout << "distribution: " << io::to_text(d) << '\n';
    std::cout << fmt::format("seed {}  replications {}  generator {}  budget {}\n", cfg.seed,
                             cfg.replications, kGeneratorName, human(results[0].max_total_time));
    std::cout << fmt::format("{:<16} {:>14} {:>12} {:>14} {:>10} {:>14}\n", "policy", "mean",
                             "std.err", "restarts", "censored", "analytic");
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        const auto& a = resolved[i].analytic;
        std::cout << fmt::format("{:<16} {:>14} {:>12} {:>14} {:>10} {:>14}\n", resolved[i].label,
                                 human(r.empirical_mean), human(r.std_error), r.total_restarts,
                                 r.censored_count, a ? human(*a) : std::string("-"));
    }
    for (const auto& r : results) {
        if (r.censored_count > 0) {
            std::cout << "note: censored replications hit the time budget and are excluded from "
                         "the mean\n";
            break;
        }
    }
    return 0;
}

void add_dist(CLI::App* cmd, Common& c) {
    cmd->add_option("dist", c.dist, "distribution: family=<lognormal|gp|weibull> key=value ...")
        ->required();
    cmd->add_flag("--json", c.json, "machine-readable JSON output");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Restart analysis for runtime distributions"};
    app.require_subcommand(1, 1);

    Common analyze_c, optimal_c, curve_c, sim_c, cmp_c;
    std::size_t grid_points = 2000;
    auto* analyze = app.add_subcommand("analyze", "decide whether fixed cut-off restarts help");
    add_dist(analyze, analyze_c);
    analyze->add_option("--grid", grid_points, "number of p levels in [1e-4, 1-1e-4]");

    auto* optimal = app.add_subcommand("optimal", "optimal restart quantile and time");
    add_dist(optimal, optimal_c);

    std::string sigma_range = "0.1:3:291";
    std::string region_p = "0.0001:0.9999:2000";
    std::string region_out;
    bool region_json = false;
    auto* region = app.add_subcommand("region", "log-normal usefulness region over (sigma, p)");
    region->add_option("--sigma", sigma_range, "sigma range lo:hi:n")->capture_default_str();
    region->add_option("--p", region_p, "p range lo:hi:m")->capture_default_str();
    region->add_option("--out", region_out, "output file (.csv or .json)");
    region->add_flag("--json", region_json, "JSON summary on stdout");

    std::string curve_p = "0.001:0.999:999";
    std::string curve_out;
    auto* curve = app.add_subcommand("curve", "expected runtime under restart as a function of p");
    add_dist(curve, curve_c);
    curve->add_option("--p", curve_p, "p range lo:hi:m")->capture_default_str();
    curve->add_option("--out", curve_out, "output file (.csv or .json)");

    SimOptions sim_o, cmp_o;
    auto add_sim = [](CLI::App* cmd, SimOptions& o) {
        cmd->add_option("--seed", o.seed, "master seed")->capture_default_str();
        cmd->add_option("--reps", o.reps, "replications per policy")->capture_default_str();
        cmd->add_option("--budget", o.budget, "per-replication time budget (default 1e6*Q(0.5))");
        cmd->add_option("--threads", o.threads, "worker threads")->capture_default_str();
        cmd->add_option("--out", o.out, "output file (.csv or .json)");
    };
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo runtime under one policy");
    add_dist(simulate_cmd, sim_c);
    simulate_cmd->add_option("--policy", sim_o.policies,
                             "none | fixed:<t> | fixed-q:<p> | luby:<base> | luby-q:<p> | optimal")
        ->expected(1);
    add_sim(simulate_cmd, sim_o);

    auto* compare_cmd = app.add_subcommand("compare", "Monte Carlo comparison of several policies");
    add_dist(compare_cmd, cmp_c);
    compare_cmd
        ->add_option("--policy", cmp_o.policies,
                     "none | fixed:<t> | fixed-q:<p> | luby:<base> | luby-q:<p> | optimal")
        ->required()
        ->take_all();
    add_sim(compare_cmd, cmp_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(analyze_c, grid_points);
        if (optimal->parsed()) return cmd_optimal(optimal_c);
        if (region->parsed()) return cmd_region(sigma_range, region_p, region_out, region_json);
        if (curve->parsed()) return cmd_curve(curve_c, curve_p, curve_out);
        if (simulate_cmd->parsed()) return cmd_simulate(sim_c, sim_o);
        if (compare_cmd->parsed()) return cmd_simulate(cmp_c, cmp_o);
    } catch (const NoImprovementError& e) {
        std::cerr << "no improvement: " << e.what() << '\n';
        return kExitNoImprovement;
    } catch (const io::SpecError& e) {
        if (e.key().empty()) {
            std::cerr << "error: " << e.what() << '\n';
        } else {
            std::cerr << "error [" << e.key() << "]: " << e.what() << '\n';
        }
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
