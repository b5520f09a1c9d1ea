// dwsafe: provably-safe ground-robot obstacle avoidance, executable edition.
// Subcommands: validate, simulate, tables, check-trace, falsify, liveness.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dwsafe/falsify.hpp"
#include "dwsafe/liveness.hpp"
#include "dwsafe/monitor.hpp"
#include "dwsafe/simulate.hpp"
#include "dwsafe/tables.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

struct CommonArgs {
    std::string scenario_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;  // key=value on WorldParams
    std::string mode;
    std::vector<std::string> refinements;
};

// Loads the scenario file and applies command-line overrides on top.
bool resolve_scenario(const CommonArgs& args, dwsafe::Scenario* scenario, std::string* error) {
    if (args.scenario_path.empty()) {
        *error = "missing --scenario";
        return false;
    }
    if (!dwsafe::load_scenario(args.scenario_path, scenario, error)) return false;
    for (const std::string& kv : args.overrides) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            *error = "--set expects key=value, got '" + kv + "'";
            return false;
        }
        const std::string key = kv.substr(0, eq);
        double value;
        try {
            value = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
            *error = "--set " + key + ": bad value";
            return false;
        }
        if (!scenario->params.set_field(key, value)) {
            *error = "--set: unknown parameter '" + key + "'";
            return false;
        }
    }
    if (!args.mode.empty() && !dwsafe::parse_mode(args.mode, &scenario->mode)) {
        *error = "unknown mode '" + args.mode + "'";
        return false;
    }
    for (const std::string& r : args.refinements) {
        dwsafe::Refinement ref;
        if (!dwsafe::parse_refinement(r, &ref)) {
            *error = "unknown refinement '" + r + "'";
            return false;
        }
        scenario->refinements.add(ref);
    }
    if (args.seed) scenario->seed = *args.seed;
    return true;
}

void print_summary(const dwsafe::RunSummary& s) {
    std::printf("steps: %d\n", s.steps);
    std::printf("model time: %.6f s\n", s.model_time);
    std::printf("min distance while moving: %.9g m\n", s.min_moving_distance);
    std::printf("min distance overall: %.9g m\n", s.min_distance);
    std::printf("stops: %d\n", s.stops);
    std::printf("ended stopped: %s\n", s.ended_stopped ? "true" : "false");
    std::printf("loop invariant failures: %d\n", s.loop_invariant_failures);
    std::printf("differential invariant failures: %d\n", s.diff_invariant_failures);
    if (s.near_miss) std::printf("near miss: closest approach below 1e-3 m\n");
    if (s.time_to_goal >= 0.0) std::printf("time to goal: %.6f s\n", s.time_to_goal);
    std::printf("safety violation: %s\n", s.psi_violation ? "true" : "false");
    if (s.psi_violation)
        std::printf("violation: step %d, %s\n", s.violation_step, s.violation_what.c_str());
}

void print_goal_outcome(const dwsafe::Scenario& scenario, const dwsafe::RunSummary& s) {
    switch (scenario.goal.kind) {
        case dwsafe::GoalSpec::Kind::kWaypoint:
            std::printf("stopped inside goal region: %s\n", s.reached_goal ? "true" : "false");
            if (scenario.goal.waypoint.deadline)
                std::printf("stopped before deadline: %s\n", s.deadline_met ? "true" : "false");
            break;
        case dwsafe::GoalSpec::Kind::kIntersection:
            std::printf("passed intersection: %s\n",
                        s.passed_intersection ? "true" : "false");
            if (scenario.goal.intersection.deadline)
                std::printf("passed before deadline: %s\n", s.deadline_met ? "true" : "false");
            break;
        default: break;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dwsafe: verified-controller obstacle avoidance sandbox"};
    app.require_subcommand(1);
    CommonArgs args;
    int budget = 10000;
    double kappa = 1.0;
    bool strict_monitor = false;
    std::string trace_path;
    std::string liveness_kind_text = "waypoint";
    int grid_points = 100;
    std::vector<std::string> custom_rows;

    auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
        if (needs_scenario) cmd->add_option("--scenario", args.scenario_path, "scenario file");
        cmd->add_option("--out", args.out_path, "output path");
        cmd->add_option("--seed", args.seed, "random seed override");
        cmd->add_option("--set", args.overrides, "parameter override key=value")
            ->take_all();
        cmd->add_option("--mode", args.mode, "safety mode override");
        cmd->add_option("--refine", args.refinements, "refinement flag (repeatable)")
            ->take_all();
    };

    CLI::App* validate_cmd = app.add_subcommand("validate", "check a scenario file");
    add_common(validate_cmd, true);

    CLI::App* simulate_cmd = app.add_subcommand("simulate", "run one episode and report");
    add_common(simulate_cmd, true);

    CLI::App* tables_cmd =
        app.add_subcommand("tables", "safe-distance and maximum-velocity tables");
    tables_cmd->add_option("--custom", custom_rows,
                           "extra row: mode,v_or_dist,A,b,V,eps,kind(dist|vel)")
        ->take_all();

    CLI::App* check_cmd = app.add_subcommand("check-trace", "controller-monitor compliance");
    check_cmd->add_option("trace", trace_path, "trace CSV")->required();
    add_common(check_cmd, true);
    check_cmd->add_flag("--strict-monitor", strict_monitor,
                        "keep obstacle-position equality in brake/stay branches");

    CLI::App* falsify_cmd = app.add_subcommand("falsify", "adversarial search for violations");
    add_common(falsify_cmd, true);
    falsify_cmd->add_option("--budget", budget, "episode budget");
    falsify_cmd->add_option("--kappa", kappa, "margin mutation factor in (0,1]");

    CLI::App* liveness_cmd = app.add_subcommand("liveness", "goal-reaching grids");
    liveness_cmd->add_option("--kind", liveness_kind_text,
                             "waypoint|waypoint-deadline|intersection|intersection-deadline");
    liveness_cmd->add_option("--grid", grid_points, "number of grid points");
    liveness_cmd->add_option("--seed", args.seed, "random seed");
    liveness_cmd->add_option("--out", args.out_path, "report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (validate_cmd->parsed()) {
            dwsafe::Scenario scenario;
            std::string error;
            if (!resolve_scenario(args, &scenario, &error)) {
                std::fprintf(stderr, "error: %s\n", error.c_str());
                return kExitUsage;
            }
            const auto violations = dwsafe::validate_scenario(scenario);
            if (violations.empty()) {
                std::printf("valid\n");
                return kExitOk;
            }
            for (const auto& v : violations) std::printf("violation: %s\n", v.c_str());
            return kExitUsage;
        }

        if (simulate_cmd->parsed()) {
            dwsafe::Scenario scenario;
            std::string error;
            if (!resolve_scenario(args, &scenario, &error)) {
                std::fprintf(stderr, "error: %s\n", error.c_str());
                return kExitUsage;
            }
            if (const auto violations = dwsafe::validate_scenario(scenario); !violations.empty()) {
                for (const auto& v : violations)
                    std::fprintf(stderr, "invalid scenario: %s\n", v.c_str());
                return kExitUsage;
            }
            dwsafe::RunOptions options;
            options.record_trace = !args.out_path.empty();
            const dwsafe::RunResult result = dwsafe::run(scenario, options);
            if (!args.out_path.empty()) {
                if (!dwsafe::write_trace_csv(result.trace, args.out_path, &error)) {
                    std::fprintf(stderr, "error: %s\n", error.c_str());
                    return kExitUsage;
                }
                std::printf("trace: %s\n", args.out_path.c_str());
            }
            print_summary(result.summary);
            print_goal_outcome(scenario, result.summary);
            return result.summary.psi_violation ? kExitViolation : kExitOk;
        }

        if (tables_cmd->parsed()) {
            std::string out;
            out += dwsafe::format_tables(dwsafe::static_min_distance_table(),
                                         "static safety: minimum safe distance", false);
            out += dwsafe::format_tables(dwsafe::static_max_velocity_table(),
                                         "static safety: maximum velocity", true);
            out += dwsafe::format_tables(dwsafe::passive_min_distance_table(),
                                         "passive safety: minimum safe distance", false);
            out += dwsafe::format_tables(dwsafe::passive_max_velocity_table(),
                                         "passive safety: maximum velocity", true);
            for (const std::string& row : custom_rows) {
                std::istringstream in(row);
                std::string mode_text, kind;
                double v, A, b, V, eps;
                char comma;
                std::getline(in, mode_text, ',');
                in >> v >> comma >> A >> comma >> b >> comma >> V >> comma >> eps >> comma;
                std::getline(in, kind);
                dwsafe::SafetyMode mode;
                if (!dwsafe::parse_mode(mode_text, &mode) || !in) {
                    std::fprintf(stderr, "bad --custom row: %s\n", row.c_str());
                    return kExitUsage;
                }
                const dwsafe::TableRow r =
                    kind == "vel" ? dwsafe::make_velocity_row(mode, v, A, b, V, eps)
                                  : dwsafe::make_distance_row(mode, v, A, b, V, eps);
                out += dwsafe::format_tables({r}, "custom row", kind == "vel");
            }
            std::fputs(out.c_str(), stdout);
            return kExitOk;
        }

        if (check_cmd->parsed()) {
            dwsafe::WorldParams params;
            if (!args.scenario_path.empty()) {
                dwsafe::Scenario scenario;
                std::string error;
                if (!resolve_scenario(args, &scenario, &error)) {
                    std::fprintf(stderr, "error: %s\n", error.c_str());
                    return kExitUsage;
                }
                params = scenario.params;
            } else {
                for (const std::string& kv : args.overrides) {
                    const size_t eq = kv.find('=');
                    if (eq == std::string::npos ||
                        !params.set_field(kv.substr(0, eq), std::stod(kv.substr(eq + 1)))) {
                        std::fprintf(stderr, "bad --set: %s\n", kv.c_str());
                        return kExitUsage;
                    }
                }
            }
            dwsafe::Trace trace;
            std::string error;
            if (!dwsafe::read_trace_csv(trace_path, &trace, &error)) {
                std::fprintf(stderr, "malformed trace: %s\n", error.c_str());
                return kExitUsage;
            }
            dwsafe::MonitorOptions mon;
            mon.strict_obstacle_equality = strict_monitor;
            const dwsafe::TraceComplianceReport report =
                dwsafe::check_trace(trace, params, mon);
            std::fputs(report.to_text().c_str(), stdout);
            if (!strict_monitor) {
                dwsafe::MonitorOptions strict;
                strict.strict_obstacle_equality = true;
                const auto strict_report = dwsafe::check_trace(trace, params, strict);
                std::printf("strict mode: %s (%d/%d steps fail)\n",
                            strict_report.pass ? "COMPLIANT" : "VIOLATION",
                            strict_report.failures, strict_report.steps_checked);
            }
            return report.pass ? kExitOk : kExitViolation;
        }

        if (falsify_cmd->parsed()) {
            dwsafe::Scenario scenario;
            std::string error;
            if (!resolve_scenario(args, &scenario, &error)) {
                std::fprintf(stderr, "error: %s\n", error.c_str());
                return kExitUsage;
            }
            if (kappa != 1.0) scenario = dwsafe::mutate_margin(scenario, kappa);
            const std::uint64_t seed = args.seed.value_or(scenario.seed);
            const dwsafe::FalsificationResult result =
                dwsafe::falsify(scenario, budget, seed);
            std::printf("trials: %d\n", result.trials);
            std::printf("best objective: %.9f m\n", result.best_objective);
            std::printf("found: %s\n", result.found ? "true" : "false");
            if (result.near_miss) std::printf("near misses below 1e-3 m observed\n");
            if (result.found) {
                std::printf("violating trial: %d\n", result.violating_trial);
                if (!args.out_path.empty()) {
                    if (!dwsafe::write_trace_csv(*result.counterexample, args.out_path, &error)) {
                        std::fprintf(stderr, "error: %s\n", error.c_str());
                        return kExitUsage;
                    }
                    std::ofstream meta(args.out_path + ".meta");
                    meta << "seed = " << seed << "\n"
                         << "kappa = " << kappa << "\n"
                         << "trial = " << result.violating_trial << "\n"
                         << "objective = " << result.best_objective << "\n"
                         << "scenario:\n"
                         << dwsafe::scenario_to_text(*result.counterexample_scenario);
                    std::printf("counterexample: %s (+.meta)\n", args.out_path.c_str());
                }
            }
            return result.found ? kExitViolation : kExitOk;
        }

        if (liveness_cmd->parsed()) {
            dwsafe::LivenessKind kind;
            if (!dwsafe::parse_liveness_kind(liveness_kind_text, &kind)) {
                std::fprintf(stderr, "unknown liveness kind: %s\n", liveness_kind_text.c_str());
                return kExitUsage;
            }
            const dwsafe::LivenessOutcome outcome =
                dwsafe::run_liveness_grid(kind, grid_points, args.seed.value_or(7));
            const std::string report = dwsafe::format_liveness_report(kind, outcome);
            std::fputs(report.c_str(), stdout);
            if (!args.out_path.empty()) {
                std::ofstream out(args.out_path);
                out << report;
            }
            return outcome.all_passed() ? kExitOk : kExitViolation;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
