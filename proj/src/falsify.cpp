#include "dwsafe/falsify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dwsafe {

Scenario mutate_margin(const Scenario& scenario, double kappa) {
    if (!(kappa > 0.0 && kappa <= 1.0))
        throw std::invalid_argument("mutate_margin: kappa must be in (0, 1]");
    Scenario out = scenario;
    out.margin_factor = kappa;
    return out;
}

namespace {

constexpr ObstaclePolicyKind kPolicyPool[] = {
    ObstaclePolicyKind::kRandom,
    ObstaclePolicyKind::kHeadOn,
    ObstaclePolicyKind::kPursuit,
    ObstaclePolicyKind::kBlocker,
};

// One randomized episode derived from the template: fresh seed, sampled flow
// durations, sampled (or hill-climb proposed) obstacle placement, and on odd
// trials a sampled adversary policy.
Scenario derive_trial(const Scenario& tmpl, const std::vector<Vec2>& placement_center,
                      double radius, int trial, std::uint64_t seed) {
    Scenario s = tmpl;
    s.seed = mix_seed(seed, static_cast<std::uint64_t>(trial));
    s.random_cycle_time = true;
    if (trial == 0) return s;  // the unperturbed template is always trial 0
    Rng rng(mix_seed(s.seed, 0x5eed));
    if (trial % 2 == 1)
        s.policy = kPolicyPool[rng.below(std::size(kPolicyPool))];
    for (int attempt = 0; attempt < 20; ++attempt) {
        for (size_t i = 0; i < s.obstacles.size(); ++i) {
            const double angle = rng.uniform(0.0, 2.0 * M_PI);
            const double r = radius * std::sqrt(rng.next_double());
            s.obstacles[i].p = placement_center[i] + r * Vec2{std::cos(angle), std::sin(angle)};
        }
        if (validate_scenario(s).empty()) return s;
    }
    // Fall back to the template placement when sampling kept violating the
    // initial condition.
    for (size_t i = 0; i < s.obstacles.size(); ++i) s.obstacles[i].p = tmpl.obstacles[i].p;
    return s;
}

}  // namespace

FalsificationResult falsify(const Scenario& scenario_template, int budget, std::uint64_t seed,
                            int threads) {
    {
        const auto violations = validate_scenario(scenario_template);
        if (!violations.empty())
            throw std::invalid_argument("invalid template: " + violations.front());
    }
    FalsificationResult result;
    RunOptions options;
    options.record_trace = false;
    options.check_invariants = false;

    std::vector<Vec2> best_placement;
    best_placement.reserve(scenario_template.obstacles.size());
    for (const auto& o : scenario_template.obstacles) best_placement.push_back(o.p);
    double placement_radius = 1.0;

    const int workers = effective_thread_count(threads);
    const int batch = std::max(1, workers * 8);
    std::vector<Scenario> trials;
    std::vector<int> trial_ids;
    for (int done = 0; done < budget && !result.found;) {
        const int n = std::min(batch, budget - done);
        trials.clear();
        trial_ids.clear();
        for (int j = 0; j < n; ++j) {
            trials.push_back(
                derive_trial(scenario_template, best_placement, placement_radius, done + j, seed));
            trial_ids.push_back(done + j);
        }
        const std::vector<RunResult> results = run_batch(trials, options, threads);
        double batch_best = std::numeric_limits<double>::infinity();
        int batch_best_index = -1;
        for (int j = 0; j < n; ++j) {
            const RunSummary& s = results[j].summary;
            const double objective = s.min_moving_distance;
            if (objective < batch_best) {
                batch_best = objective;
                batch_best_index = j;
            }
            if (s.psi_violation && !result.found) {
                result.found = true;
                result.violating_trial = trial_ids[j];
                result.counterexample_scenario = trials[j];
            }
            if (s.near_miss) result.near_miss = true;
        }
        // (1+1) step: adopt the batch's best placement, shrink the proposal
        // radius on improvement, widen it otherwise.
        if (batch_best < result.best_objective) {
            result.best_objective = batch_best;
            for (size_t i = 0; i < best_placement.size(); ++i)
                best_placement[i] = trials[batch_best_index].obstacles[i].p;
            placement_radius = std::max(0.1, placement_radius * 0.7);
        } else {
            placement_radius = std::min(4.0, placement_radius * 1.3);
        }
        done += n;
        result.trials = done;
    }

    if (result.found) {
        RunOptions replay = options;
        replay.record_trace = true;
        result.counterexample = run(*result.counterexample_scenario, replay).trace;
    }
    return result;
}

}  // namespace dwsafe
