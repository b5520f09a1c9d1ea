#pragma once

#include <cstdint>
#include <optional>

#include "dwsafe/simulate.hpp"

namespace dwsafe {

struct FalsificationResult {
    bool found = false;
    std::optional<Trace> counterexample;
    std::optional<Scenario> counterexample_scenario;  // replayable: run() reproduces the violation
    int trials = 0;
    double best_objective = std::numeric_limits<double>::infinity();
    int violating_trial = -1;
    bool near_miss = false;  // best objective dipped below the near-miss threshold
};

// Returns a copy of the scenario whose controller guard uses
// kappa * safe_distance; the safety checkers keep the true predicate.
// Throws std::invalid_argument unless kappa is in (0, 1].
Scenario mutate_margin(const Scenario& scenario, double kappa);

// Randomized adversarial search: up to `budget` episodes over sampled
// initial obstacle placements, policies, flow durations, and uncertainty
// draws, with a (1+1) hill-climb on obstacle placement minimizing the
// minimum moving distance. Returns the lowest-trial-index violation.
FalsificationResult falsify(const Scenario& scenario_template, int budget, std::uint64_t seed,
                            int threads = 0);

}  // namespace dwsafe
