#pragma once

#include <string>

#include "gosprl/agent.hpp"

namespace gosprl {

enum class UcrlMode { zero_one, zero };
enum class MaxEntMode { entropy, min_frequency, weighted };

/// Uniformly random actions until the requirement is met or the cap is hit.
RunTrace run_random(const TabularMdp& mdp, RequirementSchedule schedule, const GosprlConfig& cfg,
                    std::uint64_t seed);

/**
 * Optimistic average-reward agent with synthetic rewards: 1 on under-sampled
 * pairs (zero_one) or min{1, ([N - b]+)^(-1/2)} (zero).  Replans when a pair's
 * in-episode count exceeds max{1, its count at episode start}.
 */
RunTrace run_ucrl_variant(const TabularMdp& mdp, RequirementSchedule schedule, UcrlMode mode,
                          const GosprlConfig& cfg, std::uint64_t seed);

/// Rewards used by run_ucrl_variant for the current counts.
std::vector<double> ucrl_rewards(const Counters& counters, const RequirementSchedule& schedule, UcrlMode mode);

/**
 * Frank-Wolfe style agent: each epoch plans for the gradient of an objective of
 * the smoothed state-action frequencies (entropy, minimum frequency, or
 * variance-weighted entropy).
 */
RunTrace run_maxent(const TabularMdp& mdp, RequirementSchedule schedule, MaxEntMode mode,
                    const GosprlConfig& cfg, std::uint64_t seed);

/// Smoothed frequencies (N(s,a) + 1/(SA)) / (t + 1).
std::vector<double> smoothed_frequencies(const Counters& counters);
std::vector<double> maxent_rewards(const Counters& counters, const ConfidenceModel& model, MaxEntMode mode);

UcrlMode parse_ucrl_mode(const std::string& name);
MaxEntMode parse_maxent_mode(const std::string& name);

}  // namespace gosprl
