#pragma once

#include <functional>
#include <optional>

#include "gosprl/agent.hpp"

namespace gosprl {

struct DiameterEstimate {
  double estimate = 0.0;
  double value_norm = 0.0;  // max entry of the optimistic hitting-time table
  double eta = 0.0;
  std::size_t rounds = 0;
  bool completed = true;
  std::uint64_t steps = 0;
  std::optional<ConfidenceModel> model;
};

struct DiameterEstimationOptions {
  double eps = 0.5;
  double delta = 0.1;
  /// Multiplier on the model-estimation budgets (1 = theory).
  double budget_scale = 1.0;
};

/**
 * Doubling search W = 1, 2, 4, ...: collect an eta/2-accurate model with
 * eta = eps / W, compute optimistic hitting times to every state, stop when
 * their maximum v is at most W and return (1 + 2 eta v) v.
 */
DiameterEstimate estimate_diameter(const TabularMdp& mdp, const DiameterEstimationOptions& opts,
                                   const GosprlConfig& cfg, std::uint64_t seed);

/// Empirical MDP from counters; unvisited pairs self-loop.
TabularMdp empirical_mdp(const Counters& counters, StateId start = 0);

struct GfcfPlanOptions {
  double eps = 0.5;
  double c_min = 0.5;
  double theta = std::numeric_limits<double>::infinity();
  double diameter_estimate = 1.0;
};

/// Costs used in the planning phase: c, or c + eps / (theta D) when c_min = 0.
CostTable gfcf_planning_costs(const CostTable& costs, const GfcfPlanOptions& opts);

/// Greedy optimal policy for `goal` on the empirical model with planning costs.
std::vector<ActionId> gfcf_plan(const TabularMdp& empirical, StateId goal, const CostTable& costs,
                                const GfcfPlanOptions& opts);

using RewardOracle = std::function<double(StateId, Rng&)>;
RewardOracle bernoulli_rewards(std::vector<double> means);
RewardOracle deterministic_rewards(std::vector<double> values);

/// 1/2 + sum_{i=1}^{K} 1/i.
double successive_rejects_log(std::size_t k);
/// Cumulative per-arm pulls n_1 <= ... <= n_{K-1}.
std::vector<std::uint64_t> successive_rejects_phases(std::size_t k, std::uint64_t n);

struct BestStateResult {
  StateId identified = 0;
  std::vector<std::uint64_t> phase_lengths;
  std::vector<StateId> rejected;
  std::vector<double> empirical_means;
  std::uint64_t reward_samples = 0;
  std::uint64_t steps = 0;
  bool completed = true;
};

/// Successive Rejects over states, with GOSPRL collecting each phase's visits.
BestStateResult best_state_identification(const TabularMdp& mdp, const RewardOracle& rewards, std::uint64_t n,
                                          const GosprlConfig& cfg, std::uint64_t seed);

}  // namespace gosprl
