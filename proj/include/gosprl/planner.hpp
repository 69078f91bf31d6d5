#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gosprl/estimation.hpp"
#include "gosprl/solvers.hpp"

namespace gosprl {

/**
 * Point of {p : max(0, p_hat - beta) <= p <= min(1, p_hat + beta), sum p = 1}
 * minimizing p . values.  Mass above the lower bounds goes to the lowest-value
 * coordinates first (ties by index).
 */
std::vector<double> inner_min_distribution(std::span<const double> p_hat, std::span<const double> beta,
                                           std::span<const double> values);
/// Mirror image of inner_min_distribution: maximizes p . values.
std::vector<double> inner_max_distribution(std::span<const double> p_hat, std::span<const double> beta,
                                           std::span<const double> values);

struct EviOptions {
  double precision = 1e-6;
  std::size_t max_iterations = 1'000'000;
  /// Plan additionally for a non-goal copy of this state (same outgoing rows).
  std::optional<StateId> virtual_copy_of;
};

struct SspPlan {
  std::vector<ActionId> policy;  // meaningful at non-goal states
  std::vector<double> values;    // 0 at goals
  std::vector<char> goals;
  std::size_t iterations = 0;
  double precision = 0.0;
  std::optional<ActionId> copy_action;
  double copy_value = 0.0;
  std::vector<double> copy_q;  // per-action values at the copy
};

/**
 * Extended value iteration for the goal-absorbing SSP, starting from 0:
 *   v(s) <- min_a { c(s,a) + min_{p in B(s,a)} p . v }
 * until the sup-norm change is at most `precision`.  The policy is greedy
 * with respect to the returned values.
 */
SspPlan evi_ssp(const ConfidenceModel& model, const std::vector<char>& goals, const CostTable& costs,
                const EviOptions& opts);

struct AvgRewardOptions {
  double span_tol = 1e-6;
  std::size_t max_iterations = 1'000'000;
  /// Weight kappa of the aperiodicity transform p <- kappa p + (1 - kappa) I.
  double aperiodicity = 0.9;
};

struct AvgRewardPlan {
  std::vector<ActionId> policy;
  std::vector<double> bias;
  double gain = 0.0;
  std::size_t iterations = 0;
};

/// Optimistic average-reward value iteration (inner maximization); rewards indexed s * A + a.
AvgRewardPlan evi_avg_reward(const ConfidenceModel& model, const std::vector<double>& rewards,
                             const AvgRewardOptions& opts);

}  // namespace gosprl
