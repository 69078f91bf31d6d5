#pragma once

#include <limits>
#include <vector>

#include "gosprl/mdp.hpp"

namespace gosprl {

/// Sentinel for targets that cannot be reached with probability one.
inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// Per-(s, a) cost table, indexed s * A + a.  An empty table means unit costs.
using CostTable = std::vector<double>;

/// Goal mask helper: goals[s] != 0 marks s as a goal.
std::vector<char> goal_mask(std::size_t n_states, const std::vector<StateId>& goals);

/**
 * States from which the goal set can be reached with probability one under
 * some stationary policy, and for each of them the actions that keep the
 * process inside that set.
 */
struct ProperSet {
  std::vector<char> proper;
  std::vector<char> allowed;  // indexed s * A + a
};
ProperSet proper_states(const TabularMdp& mdp, const std::vector<char>& goals);

/**
 * Optimal SSP values by value iteration on the goal-absorbing MDP.  Goal
 * entries are 0; states with no proper policy get kUnreachable.
 */
std::vector<double> exact_ssp_values(const TabularMdp& mdp, const std::vector<char>& goals,
                                     const CostTable& costs = {}, double tol = 1e-10);

/// Greedy policy with respect to `values` (ties to the lowest action index).
std::vector<ActionId> greedy_ssp_policy(const TabularMdp& mdp, const std::vector<char>& goals,
                                        const CostTable& costs, const std::vector<double>& values);

/// Expected cost-to-go of a fixed stationary policy (kUnreachable if improper).
std::vector<double> evaluate_ssp_policy(const TabularMdp& mdp, const std::vector<char>& goals,
                                        const CostTable& costs, const std::vector<ActionId>& policy,
                                        double tol = 1e-10);

struct DiameterResult {
  double diameter = 0.0;
  std::vector<double> per_state;  // D_s: worst expected hitting time of s
  bool communicating = true;
};
DiameterResult diameter(const TabularMdp& mdp, double tol = 1e-10);

struct ReachabilityReport {
  std::size_t n_states = 0;
  std::vector<char> reach;  // reach[from * S + to]
  bool communicating = true;

  bool reachable(StateId from, StateId to) const { return reach[from * n_states + to] != 0; }
};
ReachabilityReport check_communicating(const TabularMdp& mdp);

}  // namespace gosprl
