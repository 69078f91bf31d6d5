#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gosprl/planner.hpp"
#include "gosprl/session.hpp"

namespace gosprl {

enum class GoalStrategy { all_undersampled, least_sampled, best_success_ratio };
/// Goal restriction while every state is under-sampled.
enum class InitialPhase { none, min_remaining_budget, max_remaining_budget };
enum class CostRule { unit, static_state_costs, visitation_penalty };

GoalStrategy parse_goal_strategy(const std::string& name);
InitialPhase parse_initial_phase(const std::string& name);
CostRule parse_cost_rule(const std::string& name);
std::string to_string(GoalStrategy g);
std::string to_string(InitialPhase p);
std::string to_string(CostRule c);

struct GosprlConfig {
  double delta = 0.1;
  double alpha_p = 1.0;
  /// Plan on the true kernel (zero-radius confidence sets).
  bool known_dynamics = false;
  GoalStrategy goal_strategy = GoalStrategy::all_undersampled;
  InitialPhase initial_phase = InitialPhase::min_remaining_budget;
  CostRule cost_rule = CostRule::unit;
  double max_cost = 10.0;  // c-bar of the visitation penalty
  std::uint64_t step_cap = 0;  // 0: 10 (B S A + S^3 A)
  std::uint64_t log_every = 10;
  bool log_model_error = false;
  std::size_t evi_max_iterations = 1'000'000;
};

/// 10 (B S A + S^3 A) with B the largest envelope entry.
std::uint64_t default_step_cap(const TabularMdp& mdp, const RequirementSchedule& schedule);

struct GoalSetContext {
  GoalStrategy strategy = GoalStrategy::all_undersampled;
  InitialPhase initial_phase = InitialPhase::none;
  const std::vector<std::uint64_t>* attempted = nullptr;
  const std::vector<std::uint64_t>* succeeded = nullptr;
};

/// Under-sampled states, narrowed by the strategy and the initial-phase rule.
std::vector<StateId> compute_goal_set(const Counters& counters, const RequirementSchedule& schedule,
                                      const GoalSetContext& ctx = {});

/// Per-(s, a) planning costs under a cost rule.
CostTable planning_costs(const TabularMdp& mdp, const Counters& counters, const RequirementSchedule& schedule,
                         CostRule rule, double max_cost);

/// Threshold of the restricted variant: alpha j L + alpha j L^{3/2} S^2 A.
double threshold_phi(std::size_t j, double L, std::size_t n_states, std::size_t n_actions, double alpha);

/**
 * Resumable GOSPRL agent.  Counters and the environment state persist
 * across calls to collect(), so drivers can issue successive requirements.
 */
class Gosprl {
 public:
  Gosprl(const TabularMdp& mdp, RequirementSchedule& schedule, const GosprlConfig& cfg, std::uint64_t seed);

  /// Runs attempts until the current requirement is met (true) or the step cap is hit (false).
  bool collect();
  bool collect(RequirementSchedule& schedule);

  /// Enables the restricted variant: stop when t > threshold_phi(j, L, ...).
  void set_threshold(double L, double alpha);
  bool threshold_exceeded() const noexcept { return threshold_hit_; }

  ExplorationSession& session() noexcept { return session_; }
  const ConfidenceModel planning_model() const;
  RunTrace finish();

 private:
  bool run_attempt();
  ActionId goal_action(StateId g, const std::vector<char>& allowed = {}) const;
  bool after_step(bool was_needed);

  const TabularMdp* mdp_;
  GosprlConfig cfg_;
  ExplorationSession session_;
  std::vector<std::uint64_t> attempted_;
  std::vector<std::uint64_t> succeeded_;
  std::optional<double> threshold_L_;
  double threshold_alpha_ = 1.0;
  std::size_t desired_samples_ = 0;
  bool threshold_hit_ = false;
  bool done_ = false;
};

RunTrace run_gosprl(const TabularMdp& mdp, RequirementSchedule schedule, const GosprlConfig& cfg,
                    std::uint64_t seed);

RunTrace run_gosprl_l(const TabularMdp& mdp, RequirementSchedule schedule, double L, double alpha,
                      const GosprlConfig& cfg, std::uint64_t seed);

}  // namespace gosprl
