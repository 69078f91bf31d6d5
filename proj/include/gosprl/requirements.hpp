#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gosprl/estimation.hpp"

namespace gosprl {

enum class ModestNorm { l1, linf };

/// Unrounded model-estimation budget
///   57 X^2/eta^2 ln^2(8e X^2 sqrt(2SA) / (sqrt(delta) eta)) + 24 Y/eta ln(24 Y S A / (delta eta)),
/// with the first term taken as 0 when X = 0.
double modest_phi(double x, double y, std::size_t n_states, std::size_t n_actions, double eta,
                  double delta);

/// Per-pair budget matrix ceil(scale * phi) at the model's current variances.
std::vector<std::uint64_t> modest_budget(const ConfidenceModel& model, double eta, double delta,
                                         ModestNorm norm, double scale = 1.0);

/// omega = max{c_min, eps / (theta D)}; theta may be +infinity.
double gfcf_omega(double c_min, double eps, double theta, double diameter_estimate);

/// Allocation function of goal-free cost-free exploration, alpha * phi(X, y).
double gfcf_phi(double x, double y, double gamma, std::size_t n_states, std::size_t n_actions, double eps,
                double delta, double alpha);

/// ceil(ln(2SA/delta) / (2 eps^2)).
std::uint64_t reward_estimation_budget(std::size_t n_states, std::size_t n_actions, double eps,
                                       double delta);

struct ModestParams {
  double eta = 1.0;
  double delta = 0.1;
  ModestNorm norm = ModestNorm::l1;
  double scale = 1.0;    // alpha_b
  bool halving = false;  // eta <- eta / 2 each time the budget is met
};

struct GfcfParams {
  double diameter_estimate = 1.0;
  double eps = 0.5;
  double delta = 0.1;
  double c_min = 0.5;
  double theta = std::numeric_limits<double>::infinity();
  double alpha = 1.0;
};

/**
 * Sampling requirement b_t, either per pair or per state.  Adaptive kinds are
 * refreshed from the counters after every transition; all kinds report a
 * finite envelope.
 */
class RequirementSchedule {
 public:
  enum class Kind { fixed, treasure, modest, gfcf, reward_est };

  static RequirementSchedule fixed(std::size_t n_states, std::size_t n_actions,
                                   std::vector<std::uint64_t> per_pair);
  static RequirementSchedule fixed_states(std::size_t n_states, std::size_t n_actions,
                                          std::vector<std::uint64_t> per_state);
  static RequirementSchedule treasure(std::size_t n_states, std::size_t n_actions, std::uint64_t k = 1);
  /// Independent integers uniform on {lo, ..., hi} per pair.
  static RequirementSchedule uniform_random(std::size_t n_states, std::size_t n_actions, std::uint64_t lo,
                                            std::uint64_t hi, std::uint64_t seed);
  static RequirementSchedule reward_estimation(std::size_t n_states, std::size_t n_actions, double eps,
                                               double delta);
  static RequirementSchedule modest(std::size_t n_states, std::size_t n_actions, const ModestParams& p);
  static RequirementSchedule gfcf(std::size_t n_states, std::size_t n_actions, const GfcfParams& p);
  /// CSV with one row per state: one column (state requirement) or A columns.
  static RequirementSchedule load_csv(const std::string& path, std::size_t n_states, std::size_t n_actions);

  Kind kind() const noexcept { return kind_; }
  bool state_only() const noexcept { return state_only_; }
  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }

  /// Recomputes adaptive budgets from scratch.
  void refresh(const Counters& counters);
  /// Updates adaptive budgets after a transition out of (s, a).
  void observe(const Counters& counters, StateId s, ActionId a);
  /// Moves to the next stage of a staged schedule; false when there is none.
  bool tighten(const Counters& counters);

  /// Per-pair requirement (0 for state-only schedules).
  std::uint64_t required(StateId s, ActionId a) const;
  /// Per-state requirement (sum over actions for per-pair schedules).
  std::uint64_t required_state(StateId s) const;

  bool pair_undersampled(const Counters& c, StateId s, ActionId a) const;
  bool undersampled(const Counters& c, StateId s) const;
  bool satisfied(const Counters& c) const;
  /// Remaining budget: b(s) - N(s), or sum_a max{b(s,a) - N(s,a), 0}.
  std::uint64_t remaining(const Counters& c, StateId s) const;
  /// Signed gap b - N used to pick the action at a reached goal.
  double gap(const Counters& c, StateId s, ActionId a) const;

  std::uint64_t envelope(StateId s, ActionId a) const;
  std::uint64_t max_envelope() const;
  /// Current requirement table: S*A entries, or S entries when state-only.
  const std::vector<std::uint64_t>& table() const noexcept { return b_; }

  double eta() const noexcept { return modest_.eta; }
  std::size_t stage() const noexcept { return stage_; }
  std::string describe() const;

 private:
  RequirementSchedule(Kind kind, std::size_t n_states, std::size_t n_actions, bool state_only);
  std::uint64_t modest_pair(const Counters& c, StateId s, ActionId a) const;
  std::uint64_t gfcf_value() const;

  Kind kind_;
  std::size_t n_states_;
  std::size_t n_actions_;
  bool state_only_;
  std::vector<std::uint64_t> b_;
  std::vector<std::uint64_t> envelope_;
  ModestParams modest_;
  GfcfParams gfcf_;
  std::size_t support_max_ = 1;
  std::size_t stage_ = 0;
  std::string label_;
};

}  // namespace gosprl
