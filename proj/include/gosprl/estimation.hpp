#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gosprl/mdp.hpp"

namespace gosprl {

/**
 * Online visit statistics.  N(s,a) and N(s,a,s') accumulate over the whole
 * run; attempt_start(s,a) is the count at the start of the current attempt or
 * episode and attempt_visits(s,a) the count within it.
 */
class Counters {
 public:
  Counters(std::size_t n_states, std::size_t n_actions);

  void record(StateId s, ActionId a, StateId next);
  /// Closes the running attempt: U <- U + nu, nu <- 0.
  void begin_attempt();

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  std::uint64_t time() const noexcept { return time_; }

  std::uint64_t visits(StateId s, ActionId a) const { return visits_[index(s, a)]; }
  std::uint64_t state_visits(StateId s) const;
  std::uint64_t transitions(StateId s, ActionId a, StateId next) const {
    return transitions_[index(s, a) * n_states_ + next];
  }
  std::uint64_t attempt_start(StateId s, ActionId a) const { return start_[index(s, a)]; }
  std::uint64_t attempt_visits(StateId s, ActionId a) const { return within_[index(s, a)]; }

  /// Doubling rule: nu(s,a) > max{U(s,a), 1}.
  bool doubled(StateId s, ActionId a) const;

  const std::vector<std::uint64_t>& visit_table() const noexcept { return visits_; }
  std::span<const std::uint64_t> transition_row(StateId s, ActionId a) const {
    return {transitions_.data() + index(s, a) * n_states_, n_states_};
  }

 private:
  std::size_t index(StateId s, ActionId a) const;

  std::size_t n_states_;
  std::size_t n_actions_;
  std::uint64_t time_ = 0;
  std::vector<std::uint64_t> visits_;
  std::vector<std::uint64_t> transitions_;
  std::vector<std::uint64_t> start_;
  std::vector<std::uint64_t> within_;
};

/// alpha_p * (2 sqrt(var L / N+) + 6 L / N+) with L = ln(2 S A N+ / delta), N+ = max{1, N}.
double bernstein_radius(double n, double variance, std::size_t n_states, std::size_t n_actions,
                        double delta, double alpha_p);

/**
 * Empirical kernel plus per-entry confidence radii.  Rows of unvisited pairs
 * are all zeros with radius large enough to make every box [0, 1].
 */
class ConfidenceModel {
 public:
  ConfidenceModel(std::size_t n_states, std::size_t n_actions, std::vector<double> p_hat,
                  std::vector<double> radius);

  static ConfidenceModel from_counters(const Counters& counters, double delta, double alpha_p);
  /// Degenerate model: the true kernel with zero radii.
  static ConfidenceModel exact(const TabularMdp& mdp);

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }

  std::span<const double> p_hat(StateId s, ActionId a) const {
    return {p_hat_.data() + (s * n_actions_ + a) * n_states_, n_states_};
  }
  std::span<const double> radius(StateId s, ActionId a) const {
    return {radius_.data() + (s * n_actions_ + a) * n_states_, n_states_};
  }
  double variance(StateId s, ActionId a, StateId next) const {
    const double p = p_hat(s, a)[next];
    return p * (1.0 - p);
  }
  /// Sum over next states of the empirical standard deviation.
  double sigma_sum(StateId s, ActionId a) const;
  double sigma_max(StateId s, ActionId a) const;
  /// Largest empirical support size over all pairs, at least 1.
  std::size_t max_support() const;

  bool contains(const TabularMdp& mdp) const;

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  std::vector<double> p_hat_;
  std::vector<double> radius_;
};

}  // namespace gosprl
