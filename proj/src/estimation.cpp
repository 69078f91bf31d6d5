#include "gosprl/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gosprl/error.hpp"

namespace gosprl {

Counters::Counters(std::size_t n_states, std::size_t n_actions)
    : n_states_(n_states),
      n_actions_(n_actions),
      visits_(n_states * n_actions, 0),
      transitions_(n_states * n_actions * n_states, 0),
      start_(n_states * n_actions, 0),
      within_(n_states * n_actions, 0) {
  if (n_states == 0 || n_actions == 0) throw ParameterError("counters need S, A >= 1");
}

std::size_t Counters::index(StateId s, ActionId a) const {
  if (s >= n_states_ || a >= n_actions_) throw IndexError("state or action out of range");
  return s * n_actions_ + a;
}

void Counters::record(StateId s, ActionId a, StateId next) {
  const std::size_t i = index(s, a);
  if (next >= n_states_) throw IndexError("next state out of range");
  ++time_;
  ++visits_[i];
  ++transitions_[i * n_states_ + next];
  ++within_[i];
}

void Counters::begin_attempt() {
  for (std::size_t i = 0; i < start_.size(); ++i) {
    start_[i] += within_[i];
    within_[i] = 0;
  }
}

std::uint64_t Counters::state_visits(StateId s) const {
  std::uint64_t total = 0;
  for (ActionId a = 0; a < n_actions_; ++a) total += visits(s, a);
  return total;
}

bool Counters::doubled(StateId s, ActionId a) const {
  const std::size_t i = index(s, a);
  return within_[i] > std::max<std::uint64_t>(start_[i], 1);
}

double bernstein_radius(double n, double variance, std::size_t n_states, std::size_t n_actions,
                        double delta, double alpha_p) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0,1)");
  if (!(alpha_p > 0.0)) throw ParameterError("alpha_p must be positive");
  if (!(variance >= 0.0 && variance <= 0.25 + 1e-12)) throw ParameterError("variance outside [0, 1/4]");
  const double np = std::max(1.0, n);
  const double L = std::log(2.0 * static_cast<double>(n_states * n_actions) * np / delta);
  return alpha_p * (2.0 * std::sqrt(variance * L / np) + 6.0 * L / np);
}

ConfidenceModel::ConfidenceModel(std::size_t n_states, std::size_t n_actions,
                                 std::vector<double> p_hat, std::vector<double> radius)
    : n_states_(n_states), n_actions_(n_actions), p_hat_(std::move(p_hat)), radius_(std::move(radius)) {
  const std::size_t n = n_states * n_actions * n_states;
  if (p_hat_.size() != n || radius_.size() != n) throw ValidationError("confidence model size mismatch");
  for (double b : radius_) {
    if (!(b >= 0.0)) throw ValidationError("negative confidence radius");
  }
}

ConfidenceModel ConfidenceModel::from_counters(const Counters& c, double delta, double alpha_p) {
  const std::size_t S = c.n_states(), A = c.n_actions();
  std::vector<double> p(S * A * S, 0.0), beta(S * A * S, 0.0);
  for (StateId s = 0; s < S; ++s) {
    for (ActionId a = 0; a < A; ++a) {
      const auto n = static_cast<double>(c.visits(s, a));
      const auto row = c.transition_row(s, a);
      double* pr = p.data() + (s * A + a) * S;
      double* br = beta.data() + (s * A + a) * S;
      if (n == 0.0) {
        // Vacuous box; any radius >= 1 clips to [0, 1].
        std::fill(br, br + S, std::max(1.0, bernstein_radius(0.0, 0.0, S, A, delta, alpha_p)));
        continue;
      }
      // Radius only depends on (N, variance): reuse for the zero entries.
      const double zero_radius = bernstein_radius(n, 0.0, S, A, delta, alpha_p);
      for (StateId j = 0; j < S; ++j) {
        if (row[j] == 0) {
          br[j] = zero_radius;
          continue;
        }
        pr[j] = static_cast<double>(row[j]) / n;
        br[j] = bernstein_radius(n, std::min(0.25, pr[j] * (1.0 - pr[j])), S, A, delta, alpha_p);
      }
    }
  }
  return ConfidenceModel(S, A, std::move(p), std::move(beta));
}

ConfidenceModel ConfidenceModel::exact(const TabularMdp& mdp) {
  return ConfidenceModel(mdp.n_states(), mdp.n_actions(), mdp.kernel(),
                         std::vector<double>(mdp.kernel().size(), 0.0));
}

double ConfidenceModel::sigma_sum(StateId s, ActionId a) const {
  double total = 0.0;
  for (StateId j = 0; j < n_states_; ++j) total += std::sqrt(variance(s, a, j));
  return total;
}

double ConfidenceModel::sigma_max(StateId s, ActionId a) const {
  double best = 0.0;
  for (StateId j = 0; j < n_states_; ++j) best = std::max(best, std::sqrt(variance(s, a, j)));
  return best;
}

std::size_t ConfidenceModel::max_support() const {
  std::size_t best = 1;
  for (std::size_t r = 0; r < n_states_ * n_actions_; ++r) {
    const double* row = p_hat_.data() + r * n_states_;
    best = std::max(best, static_cast<std::size_t>(
                              std::count_if(row, row + n_states_, [](double p) { return p > 0.0; })));
  }
  return best;
}

bool ConfidenceModel::contains(const TabularMdp& mdp) const {
  if (mdp.n_states() != n_states_ || mdp.n_actions() != n_actions_) return false;
  for (std::size_t i = 0; i < p_hat_.size(); ++i) {
    if (std::abs(mdp.kernel()[i] - p_hat_[i]) > radius_[i]) return false;
  }
  return true;
}

}  // namespace gosprl
