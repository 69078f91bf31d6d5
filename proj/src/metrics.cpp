#include "gosprl/metrics.hpp"

#include <cmath>
#include <numeric>

#include "gosprl/error.hpp"

namespace gosprl {

double proportion_satisfied(const Counters& counters, const RequirementSchedule& schedule) {
  std::size_t met = 0;
  for (StateId s = 0; s < counters.n_states(); ++s) {
    if (!schedule.undersampled(counters, s)) ++met;
  }
  return static_cast<double>(met) / static_cast<double>(counters.n_states());
}

std::vector<double> pair_l1_errors(const Counters& counters, const TabularMdp& mdp) {
  const std::size_t S = mdp.n_states(), A = mdp.n_actions();
  if (counters.n_states() != S || counters.n_actions() != A) {
    throw ParameterError("counters do not match the MDP");
  }
  std::vector<double> err(S * A, 1.0);
  for (StateId s = 0; s < S; ++s) {
    for (ActionId a = 0; a < A; ++a) {
      const auto n = static_cast<double>(counters.visits(s, a));
      if (n == 0.0) continue;
      const auto counts = counters.transition_row(s, a);
      const auto p = mdp.row(s, a);
      double e = 0.0;
      for (StateId j = 0; j < S; ++j) e += std::abs(static_cast<double>(counts[j]) / n - p[j]);
      err[s * A + a] = e;
    }
  }
  return err;
}

double model_error(const Counters& counters, const TabularMdp& mdp) {
  const auto err = pair_l1_errors(counters, mdp);
  return std::accumulate(err.begin(), err.end(), 0.0) / static_cast<double>(err.size());
}

}  // namespace gosprl
