#include "gosprl/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gosprl/error.hpp"

namespace gosprl {

namespace {

// Leftover mass below this is rounding noise from the lower-bound sum.
constexpr double kMassEps = 1e-14;

// Box constraints of every row of a confidence model, laid out for repeated
// inner optimizations against changing value vectors.
class BoxRows {
 public:
  explicit BoxRows(const ConfidenceModel& m)
      : S_(m.n_states()), A_(m.n_actions()), gap_(S_ * A_ * S_), lo_sum_(S_ * A_), lo_begin_(S_ * A_ + 1) {
    for (std::size_t r = 0; r < S_ * A_; ++r) {
      lo_begin_[r] = lo_idx_.size();
      const auto p = m.p_hat(r / A_, r % A_);
      const auto b = m.radius(r / A_, r % A_);
      double sum = 0.0;
      for (StateId j = 0; j < S_; ++j) {
        const double lo = std::max(0.0, p[j] - b[j]);
        const double hi = std::min(1.0, p[j] + b[j]);
        if (lo > 0.0) {
          lo_idx_.push_back(j);
          lo_val_.push_back(lo);
          sum += lo;
        }
        gap_[r * S_ + j] = std::max(0.0, hi - lo);
      }
      lo_sum_[r] = sum;
    }
    lo_begin_[S_ * A_] = lo_idx_.size();
  }

  // Optimal p . v over the box of row r; `order` ranks coordinates in the
  // order they should receive the free mass.
  double value(std::size_t r, const std::vector<StateId>& order, const std::vector<double>& v) const {
    double acc = 0.0;
    for (std::size_t k = lo_begin_[r]; k < lo_begin_[r + 1]; ++k) acc += lo_val_[k] * v[lo_idx_[k]];
    double mass = 1.0 - lo_sum_[r];
    const double* gap = gap_.data() + r * S_;
    for (StateId j : order) {
      if (mass <= kMassEps) break;
      const double g = gap[j];
      if (g <= 0.0) continue;
      const double add = std::min(g, mass);
      acc += add * v[j];
      mass -= add;
    }
    return acc;
  }

 private:
  std::size_t S_, A_;
  std::vector<double> gap_;
  std::vector<double> lo_sum_;
  std::vector<std::size_t> lo_begin_;
  std::vector<StateId> lo_idx_;
  std::vector<double> lo_val_;
};

void ascending_order(const std::vector<double>& v, std::vector<StateId>& order) {
  std::iota(order.begin(), order.end(), StateId{0});
  std::stable_sort(order.begin(), order.end(), [&](StateId a, StateId b) { return v[a] < v[b]; });
}

void descending_order(const std::vector<double>& v, std::vector<StateId>& order) {
  std::iota(order.begin(), order.end(), StateId{0});
  std::stable_sort(order.begin(), order.end(), [&](StateId a, StateId b) { return v[a] > v[b]; });
}

std::vector<double> fill_box(std::span<const double> p_hat, std::span<const double> beta,
                             std::span<const double> values, bool minimize) {
  const std::size_t n = p_hat.size();
  if (beta.size() != n || values.size() != n) throw ParameterError("row lengths differ");
  std::vector<double> lo(n), hi(n);
  double mass = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!(beta[j] >= 0.0)) throw ParameterError("negative radius");
    if (!std::isfinite(values[j])) throw ParameterError("values must be finite");
    lo[j] = std::max(0.0, p_hat[j] - beta[j]);
    hi[j] = std::min(1.0, p_hat[j] + beta[j]);
    mass -= lo[j];
  }
  const double room = std::accumulate(hi.begin(), hi.end(), 0.0) - (1.0 - mass);
  if (mass < -1e-9 || room < mass - 1e-9) throw ValidationError("infeasible confidence box");
  std::vector<double> v(values.begin(), values.end());
  std::vector<StateId> order(n);
  if (minimize) {
    ascending_order(v, order);
  } else {
    descending_order(v, order);
  }
  std::vector<double> p = lo;
  for (StateId j : order) {
    if (mass <= 0.0) break;
    const double add = std::min(hi[j] - lo[j], mass);
    if (add <= 0.0) continue;
    p[j] += add;
    mass -= add;
  }
  return p;
}

}  // namespace

std::vector<double> inner_min_distribution(std::span<const double> p_hat, std::span<const double> beta,
                                           std::span<const double> values) {
  return fill_box(p_hat, beta, values, true);
}

std::vector<double> inner_max_distribution(std::span<const double> p_hat, std::span<const double> beta,
                                           std::span<const double> values) {
  return fill_box(p_hat, beta, values, false);
}

SspPlan evi_ssp(const ConfidenceModel& model, const std::vector<char>& goals, const CostTable& costs,
                const EviOptions& opts) {
  const std::size_t S = model.n_states(), A = model.n_actions();
  if (goals.size() != S) throw ParameterError("goal mask size mismatch");
  if (std::none_of(goals.begin(), goals.end(), [](char g) { return g != 0; })) {
    throw ParameterError("goal set is empty");
  }
  if (!costs.empty() && costs.size() != S * A) throw ParameterError("cost table size mismatch");
  if (!(opts.precision > 0.0)) throw ParameterError("precision must be positive");
  if (opts.virtual_copy_of && *opts.virtual_copy_of >= S) throw IndexError("copied state out of range");
  auto cost = [&](StateId s, ActionId a) { return costs.empty() ? 1.0 : costs[s * A + a]; };
  for (StateId s = 0; s < S; ++s) {
    for (ActionId a = 0; a < A && !goals[s]; ++a) {
      if (!(cost(s, a) > 0.0)) throw ParameterError("costs must be positive outside the goal set");
    }
  }

  const BoxRows box(model);
  std::vector<double> v(S, 0.0), next(S, 0.0);
  std::vector<StateId> order(S);
  SspPlan plan;
  plan.goals = goals;
  plan.precision = opts.precision;
  for (;;) {
    if (plan.iterations >= opts.max_iterations) {
      StateId worst = 0;
      double worst_diff = -1.0;
      for (StateId s = 0; s < S; ++s) {
        if (std::abs(next[s] - v[s]) > worst_diff) {
          worst_diff = std::abs(next[s] - v[s]);
          worst = s;
        }
      }
      throw DivergenceError("extended value iteration exceeded its iteration cap at state " +
                                std::to_string(worst),
                            worst);
    }
    ascending_order(v, order);
    double diff = 0.0;
    for (StateId s = 0; s < S; ++s) {
      if (goals[s]) {
        next[s] = 0.0;
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      for (ActionId a = 0; a < A; ++a) best = std::min(best, cost(s, a) + box.value(s * A + a, order, v));
      next[s] = best;
      diff = std::max(diff, std::abs(best - v[s]));
    }
    v.swap(next);
    ++plan.iterations;
    if (diff <= opts.precision) break;
  }

  ascending_order(v, order);
  plan.policy.assign(S, 0);
  auto greedy = [&](StateId s, ActionId& arg) {
    double best = std::numeric_limits<double>::infinity();
    for (ActionId a = 0; a < A; ++a) {
      const double q = cost(s, a) + box.value(s * A + a, order, v);
      if (q < best) {
        best = q;
        arg = a;
      }
    }
    return best;
  };
  for (StateId s = 0; s < S; ++s) {
    if (!goals[s]) greedy(s, plan.policy[s]);
  }
  if (opts.virtual_copy_of) {
    const StateId c = *opts.virtual_copy_of;
    ActionId a = 0;
    plan.copy_value = greedy(c, a);
    plan.copy_action = a;
    plan.copy_q.resize(A);
    for (ActionId b = 0; b < A; ++b) plan.copy_q[b] = cost(c, b) + box.value(c * A + b, order, v);
  }
  plan.values = std::move(v);
  return plan;
}

AvgRewardPlan evi_avg_reward(const ConfidenceModel& model, const std::vector<double>& rewards,
                             const AvgRewardOptions& opts) {
  const std::size_t S = model.n_states(), A = model.n_actions();
  if (rewards.size() != S * A) throw ParameterError("reward table size mismatch");
  if (!(opts.span_tol > 0.0)) throw ParameterError("span tolerance must be positive");
  if (!(opts.aperiodicity > 0.0 && opts.aperiodicity <= 1.0)) {
    throw ParameterError("aperiodicity weight must lie in (0, 1]");
  }
  const double kappa = opts.aperiodicity;
  const BoxRows box(model);
  std::vector<double> v(S, 0.0), next(S, 0.0);
  std::vector<StateId> order(S);
  AvgRewardPlan plan;
  plan.policy.assign(S, 0);
  for (;;) {
    if (plan.iterations >= opts.max_iterations) {
      throw DivergenceError("average-reward value iteration exceeded its iteration cap", 0);
    }
    descending_order(v, order);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (StateId s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (ActionId a = 0; a < A; ++a) {
        const double q = rewards[s * A + a] + box.value(s * A + a, order, v);
        if (q > best) {
          best = q;
          plan.policy[s] = a;
        }
      }
      next[s] = kappa * best + (1.0 - kappa) * v[s];
      lo = std::min(lo, next[s] - v[s]);
      hi = std::max(hi, next[s] - v[s]);
    }
    ++plan.iterations;
    const double shift = *std::min_element(next.begin(), next.end());
    for (StateId s = 0; s < S; ++s) v[s] = next[s] - shift;
    if (hi - lo <= opts.span_tol) {
      plan.gain = 0.5 * (hi + lo) / kappa;
      break;
    }
  }
  plan.bias = std::move(v);
  return plan;
}

}  // namespace gosprl
