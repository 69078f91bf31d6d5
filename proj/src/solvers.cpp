#include "gosprl/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "gosprl/error.hpp"

namespace gosprl {

namespace {

constexpr std::size_t kMaxSweeps = 50'000'000;

// Nonzero entries of every kernel row.
struct SparseRows {
  std::size_t n_actions = 0;
  std::vector<std::size_t> offset;  // row r spans [offset[r], offset[r+1])
  std::vector<StateId> next;
  std::vector<double> prob;

  explicit SparseRows(const TabularMdp& mdp) : n_actions(mdp.n_actions()) {
    const std::size_t S = mdp.n_states(), A = mdp.n_actions();
    offset.reserve(S * A + 1);
    offset.push_back(0);
    for (StateId s = 0; s < S; ++s) {
      for (ActionId a = 0; a < A; ++a) {
        const auto r = mdp.row(s, a);
        for (StateId j = 0; j < S; ++j) {
          if (r[j] > 0.0) {
            next.push_back(j);
            prob.push_back(r[j]);
          }
        }
        offset.push_back(next.size());
      }
    }
  }

  double expect(std::size_t r, const std::vector<double>& v) const {
    double acc = 0.0;
    for (std::size_t k = offset[r]; k < offset[r + 1]; ++k) acc += prob[k] * v[next[k]];
    return acc;
  }
};

double cost_of(const CostTable& costs, std::size_t A, StateId s, ActionId a) {
  return costs.empty() ? 1.0 : costs[s * A + a];
}

void check_inputs(const TabularMdp& mdp, const std::vector<char>& goals, const CostTable& costs) {
  if (goals.size() != mdp.n_states()) throw ParameterError("goal mask size mismatch");
  if (std::none_of(goals.begin(), goals.end(), [](char g) { return g != 0; })) {
    throw ParameterError("goal set is empty");
  }
  if (!costs.empty() && costs.size() != mdp.n_states() * mdp.n_actions()) {
    throw ParameterError("cost table size mismatch");
  }
}

}  // namespace

std::vector<char> goal_mask(std::size_t n_states, const std::vector<StateId>& goals) {
  std::vector<char> mask(n_states, 0);
  for (StateId g : goals) {
    if (g >= n_states) throw IndexError("goal state out of range");
    mask[g] = 1;
  }
  return mask;
}

ProperSet proper_states(const TabularMdp& mdp, const std::vector<char>& goals) {
  const std::size_t S = mdp.n_states(), A = mdp.n_actions();
  SparseRows rows(mdp);
  std::vector<char> inside(S, 1);
  for (;;) {
    // Attractor of the goal set using only actions that stay inside.
    std::vector<char> attr(goals.begin(), goals.end());
    for (bool grew = true; grew;) {
      grew = false;
      for (StateId s = 0; s < S; ++s) {
        if (attr[s] || !inside[s]) continue;
        for (ActionId a = 0; a < A && !attr[s]; ++a) {
          const std::size_t r = s * A + a;
          bool stays = true, hits = false;
          for (std::size_t k = rows.offset[r]; k < rows.offset[r + 1]; ++k) {
            stays = stays && inside[rows.next[k]];
            hits = hits || attr[rows.next[k]];
          }
          if (stays && hits) {
            attr[s] = 1;
            grew = true;
          }
        }
      }
    }
    if (attr == inside) break;
    for (StateId s = 0; s < S; ++s) inside[s] = inside[s] && attr[s];
  }
  ProperSet out{inside, std::vector<char>(S * A, 0)};
  for (StateId s = 0; s < S; ++s) {
    if (!inside[s]) continue;
    for (ActionId a = 0; a < A; ++a) {
      const std::size_t r = s * A + a;
      bool stays = true;
      for (std::size_t k = rows.offset[r]; k < rows.offset[r + 1]; ++k) {
        stays = stays && inside[rows.next[k]];
      }
      out.allowed[r] = stays;
    }
  }
  return out;
}

std::vector<double> exact_ssp_values(const TabularMdp& mdp, const std::vector<char>& goals,
                                     const CostTable& costs, double tol) {
  check_inputs(mdp, goals, costs);
  if (!(tol > 0.0)) throw ParameterError("tolerance must be positive");
  const std::size_t S = mdp.n_states(), A = mdp.n_actions();
  const ProperSet ps = proper_states(mdp, goals);
  for (StateId s = 0; s < S; ++s) {
    for (ActionId a = 0; a < A; ++a) {
      if (!goals[s] && !(cost_of(costs, A, s, a) > 0.0)) {
        throw ParameterError("costs must be positive outside the goal set");
      }
    }
  }
  SparseRows rows(mdp);
  std::vector<double> v(S, 0.0), next(S, 0.0);
  for (std::size_t sweep = 0;; ++sweep) {
    if (sweep >= kMaxSweeps) throw DivergenceError("exact value iteration did not converge", 0);
    double diff = 0.0;
    for (StateId s = 0; s < S; ++s) {
      if (goals[s] || !ps.proper[s]) {
        next[s] = 0.0;
        continue;
      }
      double best = kUnreachable;
      for (ActionId a = 0; a < A; ++a) {
        const std::size_t r = s * A + a;
        if (!ps.allowed[r]) continue;
        best = std::min(best, cost_of(costs, A, s, a) + rows.expect(r, v));
      }
      next[s] = best;
      diff = std::max(diff, std::abs(best - v[s]));
    }
    v.swap(next);
    if (diff <= tol) break;
  }
  for (StateId s = 0; s < S; ++s) {
    if (!goals[s] && !ps.proper[s]) v[s] = kUnreachable;
  }
  return v;
}

std::vector<ActionId> greedy_ssp_policy(const TabularMdp& mdp, const std::vector<char>& goals,
                                        const CostTable& costs, const std::vector<double>& values) {
  check_inputs(mdp, goals, costs);
  const std::size_t S = mdp.n_states(), A = mdp.n_actions();
  SparseRows rows(mdp);
  std::vector<ActionId> policy(S, 0);
  for (StateId s = 0; s < S; ++s) {
    if (goals[s]) continue;
    double best = kUnreachable;
    for (ActionId a = 0; a < A; ++a) {
      const double q = cost_of(costs, A, s, a) + rows.expect(s * A + a, values);
      if (q < best) {
        best = q;
        policy[s] = a;
      }
    }
  }
  return policy;
}

std::vector<double> evaluate_ssp_policy(const TabularMdp& mdp, const std::vector<char>& goals,
                                        const CostTable& costs, const std::vector<ActionId>& policy,
                                        double tol) {
  check_inputs(mdp, goals, costs);
  const std::size_t S = mdp.n_states(), A = mdp.n_actions();
  if (policy.size() != S) throw ParameterError("policy size mismatch");
  SparseRows rows(mdp);
  auto row_of = [&](StateId s) { return s * A + policy[s]; };
  // Markov chain of the policy: s reaches the goal a.s. iff every state it can
  // reach can itself reach the goal.
  std::vector<char> can_reach(goals.begin(), goals.end());
  for (bool grew = true; grew;) {
    grew = false;
    for (StateId s = 0; s < S; ++s) {
      if (can_reach[s]) continue;
      const std::size_t r = row_of(s);
      for (std::size_t k = rows.offset[r]; k < rows.offset[r + 1]; ++k) {
        if (can_reach[rows.next[k]]) {
          can_reach[s] = 1;
          grew = true;
          break;
        }
      }
    }
  }
  std::vector<char> bad(S, 0);
  for (StateId s = 0; s < S; ++s) bad[s] = !can_reach[s];
  for (bool grew = true; grew;) {
    grew = false;
    for (StateId s = 0; s < S; ++s) {
      if (bad[s] || goals[s]) continue;
      const std::size_t r = row_of(s);
      for (std::size_t k = rows.offset[r]; k < rows.offset[r + 1]; ++k) {
        if (bad[rows.next[k]]) {
          bad[s] = 1;
          grew = true;
          break;
        }
      }
    }
  }
  std::vector<double> v(S, 0.0), next(S, 0.0);
  for (std::size_t sweep = 0;; ++sweep) {
    if (sweep >= kMaxSweeps) throw DivergenceError("policy evaluation did not converge", 0);
    double diff = 0.0;
    for (StateId s = 0; s < S; ++s) {
      if (goals[s] || bad[s]) {
        next[s] = 0.0;
        continue;
      }
      next[s] = cost_of(costs, A, s, policy[s]) + rows.expect(row_of(s), v);
      diff = std::max(diff, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (diff <= tol) break;
  }
  for (StateId s = 0; s < S; ++s) {
    if (bad[s] && !goals[s]) v[s] = kUnreachable;
  }
  return v;
}

DiameterResult diameter(const TabularMdp& mdp, double tol) {
  const std::size_t S = mdp.n_states();
  DiameterResult out;
  out.per_state.assign(S, 0.0);
  if (S == 1) return out;
  for (StateId g = 0; g < S; ++g) {
    std::vector<char> goals(S, 0);
    goals[g] = 1;
    const auto v = exact_ssp_values(mdp, goals, {}, tol);
    double worst = 0.0;
    for (StateId s = 0; s < S; ++s) {
      if (s != g) worst = std::max(worst, v[s]);
    }
    out.per_state[g] = worst;
    out.diameter = std::max(out.diameter, worst);
  }
  out.communicating = std::isfinite(out.diameter);
  return out;
}

ReachabilityReport check_communicating(const TabularMdp& mdp) {
  const std::size_t S = mdp.n_states(), A = mdp.n_actions();
  ReachabilityReport rep;
  rep.n_states = S;
  rep.reach.assign(S * S, 0);
  std::vector<std::vector<StateId>> succ(S);
  for (StateId s = 0; s < S; ++s) {
    std::vector<char> seen(S, 0);
    for (ActionId a = 0; a < A; ++a) {
      const auto r = mdp.row(s, a);
      for (StateId j = 0; j < S; ++j) {
        if (r[j] > 0.0 && !seen[j]) {
          seen[j] = 1;
          succ[s].push_back(j);
        }
      }
    }
  }
  for (StateId from = 0; from < S; ++from) {
    char* row = rep.reach.data() + from * S;
    row[from] = 1;
    std::vector<StateId> stack{from};
    while (!stack.empty()) {
      const StateId s = stack.back();
      stack.pop_back();
      for (StateId j : succ[s]) {
        if (!row[j]) {
          row[j] = 1;
          stack.push_back(j);
        }
      }
    }
  }
  rep.communicating = std::all_of(rep.reach.begin(), rep.reach.end(), [](char c) { return c != 0; });
  return rep;
}

}  // namespace gosprl
