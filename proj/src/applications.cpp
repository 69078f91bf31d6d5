#include "gosprl/applications.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gosprl/error.hpp"

namespace gosprl {

DiameterEstimate estimate_diameter(const TabularMdp& mdp, const DiameterEstimationOptions& opts,
                                   const GosprlConfig& cfg_in, std::uint64_t seed) {
  if (!(opts.eps > 0.0)) throw ParameterError("eps must be positive");
  if (!(opts.delta > 0.0 && opts.delta < 1.0)) throw ParameterError("delta must lie in (0,1)");
  if (!(opts.budget_scale > 0.0)) throw ParameterError("budget scale must be positive");
  const std::size_t S = mdp.n_states(), A = mdp.n_actions();
  DiameterEstimate out;
  if (S == 1) return out;

  GosprlConfig cfg = cfg_in;
  cfg.delta = opts.delta;
  if (cfg.step_cap == 0) cfg.step_cap = 100'000'000;
  double W = 1.0;
  double eta = opts.eps / W;
  auto schedule_for = [&](double e) {
    return RequirementSchedule::modest(S, A, {e / 2.0, opts.delta, ModestNorm::l1, opts.budget_scale, false});
  };
  RequirementSchedule schedule = schedule_for(eta);
  Gosprl agent(mdp, schedule, cfg, seed);
  const double mu = std::min(1.0, opts.eps) / 2.0;
  for (;;) {
    ++out.rounds;
    if (!agent.collect(schedule)) {
      out.completed = false;
      break;
    }
    const auto model = ConfidenceModel::from_counters(agent.session().counters(), opts.delta, cfg.alpha_p);
    double vmax = 0.0;
    for (StateId g = 0; g < S; ++g) {
      EviOptions evi;
      evi.precision = mu;
      evi.max_iterations = cfg.evi_max_iterations;
      const auto plan = evi_ssp(model, goal_mask(S, {g}), {}, evi);
      vmax = std::max(vmax, *std::max_element(plan.values.begin(), plan.values.end()));
    }
    out.value_norm = vmax;
    out.eta = eta;
    out.model = model;
    if (vmax <= W) break;
    W *= 2.0;
    eta = opts.eps / W;
    schedule = schedule_for(eta);
  }
  out.estimate = (1.0 + 2.0 * out.eta * out.value_norm) * out.value_norm;
  out.steps = agent.session().time();
  return out;
}

TabularMdp empirical_mdp(const Counters& c, StateId start) {
  const std::size_t S = c.n_states(), A = c.n_actions();
  std::vector<double> k(S * A * S, 0.0);
  for (StateId s = 0; s < S; ++s) {
    for (ActionId a = 0; a < A; ++a) {
      double* row = k.data() + (s * A + a) * S;
      const auto n = static_cast<double>(c.visits(s, a));
      if (n == 0.0) {
        row[s] = 1.0;
        continue;
      }
      const auto counts = c.transition_row(s, a);
      StateId top = 0;
      for (StateId j = 0; j < S; ++j) {
        row[j] = static_cast<double>(counts[j]) / n;
        if (row[j] > row[top]) top = j;
      }
      row[top] += 1.0 - std::accumulate(row, row + S, 0.0);
    }
  }
  return TabularMdp(S, A, std::move(k), start);
}

CostTable gfcf_planning_costs(const CostTable& costs, const GfcfPlanOptions& opts) {
  gfcf_omega(opts.c_min, opts.eps, opts.theta, opts.diameter_estimate);  // validates
  CostTable out = costs;
  if (opts.c_min == 0.0) {
    const double bump = opts.eps / (opts.theta * opts.diameter_estimate);
    for (double& x : out) x += bump;
  }
  return out;
}

std::vector<ActionId> gfcf_plan(const TabularMdp& empirical, StateId goal, const CostTable& costs,
                                const GfcfPlanOptions& opts) {
  if (goal >= empirical.n_states()) throw IndexError("goal state out of range");
  if (costs.size() != empirical.n_states() * empirical.n_actions()) {
    throw ParameterError("cost table size mismatch");
  }
  const auto c = gfcf_planning_costs(costs, opts);
  const auto goals = goal_mask(empirical.n_states(), {goal});
  const auto v = exact_ssp_values(empirical, goals, c, 1e-10);
  return greedy_ssp_policy(empirical, goals, c, v);
}

RewardOracle bernoulli_rewards(std::vector<double> means) {
  for (double m : means) {
    if (!(m >= 0.0 && m <= 1.0)) throw ParameterError("Bernoulli means must lie in [0,1]");
  }
  return [means = std::move(means)](StateId s, Rng& rng) { return uniform01(rng) < means.at(s) ? 1.0 : 0.0; };
}

RewardOracle deterministic_rewards(std::vector<double> values) {
  return [values = std::move(values)](StateId s, Rng&) { return values.at(s); };
}

double successive_rejects_log(std::size_t k) {
  double total = 0.5;
  for (std::size_t i = 1; i <= k; ++i) total += 1.0 / static_cast<double>(i);
  return total;
}

std::vector<std::uint64_t> successive_rejects_phases(std::size_t k, std::uint64_t n) {
  if (k == 0) throw ParameterError("need at least one arm");
  if (n < k) throw ParameterError("budget n must be at least the number of states");
  const double lb = successive_rejects_log(k);
  std::vector<std::uint64_t> out;
  for (std::size_t phase = 1; phase < k; ++phase) {
    out.push_back(static_cast<std::uint64_t>(
        std::ceil(static_cast<double>(n - k) / (lb * static_cast<double>(k + 1 - phase)))));
  }
  return out;
}

BestStateResult best_state_identification(const TabularMdp& mdp, const RewardOracle& rewards, std::uint64_t n,
                                          const GosprlConfig& cfg, std::uint64_t seed) {
  const std::size_t S = mdp.n_states(), A = mdp.n_actions();
  BestStateResult out;
  out.phase_lengths = successive_rejects_phases(S, n);
  std::vector<char> alive(S, 1);
  std::vector<double> sums(S, 0.0);
  std::vector<std::uint64_t> pulls(S, 0);
  Rng reward_rng = make_stream(seed, 2);

  RequirementSchedule schedule = RequirementSchedule::fixed_states(S, A, std::vector<std::uint64_t>(S, 0));
  GosprlConfig c = cfg;
  if (c.step_cap == 0) c.step_cap = 10 * (n * S * A + S * S * S * A);
  Gosprl agent(mdp, schedule, c, seed);
  std::uint64_t previous = 0;
  auto mean = [&](StateId s) { return pulls[s] ? sums[s] / static_cast<double>(pulls[s]) : 0.0; };
  for (std::uint64_t nk : out.phase_lengths) {
    const std::uint64_t extra = nk - previous;
    previous = nk;
    std::vector<std::uint64_t> b(S, 0);
    for (StateId s = 0; s < S; ++s) {
      if (alive[s]) b[s] = agent.session().counters().state_visits(s) + extra;
    }
    schedule = RequirementSchedule::fixed_states(S, A, std::move(b));
    if (!agent.collect(schedule)) out.completed = false;
    for (StateId s = 0; s < S; ++s) {
      if (!alive[s]) continue;
      for (std::uint64_t i = 0; i < extra; ++i) sums[s] += rewards(s, reward_rng);
      pulls[s] += extra;
      out.reward_samples += extra;
    }
    StateId worst = S;
    for (StateId s = 0; s < S; ++s) {
      if (alive[s] && (worst == S || mean(s) < mean(worst))) worst = s;
    }
    alive[worst] = 0;
    out.rejected.push_back(worst);
    if (!out.completed) break;
  }
  out.empirical_means.resize(S);
  for (StateId s = 0; s < S; ++s) out.empirical_means[s] = mean(s);
  // Survivor; after an early stop, the best surviving empirical mean.
  StateId best = S;
  for (StateId s = 0; s < S; ++s) {
    if (alive[s] && (best == S || mean(s) > mean(best))) best = s;
  }
  out.identified = best;
  out.steps = agent.session().time();
  return out;
}

}  // namespace gosprl
