#include "gosprl/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "gosprl/error.hpp"

namespace gosprl {

namespace {

SessionOptions options_for(const TabularMdp& mdp, const RequirementSchedule& schedule, const GosprlConfig& cfg) {
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ParameterError("delta must lie in (0,1)");
  if (!(cfg.alpha_p > 0.0)) throw ParameterError("alpha_p must be positive");
  return {cfg.step_cap ? cfg.step_cap : default_step_cap(mdp, schedule), cfg.log_every, cfg.log_model_error};
}

ConfidenceModel model_for(const TabularMdp& mdp, const Counters& c, const GosprlConfig& cfg) {
  if (cfg.known_dynamics) return ConfidenceModel::exact(mdp);
  return ConfidenceModel::from_counters(c, cfg.delta, cfg.alpha_p);
}

struct NoDrift {
  void start(const Counters&, const ConfidenceModel&) {}
  bool drifted(const Counters&) const { return false; }
};

// Episodic loop shared by the optimistic average-reward baselines.
template <class RewardFn, class Drift = NoDrift>
RunTrace run_episodic(const TabularMdp& mdp, RequirementSchedule& schedule, const GosprlConfig& cfg,
                      std::uint64_t seed, RewardFn rewards_for, Drift drift = {}) {
  ExplorationSession session(mdp, schedule, seed, options_for(mdp, schedule, cfg));
  auto& c = session.counters();
  for (;;) {
    if (session.requirements_met()) return session.finish(true);
    if (session.out_of_budget()) return session.finish(false);
    c.begin_attempt();
    const auto model = model_for(mdp, c, cfg);
    AvgRewardOptions opts;
    opts.span_tol = std::max(1e-6, 1.0 / std::sqrt(static_cast<double>(session.time() + 1)));
    opts.max_iterations = cfg.evi_max_iterations;
    const auto plan = evi_avg_reward(model, rewards_for(c, model), opts);
    drift.start(c, model);
    AttemptRecord rec{session.time(), 0, 0, false};
    for (;;) {
      const StateId s = session.state();
      const ActionId a = plan.policy[s];
      session.step(a);
      if (session.requirements_met() || session.out_of_budget() || c.doubled(s, a) || drift.drifted(c)) break;
    }
    rec.length = session.time() - rec.start;
    session.trace().attempts.push_back(rec);
  }
}

}  // namespace

UcrlMode parse_ucrl_mode(const std::string& name) {
  if (name == "zero_one") return UcrlMode::zero_one;
  if (name == "zero") return UcrlMode::zero;
  throw ConfigError("unknown UCRL mode '" + name + "'");
}

MaxEntMode parse_maxent_mode(const std::string& name) {
  if (name == "entropy") return MaxEntMode::entropy;
  if (name == "min_frequency") return MaxEntMode::min_frequency;
  if (name == "weighted") return MaxEntMode::weighted;
  throw ConfigError("unknown MaxEnt mode '" + name + "'");
}

RunTrace run_random(const TabularMdp& mdp, RequirementSchedule schedule, const GosprlConfig& cfg,
                    std::uint64_t seed) {
  ExplorationSession session(mdp, schedule, seed, options_for(mdp, schedule, cfg));
  Rng policy_rng = make_stream(seed, 1);
  const auto A = static_cast<double>(mdp.n_actions());
  for (;;) {
    if (session.requirements_met()) return session.finish(true);
    if (session.out_of_budget()) return session.finish(false);
    const auto a = std::min(mdp.n_actions() - 1, static_cast<ActionId>(uniform01(policy_rng) * A));
    session.step(a);
  }
}

std::vector<double> ucrl_rewards(const Counters& c, const RequirementSchedule& schedule, UcrlMode mode) {
  const std::size_t S = c.n_states(), A = c.n_actions();
  std::vector<double> r(S * A, 0.0);
  for (StateId s = 0; s < S; ++s) {
    for (ActionId a = 0; a < A; ++a) {
      if (mode == UcrlMode::zero_one) {
        r[s * A + a] = schedule.pair_undersampled(c, s, a) ? 1.0 : 0.0;
      } else {
        const double excess = -schedule.gap(c, s, a);  // N - b
        r[s * A + a] = excess <= 0.0 ? 1.0 : std::min(1.0, 1.0 / std::sqrt(excess));
      }
    }
  }
  return r;
}

RunTrace run_ucrl_variant(const TabularMdp& mdp, RequirementSchedule schedule, UcrlMode mode,
                          const GosprlConfig& cfg, std::uint64_t seed) {
  return run_episodic(mdp, schedule, cfg, seed, [&](const Counters& c, const ConfidenceModel&) {
    return ucrl_rewards(c, schedule, mode);
  });
}

std::vector<double> smoothed_frequencies(const Counters& c) {
  const std::size_t n = c.n_states() * c.n_actions();
  const double t = static_cast<double>(c.time());
  std::vector<double> lambda(n);
  for (std::size_t i = 0; i < n; ++i) {
    lambda[i] = (static_cast<double>(c.visit_table()[i]) + 1.0 / static_cast<double>(n)) / (t + 1.0);
  }
  return lambda;
}

namespace {

// Entropy gradient -ln(lambda) - 1, rescaled to [0, 1].
std::vector<double> entropy_gradient(const Counters& c) {
  auto r = smoothed_frequencies(c);
  for (double& x : r) x = -std::log(x) - 1.0;
  const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
  const double low = *lo, span = *hi - *lo;
  for (double& x : r) x = span > 0.0 ? (x - low) / span : 1.0;
  return r;
}

std::vector<double> variance_weights(const ConfidenceModel& model) {
  const std::size_t S = model.n_states(), A = model.n_actions();
  std::vector<double> w(S * A, 0.0);
  for (StateId s = 0; s < S; ++s) {
    for (ActionId a = 0; a < A; ++a) {
      const auto beta = model.radius(s, a);
      double x = 0.0;
      for (StateId j = 0; j < S; ++j) x += std::min(0.5, std::sqrt(model.variance(s, a, j)) + beta[j]);
      w[s * A + a] = std::min(1.0, x);
    }
  }
  return w;
}

// Ends a Frank-Wolfe epoch once the objective gradient has moved by more than kShift.
struct GradientDrift {
  static constexpr double kShift = 0.1;
  bool weighted = false;
  std::vector<double> weights, start_grad;

  void start(const Counters& c, const ConfidenceModel& model) {
    weights = weighted ? variance_weights(model) : std::vector<double>(c.n_states() * c.n_actions(), 1.0);
    start_grad = entropy_gradient(c);
  }
  bool drifted(const Counters& c) const {
    const auto g = entropy_gradient(c);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (std::abs(g[i] - start_grad[i]) * weights[i] > kShift) return true;
    }
    return false;
  }
};

}  // namespace

std::vector<double> maxent_rewards(const Counters& c, const ConfidenceModel& model, MaxEntMode mode) {
  if (mode == MaxEntMode::min_frequency) {
    const auto lambda = smoothed_frequencies(c);
    std::vector<double> r(lambda.size(), 0.0);
    r[static_cast<std::size_t>(std::min_element(lambda.begin(), lambda.end()) - lambda.begin())] = 1.0;
    return r;
  }
  auto r = entropy_gradient(c);
  if (mode == MaxEntMode::weighted) {
    const auto w = variance_weights(model);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] *= w[i];
  }
  return r;
}

RunTrace run_maxent(const TabularMdp& mdp, RequirementSchedule schedule, MaxEntMode mode,
                    const GosprlConfig& cfg, std::uint64_t seed) {
  auto rewards = [&](const Counters& c, const ConfidenceModel& model) { return maxent_rewards(c, model, mode); };
  if (mode == MaxEntMode::min_frequency) return run_episodic(mdp, schedule, cfg, seed, rewards);
  GradientDrift drift;
  drift.weighted = mode == MaxEntMode::weighted;
  return run_episodic(mdp, schedule, cfg, seed, rewards, drift);
}

}  // namespace gosprl
