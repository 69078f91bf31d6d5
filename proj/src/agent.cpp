#include "gosprl/agent.hpp"

#include <algorithm>
#include <cmath>

#include "gosprl/error.hpp"

namespace gosprl {

GoalStrategy parse_goal_strategy(const std::string& name) {
  if (name == "all_undersampled") return GoalStrategy::all_undersampled;
  if (name == "least_sampled") return GoalStrategy::least_sampled;
  if (name == "best_success_ratio") return GoalStrategy::best_success_ratio;
  throw ConfigError("unknown goal strategy '" + name + "'");
}

InitialPhase parse_initial_phase(const std::string& name) {
  if (name == "none") return InitialPhase::none;
  if (name == "min_remaining_budget") return InitialPhase::min_remaining_budget;
  if (name == "max_remaining_budget") return InitialPhase::max_remaining_budget;
  throw ConfigError("unknown initial phase rule '" + name + "'");
}

CostRule parse_cost_rule(const std::string& name) {
  if (name == "unit") return CostRule::unit;
  if (name == "static_state_costs") return CostRule::static_state_costs;
  if (name == "visitation_penalty") return CostRule::visitation_penalty;
  throw ConfigError("unknown cost rule '" + name + "'");
}

std::string to_string(GoalStrategy g) {
  switch (g) {
    case GoalStrategy::all_undersampled: return "all_undersampled";
    case GoalStrategy::least_sampled: return "least_sampled";
    case GoalStrategy::best_success_ratio: return "best_success_ratio";
  }
  return "?";
}

std::string to_string(InitialPhase p) {
  switch (p) {
    case InitialPhase::none: return "none";
    case InitialPhase::min_remaining_budget: return "min_remaining_budget";
    case InitialPhase::max_remaining_budget: return "max_remaining_budget";
  }
  return "?";
}

std::string to_string(CostRule c) {
  switch (c) {
    case CostRule::unit: return "unit";
    case CostRule::static_state_costs: return "static_state_costs";
    case CostRule::visitation_penalty: return "visitation_penalty";
  }
  return "?";
}

std::uint64_t default_step_cap(const TabularMdp& mdp, const RequirementSchedule& schedule) {
  const std::uint64_t S = mdp.n_states(), A = mdp.n_actions();
  return std::max<std::uint64_t>(1, 10 * (schedule.max_envelope() * S * A + S * S * S * A));
}

namespace {

template <class Key>
std::vector<StateId> keep_best(const std::vector<StateId>& states, Key key, bool maximize) {
  std::vector<StateId> out;
  double best = 0.0;
  for (StateId s : states) {
    const double k = key(s);
    if (out.empty() || (maximize ? k > best : k < best)) {
      out.assign(1, s);
      best = k;
    } else if (k == best) {
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace

std::vector<StateId> compute_goal_set(const Counters& counters, const RequirementSchedule& schedule,
                                      const GoalSetContext& ctx) {
  if (counters.n_states() != schedule.n_states() || counters.n_actions() != schedule.n_actions()) {
    throw ParameterError("requirement dimensions do not match the counters");
  }
  std::vector<StateId> under;
  for (StateId s = 0; s < counters.n_states(); ++s) {
    if (schedule.undersampled(counters, s)) under.push_back(s);
  }
  if (under.empty()) return under;
  if (ctx.initial_phase != InitialPhase::none && under.size() == counters.n_states()) {
    return keep_best(
        under, [&](StateId s) { return static_cast<double>(schedule.remaining(counters, s)); },
        ctx.initial_phase == InitialPhase::max_remaining_budget);
  }
  switch (ctx.strategy) {
    case GoalStrategy::all_undersampled: return under;
    case GoalStrategy::least_sampled:
      return keep_best(
          under, [&](StateId s) { return static_cast<double>(counters.state_visits(s)); }, false);
    case GoalStrategy::best_success_ratio:
      if (!ctx.attempted || !ctx.succeeded) throw ParameterError("success statistics missing");
      return keep_best(
          under,
          [&](StateId s) {
            const auto tried = (*ctx.attempted)[s];
            return tried == 0 ? 0.0 : static_cast<double>((*ctx.succeeded)[s]) / static_cast<double>(tried);
          },
          true);
  }
  return under;
}

CostTable planning_costs(const TabularMdp& mdp, const Counters& counters, const RequirementSchedule& schedule,
                         CostRule rule, double max_cost) {
  const std::size_t S = mdp.n_states(), A = mdp.n_actions();
  if (rule == CostRule::unit) return {};
  if (!(max_cost >= 1.0) || !std::isfinite(max_cost)) throw ParameterError("max cost must be finite and >= 1");
  CostTable c(S * A, 1.0);
  for (StateId s = 0; s < S; ++s) {
    double cs = 1.0;
    if (rule == CostRule::static_state_costs) {
      cs = mdp.state_cost(s);
    } else {
      const auto b = schedule.required_state(s);
      const double ratio =
          b == 0 ? 1.0
                 : std::min(1.0, static_cast<double>(counters.state_visits(s)) / static_cast<double>(b));
      cs = 1.0 + (max_cost - 1.0) * ratio;
    }
    std::fill(c.begin() + static_cast<long>(s * A), c.begin() + static_cast<long>((s + 1) * A), cs);
  }
  return c;
}

double threshold_phi(std::size_t j, double L, std::size_t n_states, std::size_t n_actions, double alpha) {
  if (!(L >= 1.0)) throw ParameterError("L must be at least 1");
  if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
  const double jj = static_cast<double>(j);
  const double S = static_cast<double>(n_states), A = static_cast<double>(n_actions);
  return alpha * jj * L + alpha * jj * std::pow(L, 1.5) * S * S * A;
}

// ---------------------------------------------------------------------------

namespace {

SessionOptions session_options(const TabularMdp& mdp, const RequirementSchedule& schedule,
                               const GosprlConfig& cfg) {
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ParameterError("delta must lie in (0,1)");
  if (!(cfg.alpha_p > 0.0)) throw ParameterError("alpha_p must be positive");
  if (!(cfg.max_cost >= 1.0)) throw ParameterError("max cost must be >= 1");
  return {cfg.step_cap ? cfg.step_cap : default_step_cap(mdp, schedule), cfg.log_every, cfg.log_model_error};
}

}  // namespace

Gosprl::Gosprl(const TabularMdp& mdp, RequirementSchedule& schedule, const GosprlConfig& cfg,
               std::uint64_t seed)
    : mdp_(&mdp),
      cfg_(cfg),
      session_(mdp, schedule, seed, session_options(mdp, schedule, cfg)),
      attempted_(mdp.n_states(), 0),
      succeeded_(mdp.n_states(), 0) {}

void Gosprl::set_threshold(double L, double alpha) {
  threshold_phi(1, L, 1, 1, alpha);  // validates
  threshold_L_ = L;
  threshold_alpha_ = alpha;
}

const ConfidenceModel Gosprl::planning_model() const {
  if (cfg_.known_dynamics) return ConfidenceModel::exact(*mdp_);
  return ConfidenceModel::from_counters(session_.counters(), cfg_.delta, cfg_.alpha_p);
}

bool Gosprl::collect(RequirementSchedule& schedule) {
  session_.set_schedule(schedule);
  return collect();
}

bool Gosprl::collect() {
  for (;;) {
    if (session_.requirements_met()) return done_ = true;
    if (session_.out_of_budget() || threshold_hit_) return done_ = false;
    run_attempt();
  }
}

ActionId Gosprl::goal_action(StateId g, const std::vector<char>& allowed) const {
  const auto& c = session_.counters();
  const auto& sched = session_.schedule();
  std::optional<ActionId> best;
  for (ActionId a = 0; a < mdp_->n_actions(); ++a) {
    if (!allowed.empty() && !allowed[a]) continue;
    if (!best) {
      best = a;
    } else if (sched.state_only() ? c.visits(g, a) < c.visits(g, *best)
                                  : sched.gap(c, g, a) > sched.gap(c, g, *best)) {
      best = a;
    }
  }
  return best.value_or(0);
}

bool Gosprl::after_step(bool was_needed) {
  if (was_needed) ++desired_samples_;
  if (session_.requirements_met()) return false;
  if (session_.out_of_budget()) return false;
  if (threshold_L_ &&
      static_cast<double>(session_.time()) >
          threshold_phi(desired_samples_ + 1, *threshold_L_, mdp_->n_states(), mdp_->n_actions(),
                        threshold_alpha_)) {
    threshold_hit_ = true;
    return false;
  }
  return true;
}

bool Gosprl::run_attempt() {
  auto& c = session_.counters();
  const auto& sched = session_.schedule();
  const std::size_t S = mdp_->n_states();

  const auto goals = compute_goal_set(c, sched, {cfg_.goal_strategy, cfg_.initial_phase, &attempted_, &succeeded_});
  const auto mask = goal_mask(S, goals);
  for (StateId g : goals) ++attempted_[g];
  c.begin_attempt();

  const double t_k = static_cast<double>(session_.time() + 1);
  EviOptions opts;
  opts.precision = std::max(1e-9, 1.0 / (2.0 * t_k));
  opts.max_iterations = cfg_.evi_max_iterations;
  if (mask[session_.state()]) opts.virtual_copy_of = session_.state();
  const SspPlan plan =
      evi_ssp(planning_model(), mask, planning_costs(*mdp_, c, sched, cfg_.cost_rule, cfg_.max_cost), opts);

  AttemptRecord rec{session_.time(), 0, goals.size(), false};
  bool first = true;
  for (;;) {
    const StateId s = session_.state();
    ActionId a = plan.policy[s];
    if (first && plan.copy_action) {
      // Equally short routes back to the goals: prefer the most useful sample here.
      std::vector<char> tied(plan.copy_q.size());
      for (std::size_t b = 0; b < tied.size(); ++b) tied[b] = plan.copy_q[b] <= plan.copy_value + plan.precision;
      a = goal_action(s, tied);
    }
    first = false;
    const bool needed = sched.pair_undersampled(c, s, a);
    const StateId next = session_.step(a);
    if (!after_step(needed)) break;
    const bool doubled = c.doubled(s, a);
    if (mask[next]) {
      rec.reached_goal = true;
      ++succeeded_[next];
    }
    if (!mask[next] && !doubled) continue;
    if (mask[next] && sched.undersampled(c, next)) {
      const ActionId g = goal_action(next);
      const bool goal_needed = sched.pair_undersampled(c, next, g);
      session_.step(g);
      after_step(goal_needed);
    }
    break;
  }
  rec.length = session_.time() - rec.start;
  session_.trace().attempts.push_back(rec);
  return rec.reached_goal;
}

RunTrace Gosprl::finish() {
  RunTrace t = session_.finish(done_);
  t.discarded = threshold_hit_;
  return t;
}

RunTrace run_gosprl(const TabularMdp& mdp, RequirementSchedule schedule, const GosprlConfig& cfg,
                    std::uint64_t seed) {
  Gosprl agent(mdp, schedule, cfg, seed);
  agent.collect();
  return agent.finish();
}

RunTrace run_gosprl_l(const TabularMdp& mdp, RequirementSchedule schedule, double L, double alpha,
                      const GosprlConfig& cfg, std::uint64_t seed) {
  Gosprl agent(mdp, schedule, cfg, seed);
  agent.set_threshold(L, alpha);
  agent.collect();
  return agent.finish();
}

}  // namespace gosprl
