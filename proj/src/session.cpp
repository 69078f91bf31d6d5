#include "gosprl/session.hpp"

#include <random>

#include "gosprl/error.hpp"
#include "gosprl/metrics.hpp"

namespace gosprl {

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::proportion: return "proportion";
    case Metric::model_error: return "model_error";
  }
  return "unknown";
}

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

ExplorationSession::ExplorationSession(const TabularMdp& mdp, RequirementSchedule& schedule,
                                       std::uint64_t seed, const SessionOptions& opts)
    : mdp_(&mdp),
      schedule_(&schedule),
      opts_(opts),
      rng_(make_stream(seed, 0)),
      counters_(mdp.n_states(), mdp.n_actions()),
      state_(mdp.start_state()) {
  if (schedule.n_states() != mdp.n_states() || schedule.n_actions() != mdp.n_actions()) {
    throw ParameterError("requirement dimensions do not match the environment");
  }
  if (opts_.step_cap == 0) throw ParameterError("step cap must be positive");
  trace_.seed = seed;
  trace_.step_cap = opts_.step_cap;
  schedule_->refresh(counters_);
  log_metrics();
}

void ExplorationSession::set_schedule(RequirementSchedule& schedule) {
  if (schedule.n_states() != mdp_->n_states() || schedule.n_actions() != mdp_->n_actions()) {
    throw ParameterError("requirement dimensions do not match the environment");
  }
  schedule_ = &schedule;
  schedule_->refresh(counters_);
}

StateId ExplorationSession::step(ActionId a) {
  const StateId s = state_;
  const StateId next = sample_step(*mdp_, s, a, rng_);
  counters_.record(s, a, next);
  schedule_->observe(counters_, s, a);
  state_ = next;
  if (opts_.log_every > 0 && time() % opts_.log_every == 0) log_metrics();
  return next;
}

bool ExplorationSession::requirements_met() {
  while (schedule_->satisfied(counters_)) {
    if (!schedule_->tighten(counters_)) return true;
    ++trace_.stages;
  }
  return false;
}

void ExplorationSession::log_metrics() {
  if (last_logged_ == time()) return;
  last_logged_ = time();
  trace_.metrics.push_back({time(), Metric::proportion, proportion_satisfied(counters_, *schedule_)});
  if (opts_.log_model_error) {
    trace_.metrics.push_back({time(), Metric::model_error, model_error(counters_, *mdp_)});
  }
}

RunTrace ExplorationSession::finish(bool completed) {
  log_metrics();
  trace_.completed = completed;
  trace_.stopping_time = time();
  trace_.visits = counters_.visit_table();
  trace_.state_visit_counts.resize(mdp_->n_states());
  for (StateId s = 0; s < mdp_->n_states(); ++s) trace_.state_visit_counts[s] = counters_.state_visits(s);
  trace_.final_model_error = model_error(counters_, *mdp_);
  trace_.unmet_states.clear();
  for (StateId s = 0; s < mdp_->n_states(); ++s) {
    if (schedule_->undersampled(counters_, s)) trace_.unmet_states.push_back(s);
  }
  return trace_;
}

}  // namespace gosprl
