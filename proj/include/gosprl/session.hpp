#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gosprl/estimation.hpp"
#include "gosprl/mdp.hpp"
#include "gosprl/requirements.hpp"

namespace gosprl {

enum class Metric { proportion, model_error };
std::string metric_name(Metric m);

struct MetricPoint {
  std::uint64_t t = 0;
  Metric metric = Metric::proportion;
  double value = 0.0;
};

struct AttemptRecord {
  std::uint64_t start = 0;
  std::uint64_t length = 0;
  std::size_t goal_count = 0;
  bool reached_goal = false;
};

struct RunTrace {
  std::uint64_t seed = 0;
  bool completed = false;
  /// tau on completion, otherwise the step at which the run was stopped.
  std::uint64_t stopping_time = 0;
  std::uint64_t step_cap = 0;
  std::vector<AttemptRecord> attempts;
  std::vector<MetricPoint> metrics;
  std::vector<std::uint64_t> visits;  // final N(s,a), indexed s * A + a
  std::vector<std::uint64_t> state_visit_counts;
  /// Threshold variant only: unmet states were given up on.
  bool discarded = false;
  std::vector<StateId> unmet_states;
  std::size_t stages = 0;  // completed stages of a staged schedule
  double final_model_error = -1.0;
};

/// Independent random stream derived from a run seed (0 = environment).
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

struct SessionOptions {
  std::uint64_t step_cap = 0;
  std::uint64_t log_every = 10;
  bool log_model_error = false;
};

/**
 * Environment interaction shared by all agents: sampling, counters,
 * requirement refresh, metric logging and termination checks.
 */
class ExplorationSession {
 public:
  ExplorationSession(const TabularMdp& mdp, RequirementSchedule& schedule, std::uint64_t seed,
                     const SessionOptions& opts);

  const TabularMdp& mdp() const noexcept { return *mdp_; }
  const Counters& counters() const noexcept { return counters_; }
  Counters& counters() noexcept { return counters_; }
  RequirementSchedule& schedule() noexcept { return *schedule_; }
  const RequirementSchedule& schedule() const noexcept { return *schedule_; }
  /// Swaps in a new requirement (it is refreshed against the current counters).
  void set_schedule(RequirementSchedule& schedule);

  StateId state() const noexcept { return state_; }
  std::uint64_t time() const noexcept { return counters_.time(); }
  std::uint64_t step_cap() const noexcept { return opts_.step_cap; }
  bool out_of_budget() const noexcept { return time() >= opts_.step_cap; }

  /// Takes action a in the current state and returns the next state.
  StateId step(ActionId a);
  /// True once the requirement is met; staged schedules advance instead.
  bool requirements_met();

  void log_metrics();
  RunTrace& trace() noexcept { return trace_; }
  /// Final metric point and counter snapshot.
  RunTrace finish(bool completed);

 private:
  const TabularMdp* mdp_;
  RequirementSchedule* schedule_;
  SessionOptions opts_;
  Rng rng_;
  Counters counters_;
  StateId state_;
  RunTrace trace_;
  std::uint64_t last_logged_ = UINT64_MAX;
};

}  // namespace gosprl
