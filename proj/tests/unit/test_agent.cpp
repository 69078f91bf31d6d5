#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "gosprl/agent.hpp"
#include "gosprl/baselines.hpp"
#include "gosprl/error.hpp"
#include "gosprl/metrics.hpp"
#include "oracles.hpp"

using namespace gosprl;

namespace {

bool meets(const RunTrace& t, const RequirementSchedule& b, std::size_t A) {
  for (StateId s = 0; s < b.n_states(); ++s) {
    if (b.state_only()) {
      if (t.state_visit_counts[s] < b.required_state(s)) return false;
      continue;
    }
    for (ActionId a = 0; a < A; ++a) {
      if (t.visits[s * A + a] < b.required(s, a)) return false;
    }
  }
  return true;
}

double mean_tau(const std::vector<RunTrace>& ts) {
  double x = 0.0;
  for (const auto& t : ts) x += static_cast<double>(t.stopping_time);
  return x / static_cast<double>(ts.size());
}

}  // namespace

TEST_CASE("goal set") {
  Counters c(3, 1);
  c.record(0, 0, 2);
  c.record(1, 0, 2);
  for (int i = 0; i < 5; ++i) c.record(2, 0, 2);
  const auto b = RequirementSchedule::fixed(3, 1, {1, 2, 0});
  CHECK(compute_goal_set(c, b) == std::vector<StateId>{1});
  CHECK(compute_goal_set(c, RequirementSchedule::fixed(3, 1, {0, 0, 0})).empty());

  const Counters fresh(4, 2);
  CHECK(compute_goal_set(fresh, RequirementSchedule::treasure(4, 2, 1)).size() == 4);
  GoalSetContext ctx;
  ctx.initial_phase = InitialPhase::min_remaining_budget;
  const auto skew = RequirementSchedule::fixed_states(4, 2, {5, 2, 9, 2});
  CHECK(compute_goal_set(fresh, skew, ctx) == std::vector<StateId>{1, 3});
  ctx.initial_phase = InitialPhase::max_remaining_budget;
  CHECK(compute_goal_set(fresh, skew, ctx) == std::vector<StateId>{2});
  CHECK_THROWS_AS(compute_goal_set(fresh, RequirementSchedule::treasure(3, 2, 1)), ParameterError);
}

TEST_CASE("goal strategies") {
  Counters c(3, 1);
  c.record(0, 0, 1);
  c.record(0, 0, 1);
  c.record(1, 0, 1);
  const auto b = RequirementSchedule::fixed_states(3, 1, {5, 5, 5});
  GoalSetContext ctx;
  ctx.strategy = GoalStrategy::least_sampled;
  CHECK(compute_goal_set(c, b, ctx) == std::vector<StateId>{2});
  const std::vector<std::uint64_t> tried{4, 2, 0}, won{2, 2, 0};
  ctx.strategy = GoalStrategy::best_success_ratio;
  ctx.attempted = &tried;
  ctx.succeeded = &won;
  CHECK(compute_goal_set(c, b, ctx) == std::vector<StateId>{1});
}

TEST_CASE("planning costs") {
  const auto m = riverswim(3);
  Counters c(3, 2);
  for (int i = 0; i < 3; ++i) c.record(0, 0, 0);
  const auto b = RequirementSchedule::fixed_states(3, 2, {6, 0, 4});
  CHECK(planning_costs(m, c, b, CostRule::unit, 10).empty());
  const auto pen = planning_costs(m, c, b, CostRule::visitation_penalty, 10.0);
  CHECK(pen[0] == doctest::Approx(1.0 + 9.0 * 0.5));
  CHECK(pen[1] == pen[0]);
  CHECK(pen[2] == doctest::Approx(10.0));
  CHECK(pen[4] == doctest::Approx(1.0));
  CHECK_THROWS_AS(planning_costs(m, c, b, CostRule::visitation_penalty, 0.5), ParameterError);
}

TEST_CASE("two-step chain") {
  const TabularMdp chain(2, 1, {0, 1, 0, 1});
  const auto t = run_gosprl(chain, RequirementSchedule::fixed_states(2, 1, {0, 1}), {}, 0);
  CHECK(t.completed);
  CHECK(t.stopping_time == 2);
  const auto none = run_gosprl(chain, RequirementSchedule::fixed_states(2, 1, {0, 0}), {}, 0);
  CHECK(none.completed);
  CHECK(none.stopping_time == 0);
}

TEST_CASE("start state as its own goal") {
  // 0 <-> 1 deterministically; only state 0 needs samples and the walk starts there.
  const TabularMdp flip(2, 1, {0, 1, 1, 0});
  const auto t = run_gosprl(flip, RequirementSchedule::fixed_states(2, 1, {2, 0}), {}, 0);
  CHECK(t.completed);
  CHECK(t.stopping_time == 3);
  REQUIRE(t.attempts.size() == 1);
  CHECK(t.attempts[0].reached_goal);
  CHECK(t.attempts[0].length == 3);
}

TEST_CASE("termination predicate and attempt bookkeeping") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t S = 3 + trial % 4, A = 1 + trial % 3;
    const auto m = oracle::random_communicating_mdp(S, A, rng, 2);
    const auto b = RequirementSchedule::uniform_random(S, A, 0, 6, trial);
    GosprlConfig cfg;
    cfg.goal_strategy = static_cast<GoalStrategy>(trial % 3);
    cfg.cost_rule = trial % 2 ? CostRule::visitation_penalty : CostRule::unit;
    cfg.alpha_p = trial % 2 ? 1.0 : 0.1;
    const auto t = run_gosprl(m, b, cfg, trial);
    CHECK(t.completed);
    CHECK(meets(t, b, A));
    CHECK(std::accumulate(t.visits.begin(), t.visits.end(), std::uint64_t{0}) == t.stopping_time);
    std::uint64_t total = 0;
    for (const auto& at : t.attempts) {
      CHECK(at.start == total);
      // Doubling caps every pair at max{U,1} + 1 visits, plus the goal action.
      CHECK(at.length <= at.start + 2 * S * A + 2);
      total += at.length;
    }
    CHECK(total == t.stopping_time);
    double prev = 0.0;
    for (const auto& p : t.metrics) {
      if (p.metric != Metric::proportion) continue;
      CHECK(p.value >= prev);
      prev = p.value;
    }
  }
}

TEST_CASE("restricted variant") {
  CHECK(threshold_phi(1, 5.0, 2, 1, 1.0) == doctest::Approx(5.0 + std::pow(5.0, 1.5) * 4.0));
  CHECK(std::ceil(threshold_phi(1, 5.0, 2, 1, 1.0)) == 50);
  CHECK_THROWS_AS(threshold_phi(1, 0.5, 2, 1, 1.0), ParameterError);

  const TabularMdp stuck(2, 1, {1, 0, 1, 0});
  const auto t = run_gosprl_l(stuck, RequirementSchedule::fixed_states(2, 1, {0, 1}), 5.0, 1.0, {}, 0);
  CHECK_FALSE(t.completed);
  CHECK(t.discarded);
  CHECK(t.stopping_time <= 50);
  CHECK(t.unmet_states == std::vector<StateId>{1});

  const auto zero = run_gosprl_l(stuck, RequirementSchedule::fixed_states(2, 1, {0, 0}), 5.0, 1.0, {}, 0);
  CHECK(zero.completed);
  CHECK_FALSE(zero.discarded);
  CHECK(zero.stopping_time == 0);

  const auto rs = riverswim(6);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto b = RequirementSchedule::treasure(6, 2, 3);
    const auto plain = run_gosprl(rs, b, {}, seed);
    const auto restricted = run_gosprl_l(rs, b, 15.0, 1.0, {}, seed);
    CHECK(plain.stopping_time == restricted.stopping_time);
    CHECK(plain.visits == restricted.visits);
    CHECK_FALSE(restricted.discarded);
  }
}

TEST_CASE("known dynamics treasure on riverswim") {
  GosprlConfig cfg;
  cfg.known_dynamics = true;
  std::vector<RunTrace> ts;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ts.push_back(run_gosprl(riverswim(6), RequirementSchedule::treasure(6, 2, 10), cfg, seed));
  }
  CHECK(mean_tau(ts) > 150.0);
  CHECK(mean_tau(ts) < 350.0);
}

TEST_CASE("step cap") {
  GosprlConfig cfg;
  cfg.step_cap = 25;
  const auto t = run_gosprl(riverswim(6), RequirementSchedule::treasure(6, 2, 50), cfg, 1);
  CHECK_FALSE(t.completed);
  CHECK(t.stopping_time == 25);
  const auto r = run_random(riverswim(6), RequirementSchedule::treasure(6, 2, 50), cfg, 1);
  CHECK_FALSE(r.completed);
  CHECK(r.stopping_time == 25);
  cfg.delta = 1.0;
  CHECK_THROWS_AS(run_gosprl(riverswim(6), RequirementSchedule::treasure(6, 2, 1), cfg, 1), ParameterError);
}

TEST_CASE("random baseline") {
  const TabularMdp one(1, 1, {1.0});
  CHECK(run_random(one, RequirementSchedule::fixed(1, 1, {0}), {}, 0).stopping_time == 0);
  CHECK(run_random(one, RequirementSchedule::fixed(1, 1, {5}), {}, 0).stopping_time == 5);

  const auto m = riverswim(6);
  std::vector<RunTrace> g, r;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    g.push_back(run_gosprl(m, RequirementSchedule::treasure(6, 2, 10), {}, seed));
    r.push_back(run_random(m, RequirementSchedule::treasure(6, 2, 10), {}, seed));
  }
  CHECK(mean_tau(r) > mean_tau(g));
}

TEST_CASE("ucrl variants") {
  const auto m = riverswim(4);
  const auto met = RequirementSchedule::fixed(4, 2, std::vector<std::uint64_t>(8, 0));
  CHECK(run_ucrl_variant(m, met, UcrlMode::zero_one, {}, 0).stopping_time == 0);

  Counters c(1, 2);
  for (int i = 0; i < 3; ++i) c.record(0, 0, 0);
  for (int i = 0; i < 7; ++i) c.record(0, 1, 0);
  const auto b = RequirementSchedule::fixed(1, 2, {3, 3});
  const auto zero = ucrl_rewards(c, b, UcrlMode::zero);
  CHECK(zero[0] == 1.0);
  CHECK(zero[1] == doctest::Approx(0.5));
  const auto zo = ucrl_rewards(c, RequirementSchedule::fixed(1, 2, {4, 3}), UcrlMode::zero_one);
  CHECK(zo[0] == 1.0);
  CHECK(zo[1] == 0.0);
  CHECK_THROWS_AS(parse_ucrl_mode("two"), ConfigError);
}

TEST_CASE("maxent variants") {
  const TabularMdp one(1, 1, {1.0});
  for (auto mode : {MaxEntMode::entropy, MaxEntMode::min_frequency, MaxEntMode::weighted}) {
    CHECK(run_maxent(one, RequirementSchedule::fixed(1, 1, {7}), mode, {}, 0).stopping_time == 7);
  }

  // Symmetric toggle: action 0 stays, action 1 switches.
  const TabularMdp toggle(2, 2, {1, 0, 0, 1, 0, 1, 1, 0});
  GosprlConfig cfg;
  cfg.step_cap = 1000;
  const auto t = run_maxent(toggle, RequirementSchedule::fixed(2, 2, {100000, 100000, 100000, 100000}),
                            MaxEntMode::entropy, cfg, 3);
  CHECK(t.stopping_time == 1000);
  double l1 = 0.0;
  for (auto v : t.visits) l1 += std::abs(static_cast<double>(v) / 1000.0 - 0.25);
  CHECK(l1 < 0.1);

  Counters c(2, 2);
  c.record(0, 0, 0);
  const auto f = smoothed_frequencies(c);
  CHECK(std::accumulate(f.begin(), f.end(), 0.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(parse_maxent_mode("nope"), ConfigError);
}

TEST_CASE("baselines share the termination predicate") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t S = 3 + trial % 3, A = 2;
    const auto m = oracle::random_communicating_mdp(S, A, rng, 3);
    const auto b = RequirementSchedule::uniform_random(S, A, 0, 4, trial);
    std::vector<RunTrace> ts{run_random(m, b, {}, trial),
                             run_ucrl_variant(m, b, UcrlMode::zero_one, {}, trial),
                             run_ucrl_variant(m, b, UcrlMode::zero, {}, trial),
                             run_maxent(m, b, MaxEntMode::entropy, {}, trial),
                             run_maxent(m, b, MaxEntMode::min_frequency, {}, trial),
                             run_maxent(m, b, MaxEntMode::weighted, {}, trial)};
    for (const auto& t : ts) {
      CHECK(t.completed);
      CHECK(meets(t, b, A));
      CHECK(std::accumulate(t.visits.begin(), t.visits.end(), std::uint64_t{0}) == t.stopping_time);
    }
  }
}

TEST_CASE("metrics") {
  const TabularMdp m(2, 1, {0.5, 0.5, 0.0, 1.0});
  Counters c(2, 1);
  c.record(1, 0, 1);
  const auto e = pair_l1_errors(c, m);
  CHECK(e[0] == 1.0);
  CHECK(e[1] == 0.0);
  CHECK(model_error(c, m) == doctest::Approx(0.5));
  c.record(0, 0, 0);
  c.record(0, 0, 1);
  CHECK(model_error(c, m) == doctest::Approx(0.0));

  const auto b = RequirementSchedule::fixed(2, 1, {1, 3});
  CHECK(proportion_satisfied(c, b) == doctest::Approx(0.5));
  c.record(1, 0, 1);
  c.record(1, 0, 1);
  CHECK(proportion_satisfied(c, b) == 1.0);
}
