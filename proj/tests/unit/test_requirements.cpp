#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "gosprl/applications.hpp"
#include "gosprl/error.hpp"
#include "gosprl/requirements.hpp"
#include "oracles.hpp"

using namespace gosprl;

TEST_CASE("treasure and fixed requirements") {
  const auto t = RequirementSchedule::treasure(6, 2, 1);
  const auto& b = t.table();
  CHECK(b.size() == 12);
  CHECK(std::accumulate(b.begin(), b.end(), std::uint64_t{0}) == 12);
  CHECK(t.max_envelope() == 1);

  Counters c(3, 1);
  const auto s = RequirementSchedule::fixed(3, 1, {1, 2, 0});
  c.record(0, 0, 2);
  c.record(1, 0, 2);
  for (int i = 0; i < 5; ++i) c.record(2, 0, 2);
  CHECK_FALSE(s.undersampled(c, 0));
  CHECK(s.undersampled(c, 1));
  CHECK_FALSE(s.undersampled(c, 2));
  CHECK(s.remaining(c, 1) == 1);
  CHECK(s.gap(c, 2, 0) == doctest::Approx(-5.0));
  CHECK_THROWS_AS(RequirementSchedule::fixed(3, 1, {1, 2}), ParameterError);
}

TEST_CASE("state-only requirements count all actions") {
  const auto s = RequirementSchedule::fixed_states(2, 3, {3, 0});
  Counters c(2, 3);
  c.record(0, 0, 0);
  c.record(0, 2, 0);
  CHECK(s.state_only());
  CHECK(s.undersampled(c, 0));
  c.record(0, 1, 1);
  CHECK_FALSE(s.undersampled(c, 0));
  CHECK(s.satisfied(c));
}

TEST_CASE("uniform random requirements") {
  const auto a = RequirementSchedule::uniform_random(10, 5, 0, 100, 42);
  const auto b = RequirementSchedule::uniform_random(10, 5, 0, 100, 42);
  const auto c = RequirementSchedule::uniform_random(10, 5, 0, 100, 43);
  CHECK(a.table() == b.table());
  CHECK(a.table() != c.table());
  for (auto x : a.table()) CHECK(x <= 100);
  CHECK_THROWS_AS(RequirementSchedule::uniform_random(2, 2, 5, 4, 1), ParameterError);
}

TEST_CASE("reward estimation budget") {
  CHECK(reward_estimation_budget(6, 2, 0.1, 0.1) == 275);
  CHECK(reward_estimation_budget(6, 2, 0.1, 0.1) ==
        static_cast<std::uint64_t>(std::ceil(std::log(240.0) / 0.02)));
  const auto s = RequirementSchedule::reward_estimation(6, 2, 0.1, 0.1);
  for (auto x : s.table()) CHECK(x == 275);
  CHECK_THROWS_AS(reward_estimation_budget(6, 2, 0.0, 0.1), ParameterError);
  CHECK_THROWS_AS(reward_estimation_budget(6, 2, 0.1, 1.5), ParameterError);
}

TEST_CASE("model estimation budgets") {
  // Second term alone when no variance has been observed.
  CHECK(modest_phi(0.0, 6.0, 6, 2, 1.0, 0.1) == doctest::Approx(144.0 * std::log(17280.0)));
  CHECK(std::ceil(modest_phi(0.0, 6.0, 6, 2, 1.0, 0.1)) == 1406);
  CHECK(std::ceil(modest_phi(0.0, 1.0, 6, 2, 1.0, 0.1)) == std::ceil(24.0 * std::log(24.0 * 12.0 / 0.1)));
  CHECK(std::ceil(modest_phi(0.0, 1.0, 6, 2, 1.0, 0.1)) == 192);

  const Counters fresh(6, 2);
  const auto model = ConfidenceModel::from_counters(fresh, 0.1, 1.0);
  for (auto x : modest_budget(model, 1.0, 0.1, ModestNorm::l1)) CHECK(x == 1406);
  for (auto x : modest_budget(model, 1.0, 0.1, ModestNorm::linf)) CHECK(x == 192);

  const double x = 1.3;
  const double l = std::log(8.0 * std::exp(1.0) * x * x * std::sqrt(24.0) / (std::sqrt(0.1) * 0.5));
  const double ref = 57.0 * x * x / 0.25 * l * l + 24.0 * 6.0 / 0.5 * std::log(24.0 * 6.0 * 12.0 / 0.05);
  CHECK(modest_phi(x, 6.0, 6, 2, 0.5, 0.1) == doctest::Approx(ref));

  double prev = modest_phi(0.7, 6.0, 6, 2, 0.05, 0.1);
  for (double eta = 0.1; eta < 2.0; eta *= 2.0) {
    const double b = modest_phi(0.7, 6.0, 6, 2, eta, 0.1);
    CHECK(b < prev);
    prev = b;
  }
  prev = 0.0;
  for (double sig = 0.1; sig <= 3.0; sig += 0.1) {
    const double b = modest_phi(sig, 6.0, 6, 2, 0.5, 0.1);
    CHECK(b >= prev);
    prev = b;
  }
}

TEST_CASE("adaptive budgets stay under their envelope") {
  const auto m = riverswim(4);
  for (auto norm : {ModestNorm::l1, ModestNorm::linf}) {
    auto sched = RequirementSchedule::modest(4, 2, {0.5, 0.1, norm, 0.05, false});
    Counters c(4, 2);
    Rng rng(7);
    StateId s = 0;
    for (int t = 0; t < 3000; ++t) {
      const ActionId a = rng() % 2;
      const StateId n = sample_step(m, s, a, rng);
      c.record(s, a, n);
      sched.observe(c, s, a);
      s = n;
      if (t % 100 == 0) {
        for (StateId x = 0; x < 4; ++x) {
          for (ActionId y = 0; y < 2; ++y) CHECK(sched.required(x, y) <= sched.envelope(x, y));
        }
      }
    }
  }
}

TEST_CASE("goal-free cost-free allocation") {
  CHECK(gfcf_omega(0.5, 0.5, std::numeric_limits<double>::infinity(), 5.0) == 0.5);
  CHECK(gfcf_omega(0.0, 0.5, 2.0, 5.0) == doctest::Approx(0.05));
  CHECK_THROWS_AS(gfcf_omega(0.0, 0.5, std::numeric_limits<double>::infinity(), 5.0), ParameterError);

  const double X = 5, y = 0.5, G = 2, S = 4, SA = 8, e = 0.5, d = 0.1;
  const double t1 = X * X * X * G / (y * e * e) * std::log(X * SA / (y * e * d));
  const double t2 = X * X * S / (y * e) * std::log(X * SA / (y * e * d));
  const double t3 = X * X * G / (y * y) * std::pow(std::log(X * SA / (y * d)), 2);
  CHECK(t1 == doctest::Approx(14756).epsilon(1e-3));
  CHECK(t2 == doctest::Approx(2951).epsilon(1e-3));
  CHECK(t3 == doctest::Approx(8937).epsilon(1e-3));
  CHECK(gfcf_phi(X, y, G, 4, 2, e, d, 1.0) == doctest::Approx(t1 + t2 + t3));
  CHECK(gfcf_phi(X, y, G, 4, 2, e, d, 1.0) == doctest::Approx(26644).epsilon(1e-3));
  CHECK(gfcf_phi(X, y, G, 4, 2, e, d, 0.01) == doctest::Approx(0.01 * (t1 + t2 + t3)));

  const CostTable c{0.5, 0.7, 1.0, 0.9};
  GfcfPlanOptions opts;
  opts.c_min = 0.5;
  CHECK(gfcf_planning_costs(c, opts) == c);
  opts.c_min = 0.0;
  opts.theta = 2.0;
  opts.diameter_estimate = 5.0;
  const auto bumped = gfcf_planning_costs(c, opts);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(bumped[i] == doctest::Approx(c[i] + 0.05));
}

TEST_CASE("requirements from csv") {
  const auto dir = std::filesystem::temp_directory_path() / "gosprl_req_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "pairs.csv") << "1,2\n3,4\n0,0\n";
    std::ofstream(dir / "states.csv") << "5\n6\n7\n";
    std::ofstream(dir / "bad.csv") << "1,x\n3,4\n0,0\n";
  }
  const auto p = RequirementSchedule::load_csv((dir / "pairs.csv").string(), 3, 2);
  CHECK(p.required(1, 1) == 4);
  const auto s = RequirementSchedule::load_csv((dir / "states.csv").string(), 3, 2);
  CHECK(s.state_only());
  CHECK(s.required_state(2) == 7);
  CHECK_THROWS_AS(RequirementSchedule::load_csv((dir / "bad.csv").string(), 3, 2), ConfigError);
  CHECK_THROWS_AS(RequirementSchedule::load_csv((dir / "pairs.csv").string(), 4, 2), ConfigError);
  CHECK_THROWS_AS(RequirementSchedule::load_csv((dir / "none.csv").string(), 3, 2), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("diameter estimation") {
  GosprlConfig cfg;
  const TabularMdp one(1, 1, {1.0});
  CHECK(estimate_diameter(one, {0.5, 0.1, 1.0}, cfg, 1).estimate == 0.0);

  const TabularMdp cycle(3, 1, {0, 1, 0, 0, 0, 1, 1, 0, 0});
  const double D = oracle::enumerate_diameter(cycle);
  CHECK(D == doctest::Approx(2.0));
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto est = estimate_diameter(cycle, {0.5, 0.1, 0.01}, cfg, seed);
    CHECK(est.completed);
    CHECK(est.estimate >= D - 1e-9);
    CHECK(est.estimate <= 3.75 * D);
    CHECK(static_cast<double>(est.rounds) <= std::log2(D * 1.5) + 1.0 + 1e-9);
  }
  CHECK_THROWS_AS(estimate_diameter(cycle, {0.0, 0.1, 1.0}, cfg, 0), ParameterError);
}

TEST_CASE("successive rejects") {
  CHECK(successive_rejects_log(3) == doctest::Approx(0.5 + 1.0 + 0.5 + 1.0 / 3.0));
  const auto ph = successive_rejects_phases(3, 25);
  REQUIRE(ph.size() == 2);
  CHECK(ph[0] == 4);
  CHECK(ph[1] == 5);
  CHECK_THROWS_AS(successive_rejects_phases(3, 2), ParameterError);

  GosprlConfig cfg;
  const auto m = riverswim(3);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = best_state_identification(m, deterministic_rewards({0.0, 0.5, 1.0}), 25, cfg, seed);
    CHECK(r.identified == 2);
    CHECK(r.completed);
    // Survivors pull n_k - n_{k-1} each per phase.
    CHECK(r.reward_samples == 3 * 4 + 2 * 1);
    CHECK(r.reward_samples <= 25);
  }

  const auto chain = two_state(0.5);
  int wrong = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    wrong += best_state_identification(chain, bernoulli_rewards({0.2, 0.8}), 200, cfg, seed).identified != 1;
  }
  CHECK(wrong < 10);
}
