#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "gosprl/applications.hpp"
#include "gosprl/error.hpp"
#include "gosprl/harness.hpp"
#include "gosprl/solvers.hpp"

using namespace gosprl;

namespace {

std::uint64_t seed_offset_from_env() {
  const char* raw = std::getenv("GOSPRL_SEED_OFFSET");
  if (!raw || !*raw) return 0;
  char* end = nullptr;
  const auto v = std::strtoull(raw, &end, 10);
  if (*end != '\0') throw ConfigError(std::string("GOSPRL_SEED_OFFSET is not an integer: ") + raw);
  return v;
}

int cmd_run(const std::string& config, const std::string& out, unsigned workers) {
  const auto cfg = load_config(config);
  const auto rs = run_experiment(cfg, workers, seed_offset_from_env());
  write_results(rs, out);
  for (const auto& a : aggregate(rs)) {
    std::printf("%-22s runs=%zu completed=%zu capped=%zu tau_mean=%.1f tau_median=%.1f\n", a.algo.c_str(), a.runs,
                a.completed, a.capped, a.tau.mean, a.tau.median);
  }
  return 0;
}

int cmd_diameter(const std::string& env_text, double eps, double delta, double scale, std::uint64_t seed) {
  const auto mdp = build_env(parse_env_descriptor(env_text));
  GosprlConfig cfg;
  const auto est = estimate_diameter(mdp, {eps, delta, scale}, cfg, seed + seed_offset_from_env());
  std::printf("estimate %.6f\n", est.estimate);
  std::printf("rounds %zu\n", est.rounds);
  std::printf("steps %llu\n", static_cast<unsigned long long>(est.steps));
  std::printf("completed %s\n", est.completed ? "yes" : "no");
  std::printf("true_diameter %.6f\n", diameter(mdp).diameter);
  return est.completed ? 0 : 3;
}

int cmd_env_info(const std::string& env_text) {
  const auto desc = parse_env_descriptor(env_text);
  const auto mdp = build_env(desc);
  const auto d = diameter(mdp);
  std::printf("env %s\n", describe(desc).c_str());
  std::printf("S %zu\n", mdp.n_states());
  std::printf("A %zu\n", mdp.n_actions());
  std::printf("communicating %s\n", d.communicating ? "yes" : "no");
  std::printf("D %.6f\n", d.diameter);
  double total = 0.0;
  for (std::size_t s = 0; s < d.per_state.size(); ++s) {
    total += d.per_state[s];
    const std::string label = s < mdp.labels().size() ? " (" + mdp.labels()[s] + ")" : "";
    std::printf("D_s %zu%s %.6f\n", s, label.c_str(), d.per_state[s]);
  }
  std::printf("sum_D_s %.6f\n", total);
  return 0;
}

int cmd_metrics(const std::string& csv) {
  std::cout << aggregate_csv(csv).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"goal-oriented sample collection in tabular MDPs"};
  app.require_subcommand(1);

  std::string config, out, env_text, csv;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  double eps = 0.5, delta = 0.1, scale = 1.0;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("--config", config, "JSON experiment file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory")->required();
  run->add_option("--workers", workers, "parallel run cells")->check(CLI::PositiveNumber);

  auto* diam = app.add_subcommand("diameter", "estimate the diameter from samples");
  diam->add_option("--env", env_text, "environment descriptor")->required();
  diam->add_option("--eps", eps, "accuracy")->required()->check(CLI::PositiveNumber);
  diam->add_option("--delta", delta, "confidence");
  diam->add_option("--budget-scale", scale, "multiplier on the sampling budgets");
  diam->add_option("--seed", seed, "run seed");

  auto* info = app.add_subcommand("env-info", "print S, A, D and D_s");
  info->add_option("--env", env_text, "environment descriptor")->required();

  auto* metrics = app.add_subcommand("metrics", "recompute aggregates from runs.csv");
  metrics->add_option("--csv", csv, "runs.csv file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, out, workers);
    if (*diam) return cmd_diameter(env_text, eps, delta, scale, seed);
    if (*info) return cmd_env_info(env_text);
    if (*metrics) return cmd_metrics(csv);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
