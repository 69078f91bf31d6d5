#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gosprl/agent.hpp"
#include "gosprl/mdp.hpp"

namespace gosprl {

enum class Algorithm {
  gosprl,
  gosprl_l,
  random,
  ucrl_zero_one,
  ucrl_zero,
  maxent_entropy,
  maxent_min_frequency,
  maxent_weighted
};
Algorithm parse_algorithm(const std::string& id);
std::string to_string(Algorithm a);

struct AlgorithmSpec {
  Algorithm algorithm = Algorithm::gosprl;
  std::string label;
  GosprlConfig cfg;
  double reach_threshold = 1.0;  // L of the restricted variant
  double threshold_alpha = 1.0;
};

struct ExperimentConfig {
  std::string name;
  EnvDescriptor env;
  nlohmann::json requirement;
  std::vector<AlgorithmSpec> algorithms;
  std::vector<std::uint64_t> seeds;
  std::string source_text;  // exact bytes the config was parsed from
  nlohmann::json echo;
};

/// Parses a JSON experiment description; unresolvable ids raise ConfigError.
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

EnvDescriptor env_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
RequirementSchedule requirement_from_json(const nlohmann::json& j, const TabularMdp& mdp,
                                          const std::string& base_dir = ".");

struct RunCell {
  std::string algo;
  std::uint64_t seed = 0;
  RunTrace trace;
};

struct ResultSet {
  std::string name;
  std::string env;
  std::string requirement;
  std::vector<RunCell> cells;
  std::string config_text;
  nlohmann::json config_echo;
  std::uint64_t seed_offset = 0;
};

/// Runs every (seed x algorithm) cell on up to `workers` threads; output order is seed-major.
ResultSet run_experiment(const ExperimentConfig& cfg, unsigned workers = 1, std::uint64_t seed_offset = 0);

struct Quantiles {
  double mean = 0.0, std = 0.0, min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, max = 0.0;
};
/// Summary of a sample (sample standard deviation, linear-interpolated quantiles).
Quantiles summarize(std::vector<double> values);

struct Aggregate {
  std::string algo;
  std::size_t runs = 0;
  std::size_t completed = 0;
  std::size_t capped = 0;
  Quantiles tau;  // over completed runs only
};
std::vector<Aggregate> aggregate(const ResultSet& rs);

/// Writes runs.csv and summary.json into `dir` (created if missing).
void write_results(const ResultSet& rs, const std::string& dir);
std::string runs_csv(const ResultSet& rs);
nlohmann::json summary_json(const ResultSet& rs);

/// Aggregates recomputed from a runs.csv file.
nlohmann::json aggregate_csv(const std::string& path);

/// SHA-1 of "blob <size>\0<content>", as git hash-object prints it.
std::string git_blob_hash(const std::string& content);

}  // namespace gosprl
