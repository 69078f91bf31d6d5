#include "gosprl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "gosprl/baselines.hpp"
#include "gosprl/error.hpp"
#include "gosprl/solvers.hpp"

namespace gosprl {

namespace fs = std::filesystem;
using nlohmann::json;

Algorithm parse_algorithm(const std::string& id) {
  static const std::map<std::string, Algorithm> table = {
      {"gosprl", Algorithm::gosprl},
      {"gosprl_l", Algorithm::gosprl_l},
      {"random", Algorithm::random},
      {"ucrl_zero_one", Algorithm::ucrl_zero_one},
      {"ucrl_zero", Algorithm::ucrl_zero},
      {"maxent_entropy", Algorithm::maxent_entropy},
      {"maxent_min_frequency", Algorithm::maxent_min_frequency},
      {"maxent_weighted", Algorithm::maxent_weighted},
  };
  const auto it = table.find(id);
  if (it == table.end()) throw ConfigError("unknown algorithm '" + id + "'");
  return it->second;
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::gosprl: return "gosprl";
    case Algorithm::gosprl_l: return "gosprl_l";
    case Algorithm::random: return "random";
    case Algorithm::ucrl_zero_one: return "ucrl_zero_one";
    case Algorithm::ucrl_zero: return "ucrl_zero";
    case Algorithm::maxent_entropy: return "maxent_entropy";
    case Algorithm::maxent_min_frequency: return "maxent_min_frequency";
    case Algorithm::maxent_weighted: return "maxent_weighted";
  }
  return "?";
}

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <class T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  return get_or<T>(j, key, T{});
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? path : (fs::path(base_dir) / p).string();
}

std::vector<double> flatten(const json& j) {
  std::vector<double> out;
  if (j.is_number()) {
    out.push_back(j.get<double>());
  } else if (j.is_array()) {
    for (const auto& x : j) {
      const auto sub = flatten(x);
      out.insert(out.end(), sub.begin(), sub.end());
    }
  } else {
    throw ConfigError("expected a number or a (nested) array of numbers");
  }
  return out;
}

std::vector<std::uint64_t> to_counts(const std::vector<double>& v) {
  std::vector<std::uint64_t> out;
  for (double x : v) {
    if (!(x >= 0.0) || x != std::floor(x)) throw ConfigError("requirements must be nonnegative integers");
    out.push_back(static_cast<std::uint64_t>(x));
  }
  return out;
}

void apply_agent_fields(const json& j, GosprlConfig& cfg) {
  cfg.delta = get_or(j, "delta", cfg.delta);
  cfg.alpha_p = get_or(j, "alpha_p", cfg.alpha_p);
  cfg.known_dynamics = get_or(j, "known_dynamics", cfg.known_dynamics);
  if (j.contains("goal_strategy")) cfg.goal_strategy = parse_goal_strategy(j.at("goal_strategy").get<std::string>());
  if (j.contains("initial_phase")) cfg.initial_phase = parse_initial_phase(j.at("initial_phase").get<std::string>());
  if (j.contains("cost_rule")) cfg.cost_rule = parse_cost_rule(j.at("cost_rule").get<std::string>());
  cfg.max_cost = get_or(j, "max_cost", cfg.max_cost);
  cfg.step_cap = get_or(j, "step_cap", cfg.step_cap);
  cfg.log_every = get_or(j, "log_every", cfg.log_every);
  cfg.log_model_error = get_or(j, "log_model_error", cfg.log_model_error);
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
  if (!(cfg.alpha_p > 0.0)) throw ConfigError("alpha_p must be positive");
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string csv_field(const std::string& x) {
  if (x.find_first_of(",\"\n") == std::string::npos) return x;
  std::string out = "\"";
  for (char ch : x) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        out.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.emplace_back();
    } else {
      out.back() += ch;
    }
  }
  return out;
}

}  // namespace

EnvDescriptor env_from_json(const json& j, const std::string& base_dir) {
  try {
    if (j.is_string()) {
      auto text = j.get<std::string>();
      // Relative layout paths resolve against the config directory.
      const auto colon = text.find(':');
      const auto kind = text.substr(0, colon);
      if (colon != std::string::npos && (kind == "grid" || kind == "gridworld")) {
        const auto rest = text.substr(colon + 1);
        const auto name = rest.substr(0, rest.find(','));
        const auto names = builtin_layout_names();
        if (std::find(names.begin(), names.end(), name) == names.end()) {
          text = kind + ":" + resolve(base_dir, name) + rest.substr(name.size());
        }
      }
      return parse_env_descriptor(text);
    }
    if (!j.is_object()) throw ConfigError("environment must be a string or an object");
    const auto kind = require<std::string>(j, "kind");
    if (kind == "riverswim") return env::RiverSwim{get_or<std::size_t>(j, "n_states", 6)};
    if (kind == "gridworld") {
      const double pf = get_or(j, "fail_prob", 0.1);
      env::Gridworld g;
      if (j.contains("layout")) {
        g.name = j.at("layout").get<std::string>();
        g.grid = parse_grid(builtin_layout(g.name), pf);
      } else if (j.contains("file")) {
        g.name = j.at("file").get<std::string>();
        g.grid = load_grid(resolve(base_dir, g.name), pf);
      } else if (j.contains("text")) {
        g.name = get_or<std::string>(j, "name", "inline");
        g.grid = parse_grid(j.at("text").get<std::string>(), pf);
      } else {
        throw ConfigError("gridworld needs 'layout', 'file' or 'text'");
      }
      g.grid.trap_cost = get_or(j, "trap_cost", g.grid.trap_cost);
      g.grid.validate();
      return g;
    }
    if (kind == "garnet") {
      env::Garnet g;
      g.n_states = require<std::size_t>(j, "n_states");
      g.n_actions = require<std::size_t>(j, "n_actions");
      g.branching = require<std::size_t>(j, "branching");
      g.seed = get_or<std::uint64_t>(j, "seed", 0);
      g.anchor_mass = get_or(j, "anchor_mass", g.anchor_mass);
      return g;
    }
    if (kind == "wheel") {
      env::Wheel w;
      w.spokes = require<std::size_t>(j, "spokes");
      if (j.contains("eps")) {
        w.eps = flatten(j.at("eps"));
        if (w.eps.size() == 1) w.eps.assign(w.spokes, w.eps[0]);
      }
      return w;
    }
    if (kind == "three_state_toy" || kind == "toy") return env::ThreeStateToy{require<double>(j, "nu")};
    if (kind == "two_state") return env::TwoState{require<double>(j, "q")};
    if (kind == "explicit") {
      env::Explicit e;
      e.n_states = require<std::size_t>(j, "n_states");
      e.n_actions = require<std::size_t>(j, "n_actions");
      e.kernel = flatten(j.at("kernel"));
      e.start = get_or<std::size_t>(j, "start", 0);
      return e;
    }
    throw ConfigError("unknown environment kind '" + kind + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid environment: ") + e.what());
  }
}

RequirementSchedule requirement_from_json(const json& j, const TabularMdp& mdp, const std::string& base_dir) {
  const std::size_t S = mdp.n_states(), A = mdp.n_actions();
  try {
    const auto kind = require<std::string>(j, "kind");
    if (kind == "treasure") return RequirementSchedule::treasure(S, A, get_or<std::uint64_t>(j, "k", 1));
    if (kind == "uniform") {
      return RequirementSchedule::uniform_random(S, A, get_or<std::uint64_t>(j, "low", 0),
                                                 get_or<std::uint64_t>(j, "high", 100),
                                                 get_or<std::uint64_t>(j, "seed", 0));
    }
    if (kind == "matrix") return RequirementSchedule::fixed(S, A, to_counts(flatten(j.at("values"))));
    if (kind == "states") return RequirementSchedule::fixed_states(S, A, to_counts(flatten(j.at("values"))));
    if (kind == "csv") return RequirementSchedule::load_csv(resolve(base_dir, require<std::string>(j, "path")), S, A);
    if (kind == "reward_est") {
      return RequirementSchedule::reward_estimation(S, A, require<double>(j, "eps"), get_or(j, "delta", 0.1));
    }
    if (kind == "modest" || kind == "rmodest") {
      ModestParams p;
      p.eta = get_or(j, "eta", 1.0);
      p.delta = get_or(j, "delta", 0.1);
      p.norm = kind == "rmodest" || get_or<std::string>(j, "norm", "l1") == "linf" ? ModestNorm::linf : ModestNorm::l1;
      p.scale = get_or(j, "scale", 1.0);
      p.halving = get_or(j, "halving", false);
      return RequirementSchedule::modest(S, A, p);
    }
    if (kind == "gfcf") {
      GfcfParams p;
      const auto& d = j.contains("diameter_estimate") ? j.at("diameter_estimate") : json("oracle");
      p.diameter_estimate = d.is_string() && d.get<std::string>() == "oracle" ? diameter(mdp).diameter : d.get<double>();
      p.eps = get_or(j, "eps", p.eps);
      p.delta = get_or(j, "delta", p.delta);
      p.c_min = get_or(j, "c_min", p.c_min);
      p.theta = get_or(j, "theta", p.theta);
      p.alpha = get_or(j, "alpha", p.alpha);
      return RequirementSchedule::gfcf(S, A, p);
    }
    throw ConfigError("unknown requirement kind '" + kind + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid requirement: ") + e.what());
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  cfg.source_text = text;
  cfg.echo = j;
  cfg.name = get_or<std::string>(j, "name", "experiment");
  if (!j.contains("environment")) throw ConfigError("missing field 'environment'");
  cfg.env = env_from_json(j.at("environment"), base_dir);
  cfg.requirement = j.contains("requirement") ? j.at("requirement") : json{{"kind", "treasure"}, {"k", 1}};
  if (cfg.requirement.is_object() && cfg.requirement.contains("path")) {
    cfg.requirement["path"] = resolve(base_dir, cfg.requirement["path"].get<std::string>());
  }

  GosprlConfig common;
  apply_agent_fields(j, common);
  if (!j.contains("algorithms") || !j.at("algorithms").is_array() || j.at("algorithms").empty()) {
    throw ConfigError("'algorithms' must be a nonempty array");
  }
  for (const auto& a : j.at("algorithms")) {
    AlgorithmSpec spec;
    spec.cfg = common;
    if (a.is_string()) {
      spec.algorithm = parse_algorithm(a.get<std::string>());
      spec.label = a.get<std::string>();
    } else {
      const auto id = require<std::string>(a, "id");
      spec.algorithm = parse_algorithm(id);
      spec.label = get_or<std::string>(a, "label", id);
      apply_agent_fields(a, spec.cfg);
      spec.reach_threshold = get_or(a, "L", spec.reach_threshold);
      spec.threshold_alpha = get_or(a, "alpha", spec.threshold_alpha);
    }
    for (const auto& other : cfg.algorithms) {
      if (other.label == spec.label) throw ConfigError("duplicate algorithm label '" + spec.label + "'");
    }
    cfg.algorithms.push_back(spec);
  }

  const json seeds = j.contains("seeds") ? j.at("seeds") : json::array({0});
  if (seeds.is_array()) {
    for (const auto& s : seeds) cfg.seeds.push_back(s.get<std::uint64_t>());
  } else if (seeds.is_object()) {
    const auto start = get_or<std::uint64_t>(seeds, "start", 0);
    const auto count = require<std::uint64_t>(seeds, "count");
    for (std::uint64_t i = 0; i < count; ++i) cfg.seeds.push_back(start + i);
  } else {
    throw ConfigError("'seeds' must be an array or {start, count}");
  }
  if (cfg.seeds.empty()) throw ConfigError("no seeds given");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), fs::path(path).parent_path().string());
}

ResultSet run_experiment(const ExperimentConfig& cfg, unsigned workers, std::uint64_t seed_offset) {
  // Resolve everything before the first run starts.
  const TabularMdp mdp = build_env(cfg.env);
  const RequirementSchedule schedule = requirement_from_json(cfg.requirement, mdp);

  ResultSet rs;
  rs.name = cfg.name;
  rs.env = describe(cfg.env);
  rs.requirement = schedule.describe();
  rs.config_text = cfg.source_text;
  rs.config_echo = cfg.echo;
  rs.seed_offset = seed_offset;
  const std::size_t n_algos = cfg.algorithms.size();
  rs.cells.resize(cfg.seeds.size() * n_algos);

  auto run_cell = [&](std::size_t idx) {
    const auto& spec = cfg.algorithms[idx % n_algos];
    const std::uint64_t seed = cfg.seeds[idx / n_algos] + seed_offset;
    RunTrace trace;
    switch (spec.algorithm) {
      case Algorithm::gosprl: trace = run_gosprl(mdp, schedule, spec.cfg, seed); break;
      case Algorithm::gosprl_l:
        trace = run_gosprl_l(mdp, schedule, spec.reach_threshold, spec.threshold_alpha, spec.cfg, seed);
        break;
      case Algorithm::random: trace = run_random(mdp, schedule, spec.cfg, seed); break;
      case Algorithm::ucrl_zero_one: trace = run_ucrl_variant(mdp, schedule, UcrlMode::zero_one, spec.cfg, seed); break;
      case Algorithm::ucrl_zero: trace = run_ucrl_variant(mdp, schedule, UcrlMode::zero, spec.cfg, seed); break;
      case Algorithm::maxent_entropy: trace = run_maxent(mdp, schedule, MaxEntMode::entropy, spec.cfg, seed); break;
      case Algorithm::maxent_min_frequency:
        trace = run_maxent(mdp, schedule, MaxEntMode::min_frequency, spec.cfg, seed);
        break;
      case Algorithm::maxent_weighted: trace = run_maxent(mdp, schedule, MaxEntMode::weighted, spec.cfg, seed); break;
    }
    rs.cells[idx] = RunCell{spec.label, seed, std::move(trace)};
  };

  const std::size_t n = rs.cells.size();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) run_cell(i);
    return rs;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          run_cell(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rs;
}

Quantiles summarize(std::vector<double> v) {
  Quantiles q;
  if (v.empty()) return q;
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  q.mean = sum / n;
  double ss = 0.0;
  for (double x : v) ss += (x - q.mean) * (x - q.mean);
  q.std = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  auto quantile = [&](double p) {
    const double h = (n - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  q.min = v.front();
  q.q25 = quantile(0.25);
  q.median = quantile(0.5);
  q.q75 = quantile(0.75);
  q.max = v.back();
  return q;
}

std::vector<Aggregate> aggregate(const ResultSet& rs) {
  std::vector<Aggregate> out;
  std::map<std::string, std::vector<double>> taus;
  for (const auto& cell : rs.cells) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Aggregate& a) { return a.algo == cell.algo; });
    if (it == out.end()) {
      out.push_back(Aggregate{cell.algo, 0, 0, 0, {}});
      it = out.end() - 1;
    }
    ++it->runs;
    if (cell.trace.completed) {
      ++it->completed;
      taus[cell.algo].push_back(static_cast<double>(cell.trace.stopping_time));
    } else {
      ++it->capped;
    }
  }
  for (auto& a : out) a.tau = summarize(taus[a.algo]);
  return out;
}

std::string runs_csv(const ResultSet& rs) {
  std::ostringstream out;
  out << "seed,algo,env,requirement,t,metric,value\n";
  for (const auto& cell : rs.cells) {
    const std::string prefix =
        std::to_string(cell.seed) + "," + csv_field(cell.algo) + "," + csv_field(rs.env) + "," + csv_field(rs.requirement) + ",";
    for (const auto& m : cell.trace.metrics) {
      out << prefix << m.t << "," << metric_name(m.metric) << "," << fmt(m.value) << "\n";
    }
    const auto tau = cell.trace.stopping_time;
    out << prefix << tau << "," << (cell.trace.completed ? "stopping_time" : "capped_at") << "," << tau << "\n";
    if (cell.trace.discarded) out << prefix << tau << ",discarded," << cell.trace.unmet_states.size() << "\n";
  }
  return out.str();
}

namespace {

json quantiles_json(const Quantiles& q) {
  return {{"mean", q.mean}, {"std", q.std}, {"min", q.min}, {"q25", q.q25},
          {"median", q.median}, {"q75", q.q75}, {"max", q.max}};
}

}  // namespace

json summary_json(const ResultSet& rs) {
  json aggs = json::array();
  std::size_t capped = 0;
  for (const auto& a : aggregate(rs)) {
    capped += a.capped;
    aggs.push_back({{"algo", a.algo},
                    {"env", rs.env},
                    {"requirement", rs.requirement},
                    {"runs", a.runs},
                    {"completed", a.completed},
                    {"capped", a.capped},
                    {"stopping_time", quantiles_json(a.tau)}});
  }
  return {{"name", rs.name},
          {"runs", rs.cells.size()},
          {"capped_runs", capped},
          {"aggregates", aggs},
          {"seed_offset", rs.seed_offset},
          {"config_hash", git_blob_hash(rs.config_text)},
          {"config", rs.config_echo}};
}

void write_results(const ResultSet& rs, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  auto write = [&](const std::string& name, const std::string& content) {
    const auto path = (fs::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
    if (!out) throw std::runtime_error("error while writing '" + path + "'");
  };
  write("runs.csv", runs_csv(rs));
  write("summary.json", summary_json(rs).dump(2) + "\n");
}

json aggregate_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "seed,algo,env,requirement,t,metric,value") {
    throw std::runtime_error(path + ": not a runs.csv file (unexpected header)");
  }
  struct Group {
    std::string algo, env, requirement;
    std::vector<double> taus;
    std::size_t capped = 0;
  };
  std::vector<Group> groups;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv_split(line);
    if (f.size() != 7) throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 7 columns");
    if (f[5] != "stopping_time" && f[5] != "capped_at") continue;
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.algo == f[1] && g.env == f[2] && g.requirement == f[3];
    });
    if (it == groups.end()) {
      groups.push_back({f[1], f[2], f[3], {}, 0});
      it = groups.end() - 1;
    }
    if (f[5] == "stopping_time") {
      it->taus.push_back(std::stod(f[6]));
    } else {
      ++it->capped;
    }
  }
  json out = json::array();
  for (const auto& g : groups) {
    out.push_back({{"algo", g.algo},
                   {"env", g.env},
                   {"requirement", g.requirement},
                   {"runs", g.taus.size() + g.capped},
                   {"completed", g.taus.size()},
                   {"capped", g.capped},
                   {"stopping_time", quantiles_json(summarize(g.taus))}});
  }
  return out;
}

std::string git_blob_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

}  // namespace gosprl
