#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "gosprl/error.hpp"
#include "gosprl/harness.hpp"

using namespace gosprl;
namespace fs = std::filesystem;

namespace {

std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    // fields here never contain quotes except the env column, which is last-but-four
    std::vector<std::string> f;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
      if (ch == '"') {
        quoted = !quoted;
      } else if (ch == ',' && !quoted) {
        f.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    f.push_back(cur);
    out.push_back(f);
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kRiverswim = R"({
  "name": "rs",
  "environment": "riverswim:6",
  "requirement": {"kind": "treasure", "k": 3},
  "algorithms": ["gosprl", "random", {"id": "ucrl_zero_one", "label": "ucrl"}],
  "seeds": {"start": 0, "count": 6},
  "log_every": 20
})";

}  // namespace

TEST_CASE("single state random run") {
  const auto cfg = parse_config(R"({
    "environment": {"kind": "explicit", "n_states": 1, "n_actions": 1, "kernel": [[1.0]]},
    "requirement": {"kind": "matrix", "values": [[3]]},
    "algorithms": ["random"],
    "seeds": [0]
  })");
  const auto rs = run_experiment(cfg);
  REQUIRE(rs.cells.size() == 1);
  CHECK(rs.cells[0].trace.completed);
  CHECK(rs.cells[0].trace.stopping_time == 3);
}

TEST_CASE("determinism and parallel merge") {
  const auto cfg = parse_config(kRiverswim);
  const auto a = runs_csv(run_experiment(cfg, 1));
  const auto b = runs_csv(run_experiment(cfg, 1));
  const auto c = runs_csv(run_experiment(cfg, 4));
  CHECK(a == b);
  CHECK(a == c);
  const auto shifted = run_experiment(cfg, 2, 100);
  CHECK(shifted.cells[0].seed == 100);
  CHECK(runs_csv(shifted) != a);
}

TEST_CASE("csv layout and summary") {
  const auto cfg = parse_config(kRiverswim);
  const auto rs = run_experiment(cfg, 2);
  CHECK(rs.cells.size() == 18);
  CHECK(rs.cells[0].algo == "gosprl");
  CHECK(rs.cells[2].algo == "ucrl");
  CHECK(rs.cells[3].seed == 1);

  const auto csv = runs_csv(rs);
  CHECK(csv.rfind("seed,algo,env,requirement,t,metric,value\n", 0) == 0);
  const auto r = rows(csv);
  std::size_t expected = 0;
  for (const auto& cell : rs.cells) expected += cell.trace.metrics.size() + 1;
  CHECK(r.size() == expected);

  // Independent recomputation of the mean stopping time per algorithm.
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& f : r) {
    REQUIRE(f.size() == 7);
    if (f[5] == "stopping_time") {
      acc[f[1]].first += std::stod(f[6]);
      acc[f[1]].second += 1;
    }
  }
  const auto summary = summary_json(rs);
  CHECK(summary["runs"] == 18);
  for (const auto& agg : summary["aggregates"]) {
    const auto& [sum, n] = acc[agg["algo"].get<std::string>()];
    CHECK(agg["completed"] == n);
    CHECK(agg["stopping_time"]["mean"].get<double>() == doctest::Approx(sum / n));
  }
  CHECK(summary["config_hash"] == git_blob_hash(kRiverswim));
  CHECK(summary["config"]["name"] == "rs");
}

TEST_CASE("metric rows of one trace") {
  ResultSet rs;
  rs.env = "e";
  rs.requirement = "r";
  RunCell cell;
  cell.algo = "x";
  cell.trace.completed = true;
  cell.trace.stopping_time = 30;
  for (std::uint64_t t : {0, 10, 20}) cell.trace.metrics.push_back({t, Metric::proportion, t / 30.0});
  rs.cells.push_back(cell);
  const auto r = rows(runs_csv(rs));
  REQUIRE(r.size() == 4);
  CHECK(r[0][5] == "proportion");
  CHECK(r[3][5] == "stopping_time");
  CHECK(r[3][6] == "30");
}

TEST_CASE("empty result set") {
  const ResultSet rs;
  CHECK(runs_csv(rs) == "seed,algo,env,requirement,t,metric,value\n");
  const auto s = summary_json(rs);
  CHECK(s["runs"] == 0);
  CHECK(s["capped_runs"] == 0);
}

TEST_CASE("write and reread results") {
  const auto dir = fs::temp_directory_path() / "gosprl_harness_test";
  fs::remove_all(dir);
  const auto rs = run_experiment(parse_config(kRiverswim), 2);
  write_results(rs, dir.string());
  CHECK(slurp(dir / "runs.csv") == runs_csv(rs));
  const auto again = aggregate_csv((dir / "runs.csv").string());
  const auto direct = aggregate(rs);
  REQUIRE(again.size() == direct.size());
  for (std::size_t i = 0; i < direct.size(); ++i) {
    CHECK(again[i]["stopping_time"]["mean"].get<double>() == doctest::Approx(direct[i].tau.mean));
  }
  fs::remove_all(dir);
}

TEST_CASE("capped runs are reported separately") {
  auto cfg = parse_config(R"({
    "environment": "riverswim:6",
    "requirement": {"kind": "treasure", "k": 50},
    "algorithms": [{"id": "random", "step_cap": 40}],
    "seeds": [0, 1, 2]
  })");
  const auto rs = run_experiment(cfg);
  const auto agg = aggregate(rs);
  REQUIRE(agg.size() == 1);
  CHECK(agg[0].capped == 3);
  CHECK(agg[0].completed == 0);
  CHECK(summary_json(rs)["capped_runs"] == 3);
  CHECK(runs_csv(rs).find("capped_at") != std::string::npos);
}

TEST_CASE("summary statistics") {
  const auto q = summarize({4, 1, 3, 2});
  CHECK(q.mean == doctest::Approx(2.5));
  CHECK(q.std == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(q.median == doctest::Approx(2.5));
  CHECK(q.q25 == doctest::Approx(1.75));
  CHECK(q.min == 1);
  CHECK(q.max == 4);
}

TEST_CASE("git blob hash") {
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config("[]"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"algorithms": ["gosprl"]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"environment": "riverswim:6", "algorithms": []})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"environment": "riverswim:6", "algorithms": ["nope"]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"environment": "riverswim:6", "algorithms": ["gosprl", "gosprl"]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"environment": "riverswim:6", "algorithms": ["gosprl"], "seeds": []})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"environment": "riverswim:6", "algorithms": ["gosprl"], "delta": 2})"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_config(R"({"environment": "riverswim:6", "algorithms": [{"id": "gosprl", "goal_strategy": "x"}]})"),
      ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  const auto bad_req =
      parse_config(R"({"environment": "riverswim:6", "algorithms": ["gosprl"], "requirement": {"kind": "zzz"}})");
  CHECK_THROWS(run_experiment(bad_req));
}

TEST_CASE("environment descriptors in configs") {
  const auto dir = fs::temp_directory_path() / "gosprl_cfg_test";
  fs::create_directories(dir);
  std::ofstream(dir / "tiny.txt") << "S.\n.T\n";
  std::ofstream(dir / "req.csv") << "1\n1\n1\n1\n";
  std::ofstream(dir / "cfg.json") << R"({
    "environment": {"kind": "gridworld", "file": "tiny.txt", "fail_prob": 0.0},
    "requirement": {"kind": "csv", "path": "req.csv"},
    "algorithms": ["gosprl"],
    "seeds": [3]
  })";
  const auto cfg = load_config((dir / "cfg.json").string());
  const auto rs = run_experiment(cfg);
  CHECK(rs.cells[0].trace.completed);
  CHECK(rs.cells[0].trace.stopping_time >= 4);
  fs::remove_all(dir);

  CHECK(std::holds_alternative<env::Garnet>(
      env_from_json(nlohmann::json{{"kind", "garnet"}, {"n_states", 5}, {"n_actions", 2}, {"branching", 2}})));
  CHECK(std::holds_alternative<env::RiverSwim>(env_from_json(nlohmann::json("riverswim:4"))));
  CHECK_THROWS_AS(env_from_json(nlohmann::json{{"kind", "moon"}}), ConfigError);
}
