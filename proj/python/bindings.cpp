#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gosprl/agent.hpp"
#include "gosprl/applications.hpp"
#include "gosprl/error.hpp"
#include "gosprl/harness.hpp"
#include "gosprl/solvers.hpp"

namespace py = pybind11;
using namespace gosprl;

namespace {

TabularMdp load_env(const std::string& descriptor) { return build_env(parse_env_descriptor(descriptor)); }

py::dict trace_dict(const RunTrace& t) {
  py::dict d;
  d["seed"] = t.seed;
  d["completed"] = t.completed;
  d["stopping_time"] = t.stopping_time;
  d["step_cap"] = t.step_cap;
  d["visits"] = t.visits;
  d["attempts"] = t.attempts.size();
  d["discarded"] = t.discarded;
  d["final_model_error"] = t.final_model_error;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

  m.def("env_info", [](const std::string& descriptor) {
    const auto mdp = load_env(descriptor);
    const auto d = diameter(mdp);
    py::dict out;
    out["n_states"] = mdp.n_states();
    out["n_actions"] = mdp.n_actions();
    out["diameter"] = d.diameter;
    out["per_state"] = d.per_state;
    out["communicating"] = d.communicating;
    return out;
  }, py::arg("env"));

  m.def("kernel", [](const std::string& descriptor) {
    const auto mdp = load_env(descriptor);
    std::vector<std::vector<std::vector<double>>> k(mdp.n_states());
    for (StateId s = 0; s < mdp.n_states(); ++s) {
      for (ActionId a = 0; a < mdp.n_actions(); ++a) {
        const auto row = mdp.row(s, a);
        k[s].emplace_back(row.begin(), row.end());
      }
    }
    return k;
  }, py::arg("env"));

  m.def("estimate_diameter", [](const std::string& descriptor, double eps, double delta, double budget_scale,
                                std::uint64_t seed) {
    const auto mdp = load_env(descriptor);
    GosprlConfig cfg;
    const auto est = estimate_diameter(mdp, {eps, delta, budget_scale}, cfg, seed);
    py::dict out;
    out["estimate"] = est.estimate;
    out["rounds"] = est.rounds;
    out["steps"] = est.steps;
    out["completed"] = est.completed;
    return out;
  }, py::arg("env"), py::arg("eps") = 0.5, py::arg("delta") = 0.1, py::arg("budget_scale") = 1.0,
     py::arg("seed") = 0);

  m.def("run_treasure", [](const std::string& descriptor, std::uint64_t k, std::uint64_t seed, double alpha_p,
                           bool known_dynamics, std::uint64_t step_cap) {
    const auto mdp = load_env(descriptor);
    GosprlConfig cfg;
    cfg.alpha_p = alpha_p;
    cfg.known_dynamics = known_dynamics;
    cfg.step_cap = step_cap;
    return trace_dict(run_gosprl(mdp, RequirementSchedule::treasure(mdp.n_states(), mdp.n_actions(), k), cfg, seed));
  }, py::arg("env"), py::arg("k") = 1, py::arg("seed") = 0, py::arg("alpha_p") = 1.0,
     py::arg("known_dynamics") = false, py::arg("step_cap") = 0);

  m.def("run_config", [](const std::string& text, unsigned workers, std::uint64_t seed_offset,
                         const std::string& base_dir) {
    const auto cfg = parse_config(text, base_dir);
    ResultSet rs;
    {
      py::gil_scoped_release release;
      rs = run_experiment(cfg, workers, seed_offset);
    }
    return py::make_tuple(runs_csv(rs), summary_json(rs).dump());
  }, py::arg("config"), py::arg("workers") = 1, py::arg("seed_offset") = 0, py::arg("base_dir") = ".");

  m.def("git_blob_hash", &git_blob_hash, py::arg("content"));
}
