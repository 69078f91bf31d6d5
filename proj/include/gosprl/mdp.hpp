#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gosprl {

using StateId = std::size_t;
using ActionId = std::size_t;
using Rng = std::mt19937_64;

/// Uniform draw in [0, 1) built from the top 53 bits of the engine output,
/// so results do not depend on the standard library's distribution code.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/**
 * Immutable finite MDP.
 *
 * The kernel is stored densely as kernel[(s * A + a) * S + s'].  Optional
 * per-state costs live in [1, c_max] and default to 1; they are used by the
 * cost-weighted exploration variants (e.g. trap cells in gridworlds).
 */
class TabularMdp {
 public:
  TabularMdp(std::size_t n_states, std::size_t n_actions, std::vector<double> kernel,
             StateId start_state = 0, std::vector<double> state_costs = {},
             std::vector<std::string> labels = {});

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  StateId start_state() const noexcept { return start_; }

  std::span<const double> row(StateId s, ActionId a) const;
  double prob(StateId s, ActionId a, StateId next) const;
  const std::vector<double>& kernel() const noexcept { return kernel_; }

  /// Cost weight of state s (1 when no costs were given).
  double state_cost(StateId s) const;
  bool has_state_costs() const noexcept { return !state_costs_.empty(); }
  const std::vector<double>& state_costs() const noexcept { return state_costs_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Support size of the (s, a) row.
  std::size_t support(StateId s, ActionId a) const;

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  std::vector<double> kernel_;
  StateId start_;
  std::vector<double> state_costs_;
  std::vector<std::string> labels_;
};

using Cell = std::pair<int, int>;  // (row, column)

struct GridSpec {
  int width = 0;
  int height = 0;
  std::set<Cell> walls;
  std::set<Cell> terminals;
  std::set<Cell> traps;
  Cell start{0, 0};
  double fail_prob = 0.1;
  double trap_cost = 10.0;

  void validate() const;
};

/// Parses a text layout: '#' wall, 'S' start, 'T' terminal, 'X' trap, '.' free.
GridSpec parse_grid(const std::string& text, double fail_prob = 0.1);
GridSpec load_grid(const std::string& path, double fail_prob = 0.1);

/// Text of a layout bundled with the library ("corridor24", "four_room43", ...).
const std::string& builtin_layout(const std::string& name);
std::vector<std::string> builtin_layout_names();

namespace env {

struct RiverSwim {
  std::size_t n_states = 6;
};
struct Gridworld {
  GridSpec grid;
  std::string name;
};
struct Garnet {
  std::size_t n_states = 10;
  std::size_t n_actions = 5;
  std::size_t branching = 5;
  std::uint64_t seed = 0;
  double anchor_mass = 0.001;
  StateId anchor = 0;
};
/// Hub-and-spokes MDP: hub 0 plus `spokes` outer states, one action per spoke.
struct Wheel {
  std::size_t spokes = 5;
  std::vector<double> eps;  // empty: 0.5 everywhere
};
struct ThreeStateToy {
  double nu = 0.1;
};
/// Two-state chain x -> y with probability q, y -> x surely.
struct TwoState {
  double q = 0.5;
};
struct Explicit {
  std::size_t n_states = 1;
  std::size_t n_actions = 1;
  std::vector<double> kernel;
  StateId start = 0;
};

}  // namespace env

using EnvDescriptor = std::variant<env::RiverSwim, env::Gridworld, env::Garnet, env::Wheel,
                                   env::ThreeStateToy, env::TwoState, env::Explicit>;

TabularMdp build_env(const EnvDescriptor& desc);

/**
 * Parses the compact command-line form, e.g. "riverswim:6", "garnet:50,5,25,7",
 * "wheel:5,0.5", "toy:0.1", "two_state:0.2", "grid:corridor24" or
 * "grid:path/to/layout.txt".
 */
EnvDescriptor parse_env_descriptor(const std::string& text);
std::string describe(const EnvDescriptor& desc);

TabularMdp riverswim(std::size_t n_states);
TabularMdp gridworld(const GridSpec& grid);
TabularMdp garnet(std::size_t n_states, std::size_t n_actions, std::size_t branching,
                  std::uint64_t seed, double anchor_mass = 0.001, StateId anchor = 0);
TabularMdp wheel(std::size_t spokes, std::vector<double> eps = {});
TabularMdp three_state_toy(double nu);
TabularMdp two_state(double q);

/// Draws the next state from kernel(s, a, .).
StateId sample_step(const TabularMdp& mdp, StateId s, ActionId a, Rng& rng);

}  // namespace gosprl
