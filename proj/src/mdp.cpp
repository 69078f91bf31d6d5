#include "gosprl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "gosprl/error.hpp"

namespace gosprl {

namespace {

constexpr double kRowTolerance = 1e-12;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("cannot parse " + what + " from '" + s + "'");
  }
}

std::uint64_t parse_uint(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("cannot parse " + what + " from '" + s + "'");
  }
}

}  // namespace

TabularMdp::TabularMdp(std::size_t n_states, std::size_t n_actions, std::vector<double> kernel,
                       StateId start_state, std::vector<double> state_costs,
                       std::vector<std::string> labels)
    : n_states_(n_states),
      n_actions_(n_actions),
      kernel_(std::move(kernel)),
      start_(start_state),
      state_costs_(std::move(state_costs)),
      labels_(std::move(labels)) {
  if (n_states_ == 0 || n_actions_ == 0) {
    throw ValidationError("MDP needs at least one state and one action");
  }
  if (kernel_.size() != n_states_ * n_actions_ * n_states_) {
    throw ValidationError("kernel size " + std::to_string(kernel_.size()) + " does not match " +
                          std::to_string(n_states_) + "x" + std::to_string(n_actions_) + "x" +
                          std::to_string(n_states_));
  }
  if (start_ >= n_states_) throw ValidationError("start state out of range");
  for (StateId s = 0; s < n_states_; ++s) {
    for (ActionId a = 0; a < n_actions_; ++a) {
      double total = 0.0;
      for (double p : row(s, a)) {
        if (!(p >= 0.0 && p <= 1.0)) {
          throw ValidationError("kernel entry outside [0,1] at state " + std::to_string(s) +
                                ", action " + std::to_string(a));
        }
        total += p;
      }
      if (std::abs(total - 1.0) > kRowTolerance) {
        throw ValidationError("kernel row (" + std::to_string(s) + ", " + std::to_string(a) +
                              ") sums to " + std::to_string(total));
      }
    }
  }
  if (!state_costs_.empty()) {
    if (state_costs_.size() != n_states_) throw ValidationError("state_costs size mismatch");
    for (double c : state_costs_) {
      if (!(c >= 1.0) || !std::isfinite(c)) {
        throw ValidationError("state costs must be finite and >= 1");
      }
    }
  }
  if (!labels_.empty() && labels_.size() != n_states_) {
    throw ValidationError("labels size mismatch");
  }
}

std::span<const double> TabularMdp::row(StateId s, ActionId a) const {
  if (s >= n_states_ || a >= n_actions_) throw IndexError("state or action out of range");
  return {kernel_.data() + (s * n_actions_ + a) * n_states_, n_states_};
}

double TabularMdp::prob(StateId s, ActionId a, StateId next) const {
  if (next >= n_states_) throw IndexError("next state out of range");
  return row(s, a)[next];
}

double TabularMdp::state_cost(StateId s) const {
  if (s >= n_states_) throw IndexError("state out of range");
  return state_costs_.empty() ? 1.0 : state_costs_[s];
}

std::size_t TabularMdp::support(StateId s, ActionId a) const {
  auto r = row(s, a);
  return static_cast<std::size_t>(std::count_if(r.begin(), r.end(), [](double p) { return p > 0.0; }));
}

// ---------------------------------------------------------------------------
// Gridworlds

void GridSpec::validate() const {
  if (width <= 0 || height <= 0) throw ValidationError("grid must have positive size");
  if (!(fail_prob >= 0.0 && fail_prob <= 1.0)) throw ValidationError("fail_prob outside [0,1]");
  if (walls.count(start)) throw ValidationError("start cell is a wall");
  if (terminals.count(start)) throw ValidationError("start cell is a terminal");
  if (start.first < 0 || start.first >= height || start.second < 0 || start.second >= width) {
    throw ValidationError("start cell outside the grid");
  }
  for (const auto& t : terminals) {
    if (walls.count(t)) throw ValidationError("terminal cell is a wall");
  }
  if (!(trap_cost >= 1.0)) throw ValidationError("trap cost must be >= 1");
}

GridSpec parse_grid(const std::string& text, double fail_prob) {
  GridSpec g;
  g.fail_prob = fail_prob;
  std::vector<std::string> lines;
  for (auto& line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw ValidationError("empty grid layout");
  g.height = static_cast<int>(lines.size());
  g.width = 0;
  bool have_start = false;
  for (int r = 0; r < g.height; ++r) {
    const auto& line = lines[static_cast<std::size_t>(r)];
    g.width = std::max(g.width, static_cast<int>(line.size()));
    for (int c = 0; c < static_cast<int>(line.size()); ++c) {
      switch (line[static_cast<std::size_t>(c)]) {
        case '#': g.walls.insert({r, c}); break;
        case 'S':
          if (have_start) throw ValidationError("grid layout has more than one start cell");
          g.start = {r, c};
          have_start = true;
          break;
        case 'T': g.terminals.insert({r, c}); break;
        case 'X': g.traps.insert({r, c}); break;
        case '.': break;
        default:
          throw ValidationError(std::string("unknown grid character '") +
                                line[static_cast<std::size_t>(c)] + "'");
      }
    }
  }
  // Ragged lines: missing cells are walls.
  for (int r = 0; r < g.height; ++r) {
    for (int c = static_cast<int>(lines[static_cast<std::size_t>(r)].size()); c < g.width; ++c) {
      g.walls.insert({r, c});
    }
  }
  if (!have_start) throw ValidationError("grid layout has no start cell");
  g.validate();
  return g;
}

GridSpec load_grid(const std::string& path, double fail_prob) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open grid layout '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_grid(buf.str(), fail_prob);
}

TabularMdp gridworld(const GridSpec& grid) {
  grid.validate();
  std::vector<std::vector<long>> index(static_cast<std::size_t>(grid.height),
                                       std::vector<long>(static_cast<std::size_t>(grid.width), -1));
  std::vector<Cell> cells;
  for (int r = 0; r < grid.height; ++r) {
    for (int c = 0; c < grid.width; ++c) {
      if (grid.walls.count({r, c})) continue;
      index[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = static_cast<long>(cells.size());
      cells.push_back({r, c});
    }
  }
  const std::size_t n = cells.size();
  constexpr std::size_t kActions = 4;
  // Right, Down, Left, Up.
  constexpr int dr[kActions] = {0, 1, 0, -1};
  constexpr int dc[kActions] = {1, 0, -1, 0};
  auto at = [&](int r, int c) -> long {
    if (r < 0 || r >= grid.height || c < 0 || c >= grid.width) return -1;
    return index[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  };
  const auto start = static_cast<StateId>(at(grid.start.first, grid.start.second));

  std::vector<double> kernel(n * kActions * n, 0.0);
  std::vector<double> costs;
  if (!grid.traps.empty()) costs.assign(n, 1.0);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [r, c] = cells[i];
    labels.push_back(std::to_string(r) + "," + std::to_string(c));
    if (!costs.empty() && grid.traps.count(cells[i])) costs[i] = grid.trap_cost;
    for (std::size_t a = 0; a < kActions; ++a) {
      double* row = kernel.data() + (i * kActions + a) * n;
      if (grid.terminals.count(cells[i])) {
        row[start] = 1.0;
        continue;
      }
      for (std::size_t d = 0; d < kActions; ++d) {
        const double p = d == a ? 1.0 - grid.fail_prob : grid.fail_prob / 3.0;
        if (p == 0.0) continue;
        long j = at(r + dr[d], c + dc[d]);
        row[j < 0 ? i : static_cast<std::size_t>(j)] += p;
      }
    }
  }
  return TabularMdp(n, kActions, std::move(kernel), start, std::move(costs), std::move(labels));
}

// ---------------------------------------------------------------------------
// Other environments

TabularMdp riverswim(std::size_t n) {
  if (n < 2) throw ParameterError("riverswim needs at least 2 states");
  constexpr std::size_t kLeft = 0, kRight = 1;
  std::vector<double> k(n * 2 * n, 0.0);
  auto p = [&](StateId s, ActionId a, StateId next) -> double& { return k[(s * 2 + a) * n + next]; };
  for (StateId s = 0; s < n; ++s) {
    p(s, kLeft, s == 0 ? 0 : s - 1) = 1.0;
    if (s == 0) {
      p(s, kRight, 0) = 0.4;
      p(s, kRight, 1) = 0.6;
    } else if (s == n - 1) {
      p(s, kRight, s) = 0.6;
      p(s, kRight, s - 1) = 0.4;
    } else {
      p(s, kRight, s - 1) = 0.05;
      p(s, kRight, s) = 0.6;
      p(s, kRight, s + 1) = 0.35;
    }
  }
  return TabularMdp(n, 2, std::move(k), 0);
}

TabularMdp garnet(std::size_t n_states, std::size_t n_actions, std::size_t branching,
                  std::uint64_t seed, double anchor_mass, StateId anchor) {
  if (n_states == 0 || n_actions == 0) throw ParameterError("garnet needs S, A >= 1");
  if (branching < 1 || branching > n_states) {
    throw ParameterError("garnet branching factor must satisfy 1 <= beta <= S");
  }
  if (!(anchor_mass >= 0.0 && anchor_mass <= 1.0)) throw ParameterError("anchor mass outside [0,1]");
  if (anchor >= n_states) throw ParameterError("anchor state out of range");
  Rng rng(seed);
  std::vector<double> k(n_states * n_actions * n_states, 0.0);
  std::vector<StateId> pool(n_states);
  for (StateId s = 0; s < n_states; ++s) {
    for (ActionId a = 0; a < n_actions; ++a) {
      std::iota(pool.begin(), pool.end(), StateId{0});
      // Partial Fisher-Yates: the first `branching` entries are the support.
      for (std::size_t i = 0; i < branching; ++i) {
        auto j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n_states - i));
        std::swap(pool[i], pool[j]);
      }
      double* row = k.data() + (s * n_actions + a) * n_states;
      double total = 0.0;
      for (std::size_t i = 0; i < branching; ++i) {
        double w = 1.0 - uniform01(rng);  // (0, 1]
        row[pool[i]] = w;
        total += w;
      }
      for (std::size_t i = 0; i < n_states; ++i) row[i] *= (1.0 - anchor_mass) / total;
      row[anchor] += anchor_mass;
      // Remove the last rounding residue so rows pass the 1e-12 check.
      double sum = std::accumulate(row, row + n_states, 0.0);
      row[pool[0]] += 1.0 - sum;
    }
  }
  return TabularMdp(n_states, n_actions, std::move(k), 0);
}

TabularMdp wheel(std::size_t spokes, std::vector<double> eps) {
  if (spokes == 0) throw ParameterError("wheel needs at least one spoke");
  if (eps.empty()) eps.assign(spokes, 0.5);
  if (eps.size() != spokes) throw ParameterError("wheel eps vector must have one entry per spoke");
  for (double e : eps) {
    if (!(e > 0.0 && e < 1.0)) throw ParameterError("wheel eps entries must lie in (0,1)");
  }
  const std::size_t n = spokes + 1, na = spokes;
  std::vector<double> k(n * na * n, 0.0);
  for (ActionId a = 0; a < na; ++a) {
    k[(0 * na + a) * n + (a + 1)] = eps[a];
    k[(0 * na + a) * n + 0] = 1.0 - eps[a];
  }
  for (StateId s = 1; s < n; ++s) {
    for (ActionId a = 0; a < na; ++a) k[(s * na + a) * n + 0] = 1.0;
  }
  return TabularMdp(n, na, std::move(k), 0);
}

TabularMdp three_state_toy(double nu) {
  if (!(nu > 0.0 && nu < 1.0)) throw ParameterError("three-state toy requires 0 < nu < 1");
  constexpr std::size_t n = 3, na = 2;
  std::vector<double> k(n * na * n, 0.0);
  auto set = [&](StateId s, ActionId a, std::initializer_list<double> r) {
    std::copy(r.begin(), r.end(), k.begin() + static_cast<long>((s * na + a) * n));
  };
  // States with a single native action replicate it as their second action.
  set(0, 0, {0.0, nu, 1.0 - nu});
  set(0, 1, {0.0, nu, 1.0 - nu});
  set(1, 0, {1.0, 0.0, 0.0});
  set(1, 1, {1.0, 0.0, 0.0});
  set(2, 0, {1.0 - nu, nu, 0.0});
  set(2, 1, {0.0, 0.0, 1.0});
  return TabularMdp(n, na, std::move(k), 0);
}

TabularMdp two_state(double q) {
  if (!(q > 0.0 && q < 1.0)) throw ParameterError("two-state chain requires 0 < q < 1");
  return TabularMdp(2, 1, {1.0 - q, q, 1.0, 0.0}, 0);
}

TabularMdp build_env(const EnvDescriptor& desc) {
  struct Visitor {
    TabularMdp operator()(const env::RiverSwim& d) const { return riverswim(d.n_states); }
    TabularMdp operator()(const env::Gridworld& d) const { return gridworld(d.grid); }
    TabularMdp operator()(const env::Garnet& d) const {
      return garnet(d.n_states, d.n_actions, d.branching, d.seed, d.anchor_mass, d.anchor);
    }
    TabularMdp operator()(const env::Wheel& d) const { return wheel(d.spokes, d.eps); }
    TabularMdp operator()(const env::ThreeStateToy& d) const { return three_state_toy(d.nu); }
    TabularMdp operator()(const env::TwoState& d) const { return two_state(d.q); }
    TabularMdp operator()(const env::Explicit& d) const {
      return TabularMdp(d.n_states, d.n_actions, d.kernel, d.start);
    }
  };
  return std::visit(Visitor{}, desc);
}

EnvDescriptor parse_env_descriptor(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  const auto args = split(rest, ',');
  auto arg = [&](std::size_t i) -> const std::string& {
    if (i >= args.size()) throw ParameterError("environment '" + text + "' is missing arguments");
    return args[i];
  };
  if (kind == "riverswim") {
    return env::RiverSwim{args.empty() ? 6 : parse_uint(arg(0), "riverswim size")};
  }
  if (kind == "garnet") {
    env::Garnet g;
    g.n_states = parse_uint(arg(0), "garnet S");
    g.n_actions = parse_uint(arg(1), "garnet A");
    g.branching = parse_uint(arg(2), "garnet branching");
    if (args.size() > 3) g.seed = parse_uint(arg(3), "garnet seed");
    return g;
  }
  if (kind == "wheel") {
    env::Wheel w;
    w.spokes = parse_uint(arg(0), "wheel spokes");
    if (args.size() > 1) w.eps.assign(w.spokes, parse_double(arg(1), "wheel eps"));
    return w;
  }
  if (kind == "toy" || kind == "three_state_toy") {
    return env::ThreeStateToy{parse_double(arg(0), "toy nu")};
  }
  if (kind == "two_state") return env::TwoState{parse_double(arg(0), "two-state q")};
  if (kind == "grid" || kind == "gridworld") {
    const auto names = builtin_layout_names();
    const std::string& name = arg(0);
    const double pf = args.size() > 1 ? parse_double(arg(1), "fail probability") : 0.1;
    if (std::find(names.begin(), names.end(), name) != names.end()) {
      return env::Gridworld{parse_grid(builtin_layout(name), pf), name};
    }
    return env::Gridworld{load_grid(name, pf), name};
  }
  throw ParameterError("unknown environment kind '" + kind + "'");
}

std::string describe(const EnvDescriptor& desc) {
  struct Visitor {
    std::string operator()(const env::RiverSwim& d) const {
      return "riverswim:" + std::to_string(d.n_states);
    }
    std::string operator()(const env::Gridworld& d) const {
      return "grid:" + (d.name.empty() ? std::string("custom") : d.name);
    }
    std::string operator()(const env::Garnet& d) const {
      return "garnet:" + std::to_string(d.n_states) + "," + std::to_string(d.n_actions) + "," +
             std::to_string(d.branching) + "," + std::to_string(d.seed);
    }
    std::string operator()(const env::Wheel& d) const { return "wheel:" + std::to_string(d.spokes); }
    std::string operator()(const env::ThreeStateToy& d) const {
      std::ostringstream o;
      o << "toy:" << d.nu;
      return o.str();
    }
    std::string operator()(const env::TwoState& d) const {
      std::ostringstream o;
      o << "two_state:" << d.q;
      return o.str();
    }
    std::string operator()(const env::Explicit& d) const {
      return "explicit:" + std::to_string(d.n_states) + "x" + std::to_string(d.n_actions);
    }
  };
  return std::visit(Visitor{}, desc);
}

StateId sample_step(const TabularMdp& mdp, StateId s, ActionId a, Rng& rng) {
  const auto r = mdp.row(s, a);
  const double u = uniform01(rng);
  double acc = 0.0;
  StateId last = 0;
  for (StateId i = 0; i < r.size(); ++i) {
    if (r[i] <= 0.0) continue;
    acc += r[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

}  // namespace gosprl
