#include "gosprl/requirements.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gosprl/error.hpp"

namespace gosprl {

namespace {

std::uint64_t ceil_count(double x) {
  if (!std::isfinite(x) || x < 0.0) throw ParameterError("requirement is not a finite count");
  if (x >= 1.8e19) throw ParameterError("requirement overflows a 64-bit count");
  return static_cast<std::uint64_t>(std::ceil(x));
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0,1)");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

double modest_phi(double x, double y, std::size_t n_states, std::size_t n_actions, double eta,
                  double delta) {
  if (!(eta > 0.0)) throw ParameterError("eta must be positive");
  check_delta(delta);
  if (x < 0.0 || y < 0.0) throw ParameterError("modest budget arguments must be nonnegative");
  const double SA = static_cast<double>(n_states * n_actions);
  double first = 0.0;
  if (x > 0.0) {
    const double l = std::log(8.0 * std::exp(1.0) * x * x * std::sqrt(2.0 * SA) / (std::sqrt(delta) * eta));
    first = 57.0 * x * x / (eta * eta) * l * l;
  }
  double second = 0.0;
  if (y > 0.0) second = 24.0 * y / eta * std::log(24.0 * y * SA / (delta * eta));
  return first + second;
}

std::vector<std::uint64_t> modest_budget(const ConfidenceModel& model, double eta, double delta,
                                         ModestNorm norm, double scale) {
  const std::size_t S = model.n_states(), A = model.n_actions();
  std::vector<std::uint64_t> b(S * A);
  for (StateId s = 0; s < S; ++s) {
    for (ActionId a = 0; a < A; ++a) {
      const double x = norm == ModestNorm::l1 ? model.sigma_sum(s, a) : model.sigma_max(s, a);
      const double y = norm == ModestNorm::l1 ? static_cast<double>(S) : 1.0;
      b[s * A + a] = ceil_count(scale * modest_phi(x, y, S, A, eta, delta));
    }
  }
  return b;
}

double gfcf_omega(double c_min, double eps, double theta, double diameter_estimate) {
  if (c_min < 0.0) throw ParameterError("c_min must be nonnegative");
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  if (!(theta > 0.0)) throw ParameterError("theta must be positive");
  if (c_min == 0.0 && std::isinf(theta)) {
    throw ParameterError("c_min = 0 and theta = infinity cannot be combined");
  }
  if (!(diameter_estimate > 0.0)) throw ParameterError("diameter estimate must be positive");
  const double perturb = std::isinf(theta) ? 0.0 : eps / (theta * diameter_estimate);
  return std::max(c_min, perturb);
}

double gfcf_phi(double x, double y, double gamma, std::size_t n_states, std::size_t n_actions, double eps,
                double delta, double alpha) {
  check_delta(delta);
  if (!(x > 0.0 && y > 0.0 && eps > 0.0 && gamma >= 1.0 && alpha > 0.0)) {
    throw ParameterError("invalid goal-free cost-free allocation arguments");
  }
  const double S = static_cast<double>(n_states), SA = static_cast<double>(n_states * n_actions);
  const double l1 = std::log(x * SA / (y * eps * delta));
  const double l2 = std::log(x * SA / (y * delta));
  return alpha * (x * x * x * gamma / (y * eps * eps) * l1 + x * x * S / (y * eps) * l1 +
                  x * x * gamma / (y * y) * l2 * l2);
}

std::uint64_t reward_estimation_budget(std::size_t n_states, std::size_t n_actions, double eps,
                                       double delta) {
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  check_delta(delta);
  return ceil_count(std::log(2.0 * static_cast<double>(n_states * n_actions) / delta) / (2.0 * eps * eps));
}

// ---------------------------------------------------------------------------

RequirementSchedule::RequirementSchedule(Kind kind, std::size_t n_states, std::size_t n_actions,
                                         bool state_only)
    : kind_(kind), n_states_(n_states), n_actions_(n_actions), state_only_(state_only) {
  if (n_states == 0 || n_actions == 0) throw ParameterError("requirements need S, A >= 1");
  const std::size_t n = state_only ? n_states : n_states * n_actions;
  b_.assign(n, 0);
  envelope_.assign(n, 0);
}

RequirementSchedule RequirementSchedule::fixed(std::size_t n_states, std::size_t n_actions,
                                               std::vector<std::uint64_t> per_pair) {
  RequirementSchedule r(Kind::fixed, n_states, n_actions, false);
  if (per_pair.size() != n_states * n_actions) throw ParameterError("requirement matrix size mismatch");
  r.b_ = per_pair;
  r.envelope_ = std::move(per_pair);
  r.label_ = "fixed";
  return r;
}

RequirementSchedule RequirementSchedule::fixed_states(std::size_t n_states, std::size_t n_actions,
                                                      std::vector<std::uint64_t> per_state) {
  RequirementSchedule r(Kind::fixed, n_states, n_actions, true);
  if (per_state.size() != n_states) throw ParameterError("requirement vector size mismatch");
  r.b_ = per_state;
  r.envelope_ = std::move(per_state);
  r.label_ = "fixed_states";
  return r;
}

RequirementSchedule RequirementSchedule::treasure(std::size_t n_states, std::size_t n_actions,
                                                  std::uint64_t k) {
  auto r = fixed(n_states, n_actions, std::vector<std::uint64_t>(n_states * n_actions, k));
  r.kind_ = Kind::treasure;
  r.label_ = "treasure-" + std::to_string(k);
  return r;
}

RequirementSchedule RequirementSchedule::uniform_random(std::size_t n_states, std::size_t n_actions,
                                                        std::uint64_t lo, std::uint64_t hi,
                                                        std::uint64_t seed) {
  if (lo > hi) throw ParameterError("uniform requirement range is empty");
  Rng rng(seed);
  std::vector<std::uint64_t> b(n_states * n_actions);
  const double width = static_cast<double>(hi - lo + 1);
  for (auto& x : b) x = lo + std::min(hi - lo, static_cast<std::uint64_t>(uniform01(rng) * width));
  auto r = fixed(n_states, n_actions, std::move(b));
  r.label_ = "uniform-" + std::to_string(lo) + "-" + std::to_string(hi) + "-" + std::to_string(seed);
  return r;
}

RequirementSchedule RequirementSchedule::reward_estimation(std::size_t n_states, std::size_t n_actions,
                                                           double eps, double delta) {
  const auto k = reward_estimation_budget(n_states, n_actions, eps, delta);
  auto r = fixed(n_states, n_actions, std::vector<std::uint64_t>(n_states * n_actions, k));
  r.kind_ = Kind::reward_est;
  r.label_ = "reward_est";
  return r;
}

RequirementSchedule RequirementSchedule::modest(std::size_t n_states, std::size_t n_actions,
                                                const ModestParams& p) {
  if (!(p.eta > 0.0)) throw ParameterError("eta must be positive");
  if (!(p.scale > 0.0)) throw ParameterError("budget scale must be positive");
  check_delta(p.delta);
  RequirementSchedule r(Kind::modest, n_states, n_actions, false);
  r.modest_ = p;
  r.label_ = p.norm == ModestNorm::l1 ? "modest" : "rmodest";
  r.refresh(Counters(n_states, n_actions));
  return r;
}

RequirementSchedule RequirementSchedule::gfcf(std::size_t n_states, std::size_t n_actions,
                                              const GfcfParams& p) {
  check_delta(p.delta);
  if (!(p.eps > 0.0 && p.eps <= 1.0)) throw ParameterError("eps must lie in (0, 1]");
  gfcf_omega(p.c_min, p.eps, p.theta, p.diameter_estimate);
  RequirementSchedule r(Kind::gfcf, n_states, n_actions, false);
  r.gfcf_ = p;
  r.label_ = "gfcf";
  r.refresh(Counters(n_states, n_actions));
  return r;
}

RequirementSchedule RequirementSchedule::load_csv(const std::string& path, std::size_t n_states,
                                                  std::size_t n_actions) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open requirement file '" + path + "'");
  std::vector<std::vector<std::uint64_t>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::uint64_t> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      cell = trim(cell);
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size() || v < 0.0) throw std::invalid_argument(cell);
        row.push_back(ceil_count(v));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty()) continue;  // header line
      throw ConfigError(path + ":" + std::to_string(line_no) + ": non-numeric requirement");
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() != n_states) {
    throw ConfigError(path + ": expected " + std::to_string(n_states) + " rows, found " +
                      std::to_string(rows.size()));
  }
  const std::size_t cols = rows.front().size();
  if (cols != 1 && cols != n_actions) {
    throw ConfigError(path + ": expected 1 or " + std::to_string(n_actions) + " columns");
  }
  std::vector<std::uint64_t> flat;
  for (const auto& r : rows) {
    if (r.size() != cols) throw ConfigError(path + ": ragged requirement matrix");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  auto out = cols == 1 && n_actions > 1 ? fixed_states(n_states, n_actions, std::move(flat))
                                        : fixed(n_states, n_actions, std::move(flat));
  out.label_ = "csv";
  return out;
}

std::uint64_t RequirementSchedule::modest_pair(const Counters& c, StateId s, ActionId a) const {
  const double n = static_cast<double>(c.visits(s, a));
  double x = 0.0;
  if (n > 0.0) {
    for (std::uint64_t k : c.transition_row(s, a)) {
      if (k == 0) continue;
      const double p = static_cast<double>(k) / n;
      const double sd = std::sqrt(p * (1.0 - p));
      x = modest_.norm == ModestNorm::l1 ? x + sd : std::max(x, sd);
    }
  }
  const double y = modest_.norm == ModestNorm::l1 ? static_cast<double>(n_states_) : 1.0;
  return ceil_count(modest_.scale * modest_phi(x, y, n_states_, n_actions_, modest_.eta, modest_.delta));
}

std::uint64_t RequirementSchedule::gfcf_value() const {
  const double omega = gfcf_omega(gfcf_.c_min, gfcf_.eps, gfcf_.theta, gfcf_.diameter_estimate);
  return ceil_count(gfcf_phi(gfcf_.diameter_estimate, omega, static_cast<double>(support_max_), n_states_,
                             n_actions_, gfcf_.eps, gfcf_.delta, gfcf_.alpha));
}

void RequirementSchedule::refresh(const Counters& c) {
  if (c.n_states() != n_states_ || c.n_actions() != n_actions_) {
    throw ParameterError("counters do not match the requirement dimensions");
  }
  if (kind_ == Kind::modest) {
    for (StateId s = 0; s < n_states_; ++s) {
      for (ActionId a = 0; a < n_actions_; ++a) b_[s * n_actions_ + a] = modest_pair(c, s, a);
    }
    const double xmax = modest_.norm == ModestNorm::l1 ? 0.5 * static_cast<double>(n_states_) : 0.5;
    const double y = modest_.norm == ModestNorm::l1 ? static_cast<double>(n_states_) : 1.0;
    std::fill(envelope_.begin(), envelope_.end(),
              ceil_count(modest_.scale * modest_phi(xmax, y, n_states_, n_actions_, modest_.eta, modest_.delta)));
  } else if (kind_ == Kind::gfcf) {
    support_max_ = 1;
    for (StateId s = 0; s < n_states_; ++s) {
      for (ActionId a = 0; a < n_actions_; ++a) {
        const auto row = c.transition_row(s, a);
        support_max_ = std::max<std::size_t>(
            support_max_, static_cast<std::size_t>(std::count_if(row.begin(), row.end(),
                                                                 [](std::uint64_t k) { return k > 0; })));
      }
    }
    std::fill(b_.begin(), b_.end(), gfcf_value());
    const std::size_t keep = support_max_;
    support_max_ = n_states_;
    std::fill(envelope_.begin(), envelope_.end(), gfcf_value());
    support_max_ = keep;
  }
}

void RequirementSchedule::observe(const Counters& c, StateId s, ActionId a) {
  if (kind_ == Kind::modest) {
    b_[s * n_actions_ + a] = modest_pair(c, s, a);
  } else if (kind_ == Kind::gfcf) {
    const auto row = c.transition_row(s, a);
    const auto support = static_cast<std::size_t>(
        std::count_if(row.begin(), row.end(), [](std::uint64_t k) { return k > 0; }));
    if (support > support_max_) {
      support_max_ = support;
      std::fill(b_.begin(), b_.end(), gfcf_value());
    }
  }
}

bool RequirementSchedule::tighten(const Counters& c) {
  if (kind_ != Kind::modest || !modest_.halving) return false;
  modest_.eta /= 2.0;
  ++stage_;
  refresh(c);
  return true;
}

std::uint64_t RequirementSchedule::required(StateId s, ActionId a) const {
  if (s >= n_states_ || a >= n_actions_) throw IndexError("state or action out of range");
  return state_only_ ? 0 : b_[s * n_actions_ + a];
}

std::uint64_t RequirementSchedule::required_state(StateId s) const {
  if (s >= n_states_) throw IndexError("state out of range");
  if (state_only_) return b_[s];
  std::uint64_t total = 0;
  for (ActionId a = 0; a < n_actions_; ++a) total += b_[s * n_actions_ + a];
  return total;
}

bool RequirementSchedule::pair_undersampled(const Counters& c, StateId s, ActionId a) const {
  if (state_only_) return undersampled(c, s);
  return c.visits(s, a) < b_[s * n_actions_ + a];
}

bool RequirementSchedule::undersampled(const Counters& c, StateId s) const {
  if (state_only_) return c.state_visits(s) < b_[s];
  for (ActionId a = 0; a < n_actions_; ++a) {
    if (c.visits(s, a) < b_[s * n_actions_ + a]) return true;
  }
  return false;
}

bool RequirementSchedule::satisfied(const Counters& c) const {
  for (StateId s = 0; s < n_states_; ++s) {
    if (undersampled(c, s)) return false;
  }
  return true;
}

std::uint64_t RequirementSchedule::remaining(const Counters& c, StateId s) const {
  if (state_only_) {
    const auto n = c.state_visits(s);
    return b_[s] > n ? b_[s] - n : 0;
  }
  std::uint64_t total = 0;
  for (ActionId a = 0; a < n_actions_; ++a) {
    const auto b = b_[s * n_actions_ + a], n = c.visits(s, a);
    if (b > n) total += b - n;
  }
  return total;
}

double RequirementSchedule::gap(const Counters& c, StateId s, ActionId a) const {
  if (state_only_) return static_cast<double>(b_[s]) - static_cast<double>(c.state_visits(s));
  return static_cast<double>(b_[s * n_actions_ + a]) - static_cast<double>(c.visits(s, a));
}

std::uint64_t RequirementSchedule::envelope(StateId s, ActionId a) const {
  if (s >= n_states_ || a >= n_actions_) throw IndexError("state or action out of range");
  return state_only_ ? envelope_[s] : envelope_[s * n_actions_ + a];
}

std::uint64_t RequirementSchedule::max_envelope() const {
  return envelope_.empty() ? 0 : *std::max_element(envelope_.begin(), envelope_.end());
}

std::string RequirementSchedule::describe() const { return label_; }

}  // namespace gosprl
