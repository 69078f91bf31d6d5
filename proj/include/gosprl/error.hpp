#pragma once

#include <stdexcept>
#include <string>

namespace gosprl {

/// Invalid argument value (out of its documented domain).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A model or input object that violates its invariants.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Value iteration did not meet its stopping rule within the iteration cap.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t state)
      : std::runtime_error(what), state_(state) {}
  std::size_t state() const noexcept { return state_; }

 private:
  std::size_t state_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gosprl
