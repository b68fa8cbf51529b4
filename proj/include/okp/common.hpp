#pragma once

#include <stdexcept>
#include <string>

namespace okp {

// Probability cleanup / impossibility threshold. Likelihoods below this are
// treated as zero: the corresponding branch must not be built.
inline constexpr double kProbTol = 1e-12;

// Belief vectors must sum to 1 within this after construction.
inline constexpr double kBeliefSumTol = 1e-9;

// Dominance tolerance for pruning: a vector survives only if some belief
// gives it at least this much advantage over the rest of the set.
inline constexpr double kDominanceEps = 1e-9;

// Tolerance for value comparisons in tests and cross-validation.
inline constexpr double kValueTol = 1e-9;

/// Error in a `.pomdp` or plan document. `line` is 1-based, 0 if unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string msg, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg
                                    : std::move(msg)),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Violated model invariant (stochasticity, unknown name, bad probability).
class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Solve configuration incompatible with the model.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The enumerator refused or aborted a configuration that exceeds its caps.
class ResourceLimitError : public std::runtime_error {
 public:
  ResourceLimitError(std::string msg, double plan_estimate,
                     unsigned long long nodes_visited)
      : std::runtime_error(std::move(msg)),
        plan_estimate_(plan_estimate),
        nodes_visited_(nodes_visited) {}
  double plan_estimate() const { return plan_estimate_; }
  unsigned long long nodes_visited() const { return nodes_visited_; }

 private:
  double plan_estimate_;
  unsigned long long nodes_visited_;
};

}  // namespace okp
