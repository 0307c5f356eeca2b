#pragma once

// The acceptance suite: eleven criteria over the built-in catalog, each with
// its numeric tolerance and wall-clock budget. A criterion passes only if
// every check holds and it finishes within budget.

#include "morseflow/catalog.hpp"
#include "morseflow/symbolics.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace morseflow::acceptance {

struct CriterionResult {
  int number = 0;
  std::string name;
  bool pass = false;
  std::vector<std::string> details;  // one line per check
  double seconds = 0;
  double budget_seconds = 0;
};

struct Options {
  std::uint64_t seed = 0;
  std::vector<int> only;  // criterion numbers to run; empty runs all
  std::function<void(const CriterionResult&)> on_result;
};

inline constexpr int kCriterionCount = 11;

std::vector<CriterionResult> run(const Options& opts = {});

/// "PASS  3  flow oracle ... (0.12 s / 1 s)" followed by indented details.
std::string format(const CriterionResult& r);

/// Random smooth expression in x1..x_dim, built so that every subterm is
/// finite and differentiable on [-1, 1]^dim.
symbolics::Expression random_expression(std::mt19937_64& rng, int dim, int depth);

struct DerivativeCheck {
  double max_gradient_error = 0;  // relative, against central differences
  double max_hessian_error = 0;
  std::size_t expressions = 0;
  std::size_t points = 0;
};

/// Forward-mode jets against central finite differences: `count`
/// expressions of depth 1..5, ten random points each.
DerivativeCheck check_derivatives(std::size_t count, std::uint64_t seed);

}  // namespace morseflow::acceptance
