#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hlars/design.hpp"
#include "hlars/hierarchy.hpp"
#include "hlars/linalg.hpp"

namespace hlars {

struct LarsOptions {
  // |c_j| >= Chat * (1 - tie_tolerance) counts as tying the maximum.
  double tie_tolerance = 1e-8;
  // Step-length candidates at or below this are treated as non-positive.
  double gamma_floor = 1e-12;
  // Complement columns whose candidate is within this of the minimum join together.
  double join_tolerance = 1e-12;
  // The path stops once Chat falls below this fraction of its starting value
  // (the response lies in the span of the active columns).
  double zero_correlation = 1e-12;
  // Defaults to min(n - 1, m).
  std::optional<std::size_t> max_steps;
};

// One pass through the loop body: moves the fit from mu (= mu_k) a fraction
// gamma of the way towards ybar, the least-squares fit on the active set.
struct PathStep {
  std::size_t k = 0;  // 0-based; entry steps reported to users are k + 1
  Vector mu;
  Vector chat;  // X'(y - mu)
  double Chat = 0.0;
  ColumnSet a0;
  ColumnSet a1;
  ColumnSet joined;  // complement columns that attain the step length
  double gamma = 1.0;
  Vector coef;  // coefficients after the step: data * coef = mu_next()
  Vector ybar;
  Vector avec;  // X'(ybar - mu), all columns

  ColumnSet active() const;
  Vector mu_next() const { return mu + gamma * (ybar - mu); }
};

struct LarsPath {
  std::vector<PathStep> steps;
  std::vector<TermDescriptor> terms;
  // 1-based step at which each term first appears in an active set.
  std::vector<std::optional<std::size_t>> first_entry;
  Vector y;  // centered response the path was fitted to
  bool completed = false;  // reached an empty complement
};

struct Correlations {
  Vector chat;
  double Chat = 0.0;
};

Correlations current_correlations(const DesignMatrix& dm, const Vector& y, const Vector& mu);

// {j : |chat_j| >= Chat (1 - tol)}.
ColumnSet active_set(const Vector& chat, double Chat, double tol);

struct StepLength {
  double gamma = 1.0;
  ColumnSet joined;
};

// min+ over the complement of (Chat - c_j)/(Chat - a_j) and
// (Chat + c_j)/(Chat + a_j), clamped to (0, 1]. An empty complement, or one
// with no positive candidate, gives 1.
StepLength step_length(double Chat, const Vector& chat, const Vector& avec, const ColumnSet& complement,
                       const LarsOptions& opts = {});

inline double gamma_step(double Chat, const Vector& chat, const Vector& avec, const ColumnSet& complement) {
  return step_length(Chat, chat, avec, complement).gamma;
}

// Plain least angle regression. y is centered before fitting; the design
// columns are expected to be standardized.
LarsPath lars_fit(const DesignMatrix& dm, const Vector& y, const LarsOptions& opts = {});

// The marginality-constrained variant: the tying set A0 is closed under `d`
// each iteration, and factor groups keep their held-out column out of the
// solve. An empty `d` reproduces lars_fit.
LarsPath modified_lars_fit(const DesignMatrix& dm, const Vector& y, const DependencyStructure& d,
                           const LarsOptions& opts = {});

struct CoefficientRow {
  std::size_t step = 0;
  double sum_abs = 0.0;
  Vector coef;
};

// Row 0 is the all-zero start; row s holds the coefficients after step s.
std::vector<CoefficientRow> coefficients_along_path(const LarsPath& path);

}  // namespace hlars
