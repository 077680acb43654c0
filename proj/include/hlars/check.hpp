#pragma once

#include <string>
#include <vector>

#include "hlars/design.hpp"
#include "hlars/hierarchy.hpp"
#include "hlars/linalg.hpp"

namespace hlars {

struct InvariantResult {
  std::string name;
  bool passed = true;
  bool skipped = false;
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct CheckReport {
  std::vector<InvariantResult> results;
  bool passed() const;
  const InvariantResult& get(const std::string& name) const;
};

// Re-derives every step of a recorded path from the data and compares.
// `coef_rows[s]` holds the coefficients after step s (row 0 is the start).
// `deps` is null for plain LARS. Invariants checked:
//   reconstruction   recomputed step lands on the next recorded row
//   correlation_decay Chat shrinks by exactly (1 - gamma) per step
//   equiangularity   x_j'(ybar - mu) = sign(c_j) Chat on the tying set
//   closure          each row's active terms are closed under deps
//   ols_completion   last row reproduces the full least-squares fit
CheckReport check_path(const DesignMatrix& dm, const Vector& y, const std::vector<Vector>& coef_rows,
                       const DependencyStructure* deps, double tolerance = 1e-8);

}  // namespace hlars
