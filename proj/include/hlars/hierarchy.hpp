#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hlars/design.hpp"

namespace hlars {

// Sorted, duplicate-free list of column indices.
using ColumnSet = std::vector<std::size_t>;

// Indicator columns for every level of one categorical variable. All members
// enter together; `held_out` is kept out of the least-squares solve so the
// active submatrix stays full rank.
struct FactorGroup {
  std::size_t factor = 0;
  std::string name;
  std::vector<std::size_t> members;
  std::size_t held_out = 0;
};

// requires[i] lists the columns j with d_ij = 1: whenever column i is in the
// model, column j must be too.
class DependencyStructure {
 public:
  DependencyStructure() = default;
  explicit DependencyStructure(std::size_t m) : requires_(m) {}

  std::size_t size() const { return requires_.size(); }
  bool empty() const;

  // Declares d_ij = 1. Self-dependencies are ignored.
  void require(std::size_t i, std::size_t j);
  const ColumnSet& requirements(std::size_t i) const { return requires_.at(i); }

  // Registers a factor group and makes its members mutually dependent.
  void add_group(FactorGroup group);
  const std::vector<FactorGroup>& groups() const { return groups_; }

 private:
  std::vector<ColumnSet> requires_;
  std::vector<FactorGroup> groups_;
};

// Strong-heredity rule: Xi:j requires Xi and Xj, Xi:i requires Xi, mains
// require nothing, indicators of one factor require each other. The last
// declared level of each factor becomes its held-out column. Throws
// UnknownTerm when a required main effect is missing from `terms`.
DependencyStructure marginality_dependencies(std::span<const TermDescriptor> terms);

struct ActiveExpansion {
  ColumnSet a1;  // forced in by dependencies, disjoint from a0
  ColumnSet a;   // a0 ∪ a1
};

// Closes a0 under the dependency relation (transitively).
ActiveExpansion expand_active(const ColumnSet& a0, const DependencyStructure& d);

bool is_closed(const ColumnSet& a, const DependencyStructure& d);

// Columns of `a` that go into the least-squares solve: the held-out member
// of every factor group whose members are all in `a` is dropped.
ColumnSet factor_design_columns(const ColumnSet& a, std::span<const FactorGroup> groups);

// Appends standardized indicator columns for every level of a factor to
// `dm`. codes[r] is the level index of row r, in [0, level_names.size()).
FactorGroup append_factor(DesignMatrix& dm, std::span<const std::size_t> codes,
                          const std::string& factor_name, const std::vector<std::string>& level_names);

}  // namespace hlars
