#include "hlars/hierarchy.hpp"

#include <algorithm>
#include <map>

#include "hlars/error.hpp"

namespace hlars {

namespace {

void insert_sorted(ColumnSet& set, std::size_t value) {
  const auto it = std::lower_bound(set.begin(), set.end(), value);
  if (it == set.end() || *it != value) set.insert(it, value);
}

}  // namespace

bool DependencyStructure::empty() const {
  return groups_.empty() &&
         std::all_of(requires_.begin(), requires_.end(), [](const ColumnSet& s) { return s.empty(); });
}

void DependencyStructure::require(std::size_t i, std::size_t j) {
  if (i >= requires_.size() || j >= requires_.size()) {
    throw DimensionMismatch("dependency (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") outside " + std::to_string(requires_.size()) + " columns");
  }
  if (i != j) insert_sorted(requires_[i], j);
}

void DependencyStructure::add_group(FactorGroup group) {
  if (group.members.size() < 2) throw InvalidConfig("factor group '" + group.name + "' needs two or more levels");
  if (std::find(group.members.begin(), group.members.end(), group.held_out) == group.members.end()) {
    throw InvalidConfig("held-out column of factor group '" + group.name + "' is not a member");
  }
  for (auto i : group.members) {
    for (auto j : group.members) require(i, j);
  }
  groups_.push_back(std::move(group));
}

DependencyStructure marginality_dependencies(std::span<const TermDescriptor> terms) {
  DependencyStructure d(terms.size());
  std::map<std::size_t, std::size_t> main_column;
  for (std::size_t c = 0; c < terms.size(); ++c) {
    if (terms[c].kind == TermKind::Main) main_column[terms[c].first] = c;
  }
  auto main_of = [&](std::size_t var) {
    const auto it = main_column.find(var);
    if (it == main_column.end()) throw UnknownTerm(TermDescriptor::main(var).name);
    return it->second;
  };

  std::map<std::size_t, FactorGroup> factors;
  for (std::size_t c = 0; c < terms.size(); ++c) {
    const auto& t = terms[c];
    switch (t.kind) {
      case TermKind::Main:
        break;
      case TermKind::Square:
        d.require(c, main_of(t.first));
        break;
      case TermKind::Cross:
        d.require(c, main_of(t.first));
        d.require(c, main_of(t.second));
        break;
      case TermKind::Indicator: {
        auto& g = factors[t.first];
        g.factor = t.first;
        g.name = t.name.substr(0, t.name.rfind('.'));
        g.members.push_back(c);
        break;
      }
    }
  }
  for (auto& [id, group] : factors) {
    group.held_out = group.members.back();
    d.add_group(std::move(group));
  }
  return d;
}

ActiveExpansion expand_active(const ColumnSet& a0, const DependencyStructure& d) {
  ColumnSet closed;
  std::vector<std::size_t> frontier(a0.begin(), a0.end());
  while (!frontier.empty()) {
    const auto c = frontier.back();
    frontier.pop_back();
    if (c >= d.size()) throw DimensionMismatch("column " + std::to_string(c) + " outside dependency structure");
    if (std::binary_search(closed.begin(), closed.end(), c)) continue;
    insert_sorted(closed, c);
    for (auto j : d.requirements(c)) frontier.push_back(j);
  }
  ActiveExpansion out;
  std::set_difference(closed.begin(), closed.end(), a0.begin(), a0.end(), std::back_inserter(out.a1));
  out.a = std::move(closed);
  return out;
}

bool is_closed(const ColumnSet& a, const DependencyStructure& d) {
  for (auto i : a) {
    for (auto j : d.requirements(i)) {
      if (!std::binary_search(a.begin(), a.end(), j)) return false;
    }
  }
  return true;
}

ColumnSet factor_design_columns(const ColumnSet& a, std::span<const FactorGroup> groups) {
  ColumnSet out = a;
  for (const auto& g : groups) {
    const bool full = std::all_of(g.members.begin(), g.members.end(), [&](std::size_t c) {
      return std::binary_search(a.begin(), a.end(), c);
    });
    if (!full) continue;
    const auto it = std::lower_bound(out.begin(), out.end(), g.held_out);
    if (it != out.end() && *it == g.held_out) out.erase(it);
  }
  return out;
}

FactorGroup append_factor(DesignMatrix& dm, std::span<const std::size_t> codes,
                          const std::string& factor_name, const std::vector<std::string>& level_names) {
  if (static_cast<Index>(codes.size()) != dm.rows()) {
    throw DimensionMismatch("factor '" + factor_name + "' has " + std::to_string(codes.size()) +
                            " codes for " + std::to_string(dm.rows()) + " rows");
  }
  if (level_names.size() < 2) throw InvalidConfig("factor '" + factor_name + "' needs two or more levels");

  std::size_t factor_id = 0;
  for (const auto& t : dm.terms) {
    if (t.kind == TermKind::Indicator) factor_id = std::max(factor_id, t.first + 1);
  }

  const auto levels = static_cast<Index>(level_names.size());
  Matrix indicators = Matrix::Zero(dm.rows(), levels);
  for (std::size_t r = 0; r < codes.size(); ++r) {
    if (codes[r] >= level_names.size()) {
      throw InvalidConfig("factor '" + factor_name + "' code " + std::to_string(codes[r]) + " out of range");
    }
    indicators(static_cast<Index>(r), static_cast<Index>(codes[r])) = 1.0;
  }
  const auto standardized = standardize(indicators);

  const Index old_cols = dm.cols();
  dm.data.conservativeResize(Eigen::NoChange, old_cols + levels);
  dm.data.rightCols(levels) = standardized.data;
  auto& rec = dm.standardization;
  rec.center.conservativeResize(old_cols + levels);
  rec.scale.conservativeResize(old_cols + levels);
  rec.center.tail(levels) = standardized.record.center;
  rec.scale.tail(levels) = standardized.record.scale;

  FactorGroup group{factor_id, factor_name, {}, 0};
  for (std::size_t l = 0; l < level_names.size(); ++l) {
    dm.terms.push_back(TermDescriptor::indicator(factor_id, l, factor_name, level_names[l]));
    group.members.push_back(static_cast<std::size_t>(old_cols) + l);
  }
  group.held_out = group.members.back();
  return group;
}

}  // namespace hlars
