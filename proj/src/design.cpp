#include "hlars/design.hpp"

#include <algorithm>

#include "hlars/error.hpp"

namespace hlars {

namespace {

std::string var_name(std::size_t i) { return "X" + std::to_string(i + 1); }

}  // namespace

TermDescriptor TermDescriptor::main(std::size_t i) {
  return {TermKind::Main, i, i, var_name(i)};
}

TermDescriptor TermDescriptor::square(std::size_t i) {
  return {TermKind::Square, i, i, var_name(i) + ":" + std::to_string(i + 1)};
}

TermDescriptor TermDescriptor::cross(std::size_t i, std::size_t j) {
  if (i > j) std::swap(i, j);
  return {TermKind::Cross, i, j, var_name(i) + ":" + std::to_string(j + 1)};
}

TermDescriptor TermDescriptor::indicator(std::size_t factor, std::size_t level,
                                         std::string_view factor_name, std::string_view level_name) {
  std::string name(factor_name);
  name += '.';
  name += level_name;
  return {TermKind::Indicator, factor, level, std::move(name)};
}

std::optional<std::size_t> DesignMatrix::index_of(std::string_view name) const {
  const auto it = std::find_if(terms.begin(), terms.end(),
                               [&](const TermDescriptor& t) { return t.name == name; });
  if (it == terms.end()) return std::nullopt;
  return static_cast<std::size_t>(it - terms.begin());
}

std::size_t second_order_term_count(std::size_t m, bool include_squares, bool include_cross) {
  return m + (include_squares ? m : 0) + (include_cross ? m * (m - 1) / 2 : 0);
}

DesignMatrix expand_second_order(const Matrix& raw, bool include_squares, bool include_cross) {
  const auto m = static_cast<std::size_t>(raw.cols());
  std::vector<TermDescriptor> terms;
  terms.reserve(second_order_term_count(m, include_squares, include_cross));
  for (std::size_t i = 0; i < m; ++i) terms.push_back(TermDescriptor::main(i));
  if (include_squares) {
    for (std::size_t i = 0; i < m; ++i) terms.push_back(TermDescriptor::square(i));
  }
  if (include_cross) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) terms.push_back(TermDescriptor::cross(i, j));
    }
  }

  Matrix products(raw.rows(), static_cast<Index>(terms.size()));
  for (std::size_t c = 0; c < terms.size(); ++c) {
    const auto& t = terms[c];
    const auto col = static_cast<Index>(c);
    const auto a = static_cast<Index>(t.first);
    const auto b = static_cast<Index>(t.second);
    if (t.kind == TermKind::Main) {
      products.col(col) = raw.col(a);
    } else {
      products.col(col) = raw.col(a).cwiseProduct(raw.col(b));
    }
  }

  Standardized standardized;
  try {
    standardized = standardize(products);
  } catch (const ConstantColumn& e) {
    throw ConstantColumn(e.column(), "term " + terms.at(e.column()).name + " is constant");
  }
  return {std::move(standardized.data), std::move(terms), std::move(standardized.record), m};
}

DesignMatrix main_effects_only(const Matrix& raw) { return expand_second_order(raw, false, false); }

}  // namespace hlars
