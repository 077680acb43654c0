#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hlars/linalg.hpp"

namespace hlars {

enum class TermKind { Main, Square, Cross, Indicator };

// Metadata for one model-matrix column. Variable indices are 0-based in
// code and 1-based in names: Main(1) is "X2", Cross(1, 4) is "X2:5",
// Square(4) is "X5:5". Indicator columns are named "<factor>.<level>".
struct TermDescriptor {
  TermKind kind = TermKind::Main;
  std::size_t first = 0;   // variable index (Main, Square, Cross) or factor id
  std::size_t second = 0;  // second variable (Cross, with first < second) or level index
  std::string name;

  static TermDescriptor main(std::size_t i);
  static TermDescriptor square(std::size_t i);
  static TermDescriptor cross(std::size_t i, std::size_t j);
  static TermDescriptor indicator(std::size_t factor, std::size_t level, std::string_view factor_name,
                                  std::string_view level_name);

  friend bool operator==(const TermDescriptor&, const TermDescriptor&) = default;
};

struct DesignMatrix {
  Matrix data;  // standardized, one column per term
  std::vector<TermDescriptor> terms;
  StandardizationRecord standardization;
  std::size_t raw_cols = 0;

  Index cols() const { return data.cols(); }
  Index rows() const { return data.rows(); }
  std::optional<std::size_t> index_of(std::string_view name) const;
};

// Model matrix with main effects X1..Xm, then (optionally) squares
// X1:1..Xm:m, then (optionally) cross products Xi:j, i < j, in
// lexicographic order. Products are formed on the raw values and every
// column is standardized afterwards.
DesignMatrix expand_second_order(const Matrix& raw, bool include_squares, bool include_cross);

DesignMatrix main_effects_only(const Matrix& raw);

// Number of columns expand_second_order produces for m raw variables.
std::size_t second_order_term_count(std::size_t m, bool include_squares, bool include_cross);

}  // namespace hlars
