#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hlars {

// Base for every error the library throws. The CLI maps subclasses onto
// its exit-code contract (2 = input, 3 = numerical).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A column with zero spread cannot be scaled to unit norm.
class ConstantColumn : public Error {
 public:
  explicit ConstantColumn(std::size_t column)
      : Error("column " + std::to_string(column) + " is constant"), column_(column) {}
  ConstantColumn(std::size_t column, const std::string& message) : Error(message), column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

// Raised by the least-squares solver; `column` is the position (within the
// matrix handed to the solver) of the first column found to be linearly
// dependent on its predecessors.
class RankDeficient : public Error {
 public:
  explicit RankDeficient(std::size_t column)
      : Error("column " + std::to_string(column) + " is linearly dependent on earlier columns"),
        column_(column) {}
  RankDeficient(std::size_t column, const std::string& message) : Error(message), column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class UnknownTerm : public Error {
 public:
  explicit UnknownTerm(const std::string& name) : Error("unknown term '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class TermNeverEntered : public Error {
 public:
  explicit TermNeverEntered(const std::string& name)
      : Error("term '" + name + "' never entered the path"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

}  // namespace hlars
