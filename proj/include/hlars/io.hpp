#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlars/design.hpp"
#include "hlars/error.hpp"
#include "hlars/hierarchy.hpp"
#include "hlars/lars.hpp"
#include "hlars/linalg.hpp"
#include "hlars/simulate.hpp"

namespace hlars {

// Malformed input file. `line` is 1-based; 0 when the problem is not tied to a line.
class InputError : public Error {
 public:
  InputError(std::size_t line, const std::string& message)
      : Error(line == 0 ? message : "line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;  // rows x header.size()

  std::size_t column(const std::string& name) const;  // throws InputError
};

// Numeric CSV with a header row. Blank lines are skipped.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const CsvTable& table);

// Shortest form is not used on purpose: 17 significant digits, '.' as the
// decimal separator, independent of locale.
std::string format_number(double value);

// step,term,coefficient,sum_abs_beta for steps 0..K and every term.
void write_path_csv(std::ostream& out, const LarsPath& path);
// step,term,abs_corr,Chat for steps 1..K; step s holds the correlations the
// s-th iteration started from.
void write_corr_csv(std::ostream& out, const LarsPath& path);
// term,step,count,percent for steps 1..min(max_step, truncate).
void write_hist_csv(std::ostream& out, const SelectionHistogram& hist, std::optional<std::size_t> truncate);

// Coefficient rows indexed by step, read back from write_path_csv output.
// Terms absent from a step read as zero and are listed in `missing`.
struct PathTable {
  std::vector<Vector> coef;
  std::vector<std::pair<std::size_t, std::string>> missing;  // (step, term)
};
PathTable read_path_csv(std::istream& in, const std::vector<TermDescriptor>& terms);

// JSON list whose entries are either
//   {"term": "X1:2", "requires": ["X1", "X2"]}
// or
//   {"factor": "F", "members": ["F.a", "F.b", "F.c"], "held_out": "F.c"}
// ("held_out" defaults to the last member).
DependencyStructure parse_dependencies(const nlohmann::json& doc, const std::vector<TermDescriptor>& terms);

}  // namespace hlars
