#include "hlars/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace hlars {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::optional<double> parse_double(std::string_view field) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) return std::nullopt;
  return value;
}

bool blank(std::string_view line) { return trim(line).empty(); }

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InputError(0, "no column named '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    for (auto f : split_fields(line)) {
      if (f.empty()) throw InputError(line_no, "empty column name in header");
      table.header.emplace_back(f);
    }
    break;
  }
  if (table.header.empty()) throw InputError(0, "missing header row");
  for (std::size_t a = 0; a < table.header.size(); ++a) {
    for (std::size_t b = a + 1; b < table.header.size(); ++b) {
      if (table.header[a] == table.header[b]) throw InputError(line_no, "duplicate column '" + table.header[a] + "'");
    }
  }

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_fields(line);
    if (fields.size() != table.header.size()) {
      throw InputError(line_no, "expected " + std::to_string(table.header.size()) + " fields, found " +
                                    std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto v = parse_double(fields[c]);
      if (!v || !std::isfinite(*v)) {
        throw InputError(line_no, "column '" + table.header[c] + "': '" + std::string(fields[c]) +
                                      "' is not a finite number");
      }
      values.push_back(*v);
    }
    ++rows;
  }
  if (rows == 0) throw InputError(0, "no data rows");

  const auto cols = static_cast<Index>(table.header.size());
  table.values.resize(static_cast<Index>(rows), cols);
  for (Index r = 0; r < static_cast<Index>(rows); ++r) {
    for (Index c = 0; c < cols; ++c) table.values(r, c) = values[static_cast<std::size_t>(r * cols + c)];
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(0, "cannot open '" + path + "'");
  return read_csv(in);
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const CsvTable& table) {
  for (std::size_t c = 0; c < table.header.size(); ++c) out << (c ? "," : "") << table.header[c];
  out << '\n';
  for (Index r = 0; r < table.values.rows(); ++r) {
    for (Index c = 0; c < table.values.cols(); ++c) out << (c ? "," : "") << format_number(table.values(r, c));
    out << '\n';
  }
}

void write_path_csv(std::ostream& out, const LarsPath& path) {
  out << "step,term,coefficient,sum_abs_beta\n";
  for (const auto& row : coefficients_along_path(path)) {
    const auto sum = format_number(row.sum_abs);
    for (std::size_t t = 0; t < path.terms.size(); ++t) {
      out << row.step << ',' << path.terms[t].name << ',' << format_number(row.coef(static_cast<Index>(t))) << ','
          << sum << '\n';
    }
  }
}

void write_corr_csv(std::ostream& out, const LarsPath& path) {
  out << "step,term,abs_corr,Chat\n";
  for (const auto& step : path.steps) {
    const auto chat = format_number(step.Chat);
    for (std::size_t t = 0; t < path.terms.size(); ++t) {
      out << step.k + 1 << ',' << path.terms[t].name << ','
          << format_number(std::abs(step.chat(static_cast<Index>(t)))) << ',' << chat << '\n';
    }
  }
}

void write_hist_csv(std::ostream& out, const SelectionHistogram& hist, std::optional<std::size_t> truncate) {
  out << "term,step,count,percent\n";
  const std::size_t last = truncate ? std::min(*truncate, hist.max_step) : hist.max_step;
  for (std::size_t t = 0; t < hist.terms.size(); ++t) {
    for (std::size_t s = 1; s <= last; ++s) {
      out << hist.terms[t] << ',' << s << ',' << hist.count(t, s) << ',' << format_number(hist.percent(t, s)) << '\n';
    }
  }
}

PathTable read_path_csv(std::istream& in, const std::vector<TermDescriptor>& terms) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t t = 0; t < terms.size(); ++t) index.emplace(terms[t].name, t);

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<std::vector<bool>> seen;
  PathTable table;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_fields(line);
    if (!header_seen) {
      if (fields.size() != 4 || fields[0] != "step" || fields[1] != "term" || fields[2] != "coefficient") {
        throw InputError(line_no, "expected header step,term,coefficient,sum_abs_beta");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 4) throw InputError(line_no, "expected 4 fields");
    std::size_t step = 0;
    const auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), step);
    if (ec != std::errc() || ptr != fields[0].data() + fields[0].size()) {
      throw InputError(line_no, "bad step '" + std::string(fields[0]) + "'");
    }
    const auto it = index.find(std::string(fields[1]));
    if (it == index.end()) throw InputError(line_no, "unknown term '" + std::string(fields[1]) + "'");
    const auto coef = parse_double(fields[2]);
    if (!coef) throw InputError(line_no, "bad coefficient '" + std::string(fields[2]) + "'");
    while (table.coef.size() <= step) {
      table.coef.push_back(Vector::Zero(static_cast<Index>(terms.size())));
      seen.emplace_back(terms.size(), false);
    }
    table.coef[step](static_cast<Index>(it->second)) = *coef;
    seen[step][it->second] = true;
  }
  if (!header_seen) throw InputError(0, "empty path file");
  for (std::size_t s = 0; s < seen.size(); ++s) {
    for (std::size_t t = 0; t < terms.size(); ++t) {
      if (!seen[s][t]) table.missing.emplace_back(s, terms[t].name);
    }
  }
  return table;
}

DependencyStructure parse_dependencies(const nlohmann::json& doc, const std::vector<TermDescriptor>& terms) {
  if (!doc.is_array()) throw InputError(0, "dependency file must hold a JSON list");
  auto lookup = [&](const nlohmann::json& name) -> std::size_t {
    if (!name.is_string()) throw InputError(0, "term names must be strings");
    const auto s = name.get<std::string>();
    const auto it = std::find_if(terms.begin(), terms.end(), [&](const TermDescriptor& t) { return t.name == s; });
    if (it == terms.end()) throw UnknownTerm(s);
    return static_cast<std::size_t>(it - terms.begin());
  };

  DependencyStructure d(terms.size());
  std::size_t factor_id = 0;
  for (const auto& entry : doc) {
    if (!entry.is_object()) throw InputError(0, "dependency entries must be objects");
    if (entry.contains("term")) {
      const auto i = lookup(entry.at("term"));
      for (const auto& r : entry.value("requires", nlohmann::json::array())) d.require(i, lookup(r));
    } else if (entry.contains("factor")) {
      FactorGroup g;
      g.factor = factor_id++;
      g.name = entry.at("factor").get<std::string>();
      for (const auto& member : entry.at("members")) g.members.push_back(lookup(member));
      if (g.members.empty()) throw InvalidConfig("factor group '" + g.name + "' has no members");
      g.held_out = entry.contains("held_out") ? lookup(entry.at("held_out")) : g.members.back();
      d.add_group(std::move(g));
    } else {
      throw InputError(0, "dependency entry needs a \"term\" or \"factor\" key");
    }
  }
  return d;
}

}  // namespace hlars
