#include "hlars/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "hlars/check.hpp"
#include "hlars/error.hpp"
#include "hlars/io.hpp"
#include "hlars/lars.hpp"
#include "hlars/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hlars::cli {

void to_json(json& j, const FitConfig& c) {
  j = json{{"data", c.data},           {"response", c.response}, {"design", c.design},
           {"algorithm", c.algorithm}, {"deps", c.deps},         {"factors", c.factors},
           {"out", c.out}};
  j["max_steps"] = c.max_steps ? json(*c.max_steps) : json(nullptr);
}

void from_json(const json& j, FitConfig& c) {
  j.at("data").get_to(c.data);
  j.at("response").get_to(c.response);
  j.at("design").get_to(c.design);
  j.at("algorithm").get_to(c.algorithm);
  j.at("deps").get_to(c.deps);
  j.at("factors").get_to(c.factors);
  j.at("out").get_to(c.out);
  const auto& ms = j.at("max_steps");
  c.max_steps = ms.is_null() ? std::nullopt : std::optional<std::size_t>(ms.get<std::size_t>());
}

void to_json(json& j, const ReplicateConfig& c) {
  j = json{{"model", c.model},         {"n", c.n},           {"reps", c.reps},       {"noise_sd", c.noise_sd},
           {"seed", c.seed},           {"design", c.design}, {"algorithm", c.algorithm},
           {"threads", c.threads},     {"out", c.out}};
  j["truncate"] = c.truncate ? json(*c.truncate) : json(nullptr);
}

void from_json(const json& j, ReplicateConfig& c) {
  j.at("model").get_to(c.model);
  j.at("n").get_to(c.n);
  j.at("reps").get_to(c.reps);
  j.at("noise_sd").get_to(c.noise_sd);
  j.at("seed").get_to(c.seed);
  j.at("design").get_to(c.design);
  j.at("algorithm").get_to(c.algorithm);
  j.at("threads").get_to(c.threads);
  j.at("out").get_to(c.out);
  const auto& t = j.at("truncate");
  c.truncate = t.is_null() ? std::nullopt : std::optional<std::size_t>(t.get<std::size_t>());
}

namespace {

DesignKind parse_design(const std::string& s) {
  if (s == "main") return DesignKind::MainOnly;
  if (s == "full") return DesignKind::FullSecondOrder;
  throw InvalidConfig("--design must be main or full, got '" + s + "'");
}

AlgorithmKind parse_algorithm(const std::string& s) {
  if (s == "lars") return AlgorithmKind::Lars;
  if (s == "mlars") return AlgorithmKind::ModifiedLars;
  throw InvalidConfig("--algorithm must be lars or mlars, got '" + s + "'");
}

std::string manifest_file(const std::string& dir) { return (fs::path(dir) / "manifest.json").string(); }

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InputError(0, "cannot write '" + file.string() + "'");
  out << text;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(0, "cannot open '" + path + "'");
  return json::parse(in);
}

int cmd_fit(const FitConfig& cfg, std::ostream& out) {
  const auto problem = load_problem(cfg);
  LarsOptions opts;
  opts.max_steps = cfg.max_steps;
  const auto path = problem.deps ? modified_lars_fit(problem.design, problem.y, *problem.deps, opts)
                                 : lars_fit(problem.design, problem.y, opts);

  fs::create_directories(cfg.out);
  const fs::path dir(cfg.out);
  std::ostringstream path_csv, corr_csv;
  write_path_csv(path_csv, path);
  write_corr_csv(corr_csv, path);
  write_text(dir / "path.csv", path_csv.str());
  write_text(dir / "corr.csv", corr_csv.str());

  json manifest{{"tool", "hlars"}, {"version", kVersion}, {"command", "fit"}, {"config", cfg}, {"seeds", json::array()}};
  manifest["data_path"] = fs::absolute(cfg.data).string();
  json columns = json::object();
  for (std::size_t i = 0; i < problem.source_columns.size(); ++i) {
    columns[TermDescriptor::main(i).name] = problem.source_columns[i];
  }
  manifest["term_sources"] = columns;
  manifest["terms"] = static_cast<std::size_t>(problem.design.cols());
  manifest["steps"] = path.steps.size();
  manifest["completed"] = path.completed;
  manifest["outputs"] = {(dir / "path.csv").string(), (dir / "corr.csv").string(), (dir / "manifest.json").string()};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  out << "fit: " << problem.design.cols() << " terms, " << path.steps.size() << " steps"
      << (path.completed ? "" : " (stopped early)") << ", outputs in " << dir.string() << '\n';
  return kOk;
}

int cmd_replicate(ReplicateConfig cfg, std::ostream& out) {
  if (cfg.model != "model1") throw InvalidConfig("--model supports only model1");
  SimConfig sim;
  sim.n = cfg.n;
  sim.reps = cfg.reps;
  sim.noise_sd = cfg.noise_sd;
  sim.master_seed = cfg.seed;
  sim.design = parse_design(cfg.design);
  sim.algorithm = parse_algorithm(cfg.algorithm);
  sim.threads = cfg.threads;
  sim.validate();

  const auto hist = replicate_study(sim);

  fs::create_directories(cfg.out);
  const fs::path dir(cfg.out);
  std::ostringstream hist_csv;
  write_hist_csv(hist_csv, hist, cfg.truncate);
  write_text(dir / "hist.csv", hist_csv.str());

  json manifest{{"tool", "hlars"}, {"version", kVersion}, {"command", "replicate"}, {"config", cfg}};
  json seeds = json::array();
  for (std::size_t r = 0; r < cfg.reps; ++r) seeds.push_back(replication_seed(cfg.seed, r));
  manifest["seeds"] = seeds;
  manifest["successful_reps"] = hist.reps;
  json failures = json::array();
  for (const auto& f : hist.failures) failures.push_back({{"replication", f.replication}, {"error", f.message}});
  manifest["failures"] = failures;
  manifest["outputs"] = {(dir / "hist.csv").string(), (dir / "manifest.json").string()};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  out << "replicate: " << hist.reps << " of " << cfg.reps << " replications completed, " << hist.terms.size()
      << " terms, outputs in " << dir.string() << '\n';
  return kOk;
}

int cmd_check(const std::string& run_dir, const std::string& path_override, double tolerance, std::ostream& out) {
  const auto manifest = read_json_file(manifest_file(run_dir));
  if (manifest.value("command", "") != "fit") throw InputError(0, "manifest in '" + run_dir + "' is not from fit");
  auto cfg = manifest.at("config").get<FitConfig>();
  if (manifest.contains("data_path")) cfg.data = manifest.at("data_path").get<std::string>();
  const auto problem = load_problem(cfg);

  const auto path_file = path_override.empty() ? (fs::path(run_dir) / "path.csv").string() : path_override;
  std::ifstream in(path_file);
  if (!in) throw InputError(0, "cannot open '" + path_file + "'");
  const auto table = read_path_csv(in, problem.design.terms);
  for (const auto& [step, term] : table.missing) out << "note: no row for " << term << " at step " << step << '\n';

  const auto report =
      check_path(problem.design, problem.y, table.coef, problem.deps ? &*problem.deps : nullptr, tolerance);
  for (const auto& r : report.results) {
    out << (r.skipped ? "SKIP" : r.passed ? "PASS" : "FAIL") << ' ' << r.name
        << " max_residual=" << format_number(r.max_residual) << " tolerance=" << format_number(r.tolerance);
    if (!r.detail.empty()) out << " (" << r.detail << ")";
    out << '\n';
  }
  return report.passed() ? kOk : kInvariantFailure;
}

int cmd_gen(std::size_t n, double noise_sd, std::uint64_t seed, const std::string& file, std::ostream& out) {
  const auto data = gen_model1(n, noise_sd, seed);
  CsvTable table;
  for (int i = 1; i <= 10; ++i) table.header.push_back("X" + std::to_string(i));
  table.header.push_back("y");
  table.values.resize(data.x.rows(), 11);
  table.values.leftCols(10) = data.x;
  table.values.col(10) = data.y;
  std::ostringstream csv;
  write_csv(csv, table);
  if (const auto parent = fs::path(file).parent_path(); !parent.empty()) fs::create_directories(parent);
  write_text(file, csv.str());
  out << "gen: " << n << " rows of model 1 written to " << file << '\n';
  return kOk;
}

}  // namespace

Problem load_problem(const FitConfig& cfg) {
  const auto kind = parse_design(cfg.design);
  const auto algorithm = parse_algorithm(cfg.algorithm);
  if (algorithm == AlgorithmKind::Lars && !cfg.deps.empty()) {
    throw InvalidConfig("--deps applies only to --algorithm mlars");
  }

  const auto table = read_csv_file(cfg.data);
  const auto response = table.column(cfg.response);
  std::vector<std::size_t> factor_cols;
  for (const auto& f : cfg.factors) {
    const auto c = table.column(f);
    if (c == response) throw InvalidConfig("response column cannot be a factor");
    factor_cols.push_back(c);
  }

  Problem problem;
  std::vector<Index> numeric;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == response || std::find(factor_cols.begin(), factor_cols.end(), c) != factor_cols.end()) continue;
    numeric.push_back(static_cast<Index>(c));
    problem.source_columns.push_back(table.header[c]);
  }
  if (numeric.empty() && factor_cols.empty()) throw InputError(0, "no explanatory columns besides the response");

  Matrix raw(table.values.rows(), static_cast<Index>(numeric.size()));
  for (std::size_t i = 0; i < numeric.size(); ++i) raw.col(static_cast<Index>(i)) = table.values.col(numeric[i]);
  try {
    problem.design = numeric.empty() ? DesignMatrix{Matrix(table.values.rows(), 0), {}, {}, 0}
                                     : expand_second_order(raw, kind == DesignKind::FullSecondOrder,
                                                           kind == DesignKind::FullSecondOrder);
  } catch (const ConstantColumn& e) {
    const auto& term = e.column() < problem.source_columns.size() ? problem.source_columns[e.column()] : std::string();
    throw InputError(0, term.empty() ? std::string(e.what()) : "column '" + term + "' is constant");
  }

  for (const auto c : factor_cols) {
    std::map<double, std::size_t> levels;
    const auto col = table.values.col(static_cast<Index>(c));
    for (Index r = 0; r < col.size(); ++r) {
      if (col(r) != std::round(col(r))) {
        throw InputError(static_cast<std::size_t>(r) + 2, "factor column '" + table.header[c] + "' must hold integer codes");
      }
      levels.emplace(col(r), 0);
    }
    std::vector<std::string> names;
    for (auto& [value, index] : levels) {
      index = names.size();
      names.push_back(std::to_string(static_cast<long long>(value)));
    }
    std::vector<std::size_t> codes(static_cast<std::size_t>(col.size()));
    for (Index r = 0; r < col.size(); ++r) codes[static_cast<std::size_t>(r)] = levels.at(col(r));
    append_factor(problem.design, codes, table.header[c], names);
  }

  problem.y = table.values.col(static_cast<Index>(response));
  if (algorithm == AlgorithmKind::ModifiedLars) {
    if (cfg.deps.empty() || cfg.deps == "auto") {
      problem.deps = marginality_dependencies(problem.design.terms);
    } else {
      problem.deps = parse_dependencies(read_json_file(cfg.deps), problem.design.terms);
    }
  }
  return problem;
}

std::size_t worker_count() {
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("HLARS_THREADS")) {
    try {
      const auto value = std::stoul(cap);
      if (value > 0) workers = std::min<std::size_t>(workers, value);
    } catch (const std::exception&) {
      // Unparseable caps are ignored.
    }
  }
  return workers;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Least angle regression with marginality constraints"};
  app.name("hlars");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  FitConfig fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a LARS path to a CSV dataset");
  fit_cmd->add_option("--data", fit.data, "Input CSV with a header row")->required();
  fit_cmd->add_option("--response", fit.response, "Response column")->capture_default_str();
  fit_cmd->add_option("--design", fit.design, "main | full")->capture_default_str();
  fit_cmd->add_option("--algorithm", fit.algorithm, "lars | mlars")->capture_default_str();
  fit_cmd->add_option("--deps", fit.deps, "auto, or a JSON dependency file (mlars only)");
  fit_cmd->add_option("--factor", fit.factors, "Integer-coded categorical column (repeatable)");
  fit_cmd->add_option("--max-steps", fit.max_steps, "Stop after this many steps");
  fit_cmd->add_option("--out", fit.out, "Output directory")->capture_default_str();

  ReplicateConfig rep;
  std::string truncate = "none";
  auto* rep_cmd = app.add_subcommand("replicate", "Selection-step histogram over simulated datasets");
  rep_cmd->add_option("--model", rep.model, "Simulation model")->capture_default_str();
  rep_cmd->add_option("--n", rep.n, "Sample size")->capture_default_str();
  rep_cmd->add_option("--reps", rep.reps, "Replications")->capture_default_str();
  rep_cmd->add_option("--noise-sd", rep.noise_sd, "Noise standard deviation")->capture_default_str();
  rep_cmd->add_option("--seed", rep.seed, "Master seed")->capture_default_str();
  rep_cmd->add_option("--design", rep.design, "main | full")->capture_default_str();
  rep_cmd->add_option("--algorithm", rep.algorithm, "lars | mlars")->capture_default_str();
  rep_cmd->add_option("--truncate", truncate, "Last step written, or none")->capture_default_str();
  rep_cmd->add_option("--out", rep.out, "Output directory")->capture_default_str();

  std::string run_dir, path_override;
  double tolerance = 1e-8;
  auto* check_cmd = app.add_subcommand("check", "Re-verify a fitted path against its data");
  check_cmd->add_option("--run", run_dir, "Directory written by fit")->required();
  check_cmd->add_option("--path", path_override, "Path CSV to check instead of <run>/path.csv");
  check_cmd->add_option("--tolerance", tolerance, "Relative tolerance")->capture_default_str();

  std::size_t gen_n = 500;
  double gen_sd = 0.05;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "Write one simulated model-1 dataset as CSV");
  gen_cmd->add_option("--n", gen_n, "Sample size")->capture_default_str();
  gen_cmd->add_option("--noise-sd", gen_sd, "Noise standard deviation")->capture_default_str();
  gen_cmd->add_option("--seed", gen_seed, "Seed")->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "Output CSV file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit, out);
    if (*rep_cmd) {
      if (truncate != "none") {
        std::size_t value = 0;
        const auto [ptr, ec] = std::from_chars(truncate.data(), truncate.data() + truncate.size(), value);
        if (ec != std::errc() || ptr != truncate.data() + truncate.size() || value == 0) {
          throw InvalidConfig("--truncate must be a positive step count or none");
        }
        rep.truncate = value;
      }
      rep.threads = worker_count();
      return cmd_replicate(rep, out);
    }
    if (*check_cmd) return cmd_check(run_dir, path_override, tolerance, out);
    if (*gen_cmd) return cmd_gen(gen_n, gen_sd, gen_seed, gen_out, out);
  } catch (const RankDeficient& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace hlars::cli
