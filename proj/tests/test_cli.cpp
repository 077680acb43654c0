#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "hlars/cli.hpp"
#include "hlars/io.hpp"
#include "test_support.hpp"

using namespace hlars;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("hlars_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  out << text;
}

std::vector<std::vector<std::string>> rows_of(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

std::set<std::string> terms_in(const std::string& csv, std::size_t column) {
  std::set<std::string> out;
  const auto rows = rows_of(csv);
  for (std::size_t r = 1; r < rows.size(); ++r) out.insert(rows[r][column]);
  return out;
}

// Rewrites one coefficient of path.csv (selected by step and term).
std::string edit_path(const std::string& csv, const std::string& step, const std::string& term, bool remove,
                      double delta) {
  std::ostringstream out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    const auto fields = rows_of(line).front();
    if (fields.size() == 4 && fields[0] == step && fields[1] == term) {
      if (remove) continue;
      out << fields[0] << ',' << fields[1] << ',' << format_number(std::stod(fields[2]) + delta) << ',' << fields[3]
          << '\n';
      continue;
    }
    out << line << '\n';
  }
  return out.str();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("numbers are written with 17 significant digits") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(-2.5e-20) == "-2.4999999999999999e-20");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  }

  TEST_CASE("csv reader errors name the line and column") {
    std::istringstream bad_number("a,b\n1,2\n3,x\n");
    try {
      read_csv(bad_number);
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(e.line() == 3);
      CHECK(std::string(e.what()).find("'b'") != std::string::npos);
    }
    std::istringstream short_row("a,b\n1\n");
    CHECK_THROWS_AS(read_csv(short_row), InputError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_csv(empty), InputError);
    std::istringstream no_rows("a,b\n");
    CHECK_THROWS_AS(read_csv(no_rows), InputError);
    std::istringstream dup("a,a\n1,2\n");
    CHECK_THROWS_AS(read_csv(dup), InputError);

    std::istringstream ok("\"a\", b\r\n1, 2.5\r\n\r\n-3,+4e1\r\n");
    const auto t = read_csv(ok);
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    CHECK(t.values.rows() == 2);
    CHECK(t.values(1, 1) == 40.0);
  }

  TEST_CASE("fit on model-1 data: main effects, full design, and re-check") {
    TempDir dir;
    REQUIRE(run({"gen", "--n", "200", "--seed", "5", "--out", dir / "data.csv"}).code == 0);

    auto r = run({"fit", "--data", dir / "data.csv", "--design", "main", "--algorithm", "lars", "--out", dir / "main"});
    REQUIRE(r.code == 0);
    const auto path_csv = slurp(dir / "main/path.csv");
    CHECK(path_csv.rfind("step,term,coefficient,sum_abs_beta\n", 0) == 0);
    CHECK(terms_in(path_csv, 1).size() == 10);
    CHECK(slurp(dir / "main/corr.csv").rfind("step,term,abs_corr,Chat\n", 0) == 0);

    // The last row is the least-squares fit on all ten columns.
    const auto table = read_csv_file(dir / "data.csv");
    const auto dm = main_effects_only(table.values.leftCols(10));
    std::istringstream in(path_csv);
    const auto coef = read_path_csv(in, dm.terms);
    CHECK(coef.missing.empty());
    REQUIRE(coef.coef.size() == 11);
    const Vector y = table.values.col(10).array() - table.values.col(10).mean();
    const Vector ols = hlars::testing::normal_equations_oracle(dm.data, y);
    CHECK((coef.coef.back() - ols).cwiseAbs().maxCoeff() < 1e-8);

    r = run({"check", "--run", dir / "main"});
    CHECK(r.code == 0);
    CHECK(r.out.find("PASS ols_completion") != std::string::npos);
    CHECK(r.out.find("SKIP closure") != std::string::npos);

    r = run({"fit", "--data", dir / "data.csv", "--design", "full", "--out", dir / "full"});
    REQUIRE(r.code == 0);
    CHECK(terms_in(slurp(dir / "full/path.csv"), 1).size() == 65);
    CHECK(terms_in(slurp(dir / "full/corr.csv"), 1).size() == 65);
  }

  TEST_CASE("outputs are byte-identical across runs and the manifest round-trips") {
    TempDir dir;
    REQUIRE(run({"gen", "--n", "100", "--seed", "8", "--out", dir / "data.csv"}).code == 0);
    for (const char* out : {"a", "b"}) {
      REQUIRE(run({"fit", "--data", dir / "data.csv", "--design", "full", "--algorithm", "mlars", "--deps", "auto",
                   "--out", dir / out})
                  .code == 0);
    }
    CHECK(slurp(dir / "a/path.csv") == slurp(dir / "b/path.csv"));
    CHECK(slurp(dir / "a/corr.csv") == slurp(dir / "b/corr.csv"));

    const auto manifest = json::parse(slurp(dir / "a/manifest.json"));
    CHECK(manifest["command"] == "fit");
    CHECK(manifest["version"] == cli::kVersion);
    CHECK(manifest["outputs"].size() == 3);
    CHECK(manifest["term_sources"]["X3"] == "X3");
    const auto cfg = manifest["config"].get<cli::FitConfig>();
    CHECK(cfg.design == "full");
    CHECK(cfg.deps == "auto");
    CHECK(json(cfg) == manifest["config"]);

    cli::ReplicateConfig rc;
    rc.truncate = 20;
    rc.reps = 7;
    CHECK(json(json(rc).get<cli::ReplicateConfig>()) == json(rc));
  }

  TEST_CASE("check catches corrupted coefficients and broken closure") {
    TempDir dir;
    REQUIRE(run({"gen", "--n", "300", "--seed", "21", "--out", dir / "data.csv"}).code == 0);
    REQUIRE(run({"fit", "--data", dir / "data.csv", "--design", "full", "--algorithm", "mlars", "--deps", "auto",
                 "--out", dir / "run"})
                .code == 0);
    auto r = run({"check", "--run", dir / "run"});
    CHECK(r.code == 0);
    CHECK(r.out.find("PASS closure") != std::string::npos);
    CHECK(r.out.find("PASS equiangularity") != std::string::npos);
    CHECK(r.out.find("PASS correlation_decay") != std::string::npos);
    CHECK(r.out.find("PASS reconstruction") != std::string::npos);

    const auto original = slurp(dir / "run/path.csv");
    // Step 1 always has some main effect active; find the term with the largest coefficient there.
    std::string main_term;
    double largest = 0.0;
    for (const auto& row : rows_of(original)) {
      if (row.size() == 4 && row[0] == "1" && row[1].find(':') == std::string::npos &&
          std::abs(std::stod(row[2])) > largest) {
        largest = std::abs(std::stod(row[2]));
        main_term = row[1];
      }
    }
    REQUIRE(!main_term.empty());

    spit(dir / "perturbed.csv", edit_path(original, "2", main_term, false, 1e-3));
    r = run({"check", "--run", dir / "run", "--path", dir / "perturbed.csv"});
    CHECK(r.code == 1);
    CHECK(r.out.find("FAIL reconstruction") != std::string::npos);

    // Drop a main effect that some active interaction needs.
    const auto steps = rows_of(original);
    std::string target_step;
    for (const auto& row : steps) {
      if (row.size() == 4 && row[1].find(':') != std::string::npos && row[0] != "0" && row[0] != "step" &&
          std::stod(row[2]) != 0.0) {
        const auto colon = row[1].find(':');
        const std::string first = row[1].substr(0, colon);
        target_step = row[0];
        spit(dir / "deleted.csv", edit_path(original, target_step, first, true, 0.0));
        break;
      }
    }
    REQUIRE(!target_step.empty());
    r = run({"check", "--run", dir / "run", "--path", dir / "deleted.csv"});
    CHECK(r.code == 1);
    CHECK(r.out.find("FAIL closure") != std::string::npos);
    CHECK(r.out.find("note: no row for") != std::string::npos);
  }

  TEST_CASE("input errors exit with 2 and name the column") {
    TempDir dir;
    spit(dir / "bad.csv", "a,b,y\n1,2,3\n4,oops,6\n");
    auto r = run({"fit", "--data", dir / "bad.csv", "--out", dir / "o"});
    CHECK(r.code == 2);
    CHECK(r.err.find("'b'") != std::string::npos);

    spit(dir / "const.csv", "a,b,y\n1,2,3\n4,2,6\n5,2,1\n");
    r = run({"fit", "--data", dir / "const.csv", "--out", dir / "o"});
    CHECK(r.code == 2);
    CHECK(r.err.find("'b'") != std::string::npos);

    r = run({"fit", "--data", dir / "missing.csv", "--out", dir / "o"});
    CHECK(r.code == 2);
    r = run({"fit", "--out", dir / "o"});
    CHECK(r.code == 2);
    r = run({"fit", "--data", dir / "const.csv", "--response", "nope"});
    CHECK(r.code == 2);
    r = run({"bogus"});
    CHECK(r.code == 2);
  }

  TEST_CASE("rank deficiency exits with 3 and names the term") {
    TempDir dir;
    std::mt19937_64 rng(3);
    const Matrix x = hlars::testing::gaussian_matrix(rng, 30, 2);
    CsvTable t{{"a", "b", "c", "y"}, Matrix(30, 4)};
    t.values.col(0) = x.col(0);
    t.values.col(1) = x.col(1);
    t.values.col(2) = x.col(0) + x.col(1);
    t.values.col(3) = x.col(0) + x.col(1) + 0.1 * hlars::testing::gaussian_matrix(rng, 30, 1).col(0);
    std::ostringstream csv;
    write_csv(csv, t);
    spit(dir / "dep.csv", csv.str());
    // Plain LARS stops once the remaining correlations vanish.
    CHECK(run({"fit", "--data", dir / "dep.csv", "--out", dir / "o"}).code == 0);
    // Forcing a and b in alongside c makes the active solve singular.
    spit(dir / "deps.json", R"([{"term": "X3", "requires": ["X1", "X2"]}])");
    const auto r = run({"fit", "--data", dir / "dep.csv", "--algorithm", "mlars", "--deps", dir / "deps.json",
                        "--out", dir / "o"});
    CHECK(r.code == 3);
    CHECK(r.err.find("term X") != std::string::npos);
  }

  TEST_CASE("invalid flag combinations exit with 2") {
    TempDir dir;
    REQUIRE(run({"gen", "--n", "50", "--out", dir / "data.csv"}).code == 0);
    CHECK(run({"fit", "--data", dir / "data.csv", "--algorithm", "lars", "--deps", "auto"}).code == 2);
    CHECK(run({"fit", "--data", dir / "data.csv", "--design", "cubic"}).code == 2);
    CHECK(run({"replicate", "--reps", "1", "--truncate", "zero", "--out", dir / "r"}).code == 2);
    CHECK(run({"replicate", "--reps", "1", "--model", "model2", "--out", dir / "r"}).code == 2);
    CHECK(run({"replicate", "--reps", "1", "--n", "5", "--out", dir / "r"}).code == 2);
    CHECK(run({"replicate", "--reps", "1", "--algorithm", "lasso", "--out", dir / "r"}).code == 2);
  }

  TEST_CASE("replicate writes a histogram with one unit per term for one replication") {
    TempDir dir;
    auto r = run({"replicate", "--reps", "1", "--n", "100", "--design", "full", "--algorithm", "mlars", "--out",
                  dir / "one"});
    REQUIRE(r.code == 0);
    const auto rows = rows_of(slurp(dir / "one/hist.csv"));
    CHECK(rows.front() == std::vector<std::string>{"term", "step", "count", "percent"});
    std::map<std::string, int> mass;
    for (std::size_t i = 1; i < rows.size(); ++i) mass[rows[i][0]] += std::stoi(rows[i][2]);
    CHECK(mass.size() == 65);
    for (const auto& [term, count] : mass) CHECK(count == 1);
    CHECK(rows.size() == 1 + 65 * 65);

    r = run({"replicate", "--reps", "3", "--n", "100", "--design", "full", "--truncate", "20", "--out",
             dir / "trunc"});
    REQUIRE(r.code == 0);
    CHECK(rows_of(slurp(dir / "trunc/hist.csv")).size() == 1 + 65 * 20);
    const auto manifest = json::parse(slurp(dir / "trunc/manifest.json"));
    CHECK(manifest["seeds"].size() == 3);
    CHECK(manifest["config"]["truncate"] == 20);
    CHECK(manifest["successful_reps"] == 3);
  }

  TEST_CASE("user dependency files and factor columns") {
    TempDir dir;
    std::mt19937_64 rng(12);
    const Index n = 60;
    const Matrix x = hlars::testing::gaussian_matrix(rng, n, 2);
    CsvTable t{{"u", "v", "g", "y"}, Matrix(n, 4)};
    t.values.col(0) = x.col(0);
    t.values.col(1) = x.col(1);
    for (Index i = 0; i < n; ++i) {
      t.values(i, 2) = static_cast<double>(i % 3);
      t.values(i, 3) = x(i, 0) + (i % 3 == 2 ? 1.5 : 0.0) + 0.2 * x(i, 1) * x(i, 1);
    }
    std::ostringstream csv;
    write_csv(csv, t);
    spit(dir / "f.csv", csv.str());

    auto r = run({"fit", "--data", dir / "f.csv", "--factor", "g", "--algorithm", "mlars", "--deps", "auto", "--out",
                  dir / "auto"});
    REQUIRE(r.code == 0);
    const auto terms = terms_in(slurp(dir / "auto/path.csv"), 1);
    CHECK(terms == std::set<std::string>{"X1", "X2", "g.0", "g.1", "g.2"});
    CHECK(run({"check", "--run", dir / "auto"}).code == 0);

    spit(dir / "deps.json", R"([{"term": "X2", "requires": ["X1"]},
                               {"factor": "g", "members": ["g.0", "g.1", "g.2"], "held_out": "g.0"}])");
    r = run({"fit", "--data", dir / "f.csv", "--factor", "g", "--algorithm", "mlars", "--deps", dir / "deps.json",
             "--out", dir / "user"});
    REQUIRE(r.code == 0);
    std::istringstream in(slurp(dir / "user/path.csv"));
    auto problem = cli::load_problem(json::parse(slurp(dir / "user/manifest.json"))["config"].get<cli::FitConfig>());
    const auto table = read_path_csv(in, problem.design.terms);
    for (const auto& row : table.coef) {
      CHECK(row(static_cast<Index>(*problem.design.index_of("g.0"))) == 0.0);
      if (row(1) != 0.0) CHECK(row(0) != 0.0);
    }
    CHECK(run({"check", "--run", dir / "user"}).code == 0);

    spit(dir / "unknown.json", R"([{"term": "X9", "requires": ["X1"]}])");
    CHECK(run({"fit", "--data", dir / "f.csv", "--factor", "g", "--algorithm", "mlars", "--deps",
               dir / "unknown.json", "--out", dir / "x"})
              .code == 2);
    spit(dir / "malformed.json", "{not json");
    CHECK(run({"fit", "--data", dir / "f.csv", "--algorithm", "mlars", "--deps", dir / "malformed.json", "--out",
               dir / "x"})
              .code == 2);
    CHECK(run({"fit", "--data", dir / "f.csv", "--factor", "u", "--out", dir / "x"}).code == 2);
  }
}
