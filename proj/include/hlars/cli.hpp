#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlars/design.hpp"
#include "hlars/hierarchy.hpp"
#include "hlars/linalg.hpp"

namespace hlars::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes of the hlars executable.
enum ExitCode : int { kOk = 0, kInvariantFailure = 1, kUsage = 2, kNumerical = 3 };

struct FitConfig {
  std::string data;
  std::string response = "y";
  std::string design = "main";      // main | full
  std::string algorithm = "lars";   // lars | mlars
  std::string deps;                 // "", "auto" or a JSON file
  std::vector<std::string> factors; // integer-coded categorical columns
  std::optional<std::size_t> max_steps;
  std::string out = ".";
};

struct ReplicateConfig {
  std::string model = "model1";
  std::size_t n = 500;
  std::size_t reps = 1000;
  double noise_sd = 0.05;
  std::uint64_t seed = 1;
  std::string design = "main";
  std::string algorithm = "lars";
  std::optional<std::size_t> truncate;
  std::size_t threads = 1;
  std::string out = ".";
};

void to_json(nlohmann::json& j, const FitConfig& c);
void from_json(const nlohmann::json& j, FitConfig& c);
void to_json(nlohmann::json& j, const ReplicateConfig& c);
void from_json(const nlohmann::json& j, ReplicateConfig& c);

// Everything a fit needs once the input CSV has been read: the design, the
// response, and the dependency structure (null for plain LARS).
struct Problem {
  DesignMatrix design;
  Vector y;
  std::optional<DependencyStructure> deps;
  std::vector<std::string> source_columns;  // CSV column behind each main effect
};

Problem load_problem(const FitConfig& cfg);

// Worker count for replicate: hardware threads, capped by HLARS_THREADS.
std::size_t worker_count();

// Entry point of the executable. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hlars::cli
