#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hlars/design.hpp"
#include "hlars/lars.hpp"
#include "hlars/linalg.hpp"

namespace hlars {

enum class DesignKind { MainOnly, FullSecondOrder };
enum class AlgorithmKind { Lars, ModifiedLars };

struct SimConfig {
  std::size_t n = 500;
  std::size_t reps = 1000;
  double noise_sd = 0.05;
  std::uint64_t master_seed = 1;
  DesignKind design = DesignKind::MainOnly;
  AlgorithmKind algorithm = AlgorithmKind::Lars;
  std::size_t threads = 1;  // 0 means one per hardware thread

  // Throws InvalidConfig unless n >= 10, reps >= 1 and noise_sd >= 0.
  void validate() const;
};

// Random source for the simulation. The engine is std::mt19937_64, whose
// output sequence the C++ standard fixes. Uniforms take the top 53 bits of
// one draw: u = (x >> 11) * 2^-53, so u is in [0, 1). Normals use the
// Box-Muller cosine branch on two uniforms, sqrt(-2 ln(1 - u1)) cos(2 pi u2);
// the sine branch is discarded so each normal costs exactly two draws.
class SimRng {
 public:
  explicit SimRng(std::uint64_t seed) : engine_(seed) {}
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer applied to master + (r + 1) * 0x9E3779B97F4A7C15.
// Seeds depend only on (master, r), so replications can run in any order.
std::uint64_t replication_seed(std::uint64_t master, std::size_t r);

struct Model1Data {
  Matrix x;  // n x 10, iid uniform [0, 1]
  Vector y;  // (X1 - 0.5)^2 + X2 + X3 + X4 + X5 + eps, eps ~ N(0, noise_sd^2)
};

// Noise-free part of model 1 for one row of ten explanatory values.
double model1_mean(std::span<const double, 10> x);

// Rows are drawn in order; within a row the ten uniforms come first, then
// the noise term.
Model1Data gen_model1(std::size_t n, double noise_sd, std::uint64_t seed);

DesignMatrix build_design(const Matrix& raw, DesignKind kind);

// Runs the configured algorithm on one dataset. ModifiedLars uses the
// marginality dependencies of the design's terms.
LarsPath run_algorithm(const DesignMatrix& dm, const Vector& y, AlgorithmKind algorithm);

// 1-based first-entry step of every term. Throws TermNeverEntered when the
// path stopped before some term became active.
std::vector<std::size_t> selection_steps(const LarsPath& path);

struct ReplicationFailure {
  std::size_t replication = 0;
  std::string message;
};

struct SelectionHistogram {
  std::vector<std::string> terms;
  std::size_t max_step = 0;
  // counts[t][s - 1] = replications in which term t entered at step s.
  std::vector<std::vector<std::size_t>> counts;
  std::size_t reps = 0;  // successful replications
  std::vector<ReplicationFailure> failures;

  std::size_t count(std::size_t term, std::size_t step) const { return counts.at(term).at(step - 1); }
  double percent(std::size_t term, std::size_t step) const;
  std::size_t term_index(const std::string& name) const;
};

// Called once per successful replication with its path. It may be called
// from several worker threads at once.
using PathInspector = std::function<void(std::size_t replication, const DesignMatrix&, const LarsPath&)>;

SelectionHistogram replicate_study(const SimConfig& cfg, const PathInspector& inspect = {});

double pearson_correlation(const Vector& a, const Vector& b);

struct RatioEstimate {
  double mean_ratio = 0.0;  // mean of corr(X2 X5, y) / corr(X2, y)
  double stderr_ratio = 0.0;
  double mean_corr_x1 = 0.0;  // mean of corr(X1, y)
  double max_abs_corr_x1 = 0.0;
};

RatioEstimate correlation_ratio_check(std::size_t n, std::span<const std::uint64_t> seeds, double noise_sd = 0.05);

}  // namespace hlars
