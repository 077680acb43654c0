#include "hlars/simulate.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <numbers>
#include <optional>
#include <thread>

#include "hlars/error.hpp"
#include "hlars/hierarchy.hpp"

namespace hlars {

void SimConfig::validate() const {
  if (n < 10) throw InvalidConfig("sample size must be at least 10");
  if (reps < 1) throw InvalidConfig("at least one replication is required");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) throw InvalidConfig("noise sd must be finite and >= 0");
}

double SimRng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double SimRng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t r) {
  std::uint64_t z = master + (static_cast<std::uint64_t>(r) + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double model1_mean(std::span<const double, 10> x) {
  const double centered = x[0] - 0.5;
  return centered * centered + x[1] + x[2] + x[3] + x[4];
}

Model1Data gen_model1(std::size_t n, double noise_sd, std::uint64_t seed) {
  constexpr Index kVars = 10;
  SimRng rng(seed);
  Model1Data out{Matrix(static_cast<Index>(n), kVars), Vector(static_cast<Index>(n))};
  std::array<double, kVars> row{};
  for (Index i = 0; i < static_cast<Index>(n); ++i) {
    for (Index j = 0; j < kVars; ++j) {
      row[static_cast<std::size_t>(j)] = rng.uniform();
      out.x(i, j) = row[static_cast<std::size_t>(j)];
    }
    const double eps = noise_sd * rng.normal();
    out.y(i) = model1_mean(row) + eps;
  }
  return out;
}

DesignMatrix build_design(const Matrix& raw, DesignKind kind) {
  return kind == DesignKind::MainOnly ? main_effects_only(raw) : expand_second_order(raw, true, true);
}

LarsPath run_algorithm(const DesignMatrix& dm, const Vector& y, AlgorithmKind algorithm) {
  if (algorithm == AlgorithmKind::Lars) return lars_fit(dm, y);
  return modified_lars_fit(dm, y, marginality_dependencies(dm.terms));
}

std::vector<std::size_t> selection_steps(const LarsPath& path) {
  std::vector<std::size_t> steps(path.first_entry.size());
  for (std::size_t t = 0; t < steps.size(); ++t) {
    if (!path.first_entry[t]) throw TermNeverEntered(path.terms.at(t).name);
    steps[t] = *path.first_entry[t];
  }
  return steps;
}

double SelectionHistogram::percent(std::size_t term, std::size_t step) const {
  return reps == 0 ? 0.0 : 100.0 * static_cast<double>(count(term, step)) / static_cast<double>(reps);
}

std::size_t SelectionHistogram::term_index(const std::string& name) const {
  const auto it = std::find(terms.begin(), terms.end(), name);
  if (it == terms.end()) throw UnknownTerm(name);
  return static_cast<std::size_t>(it - terms.begin());
}

SelectionHistogram replicate_study(const SimConfig& cfg, const PathInspector& inspect) {
  cfg.validate();

  struct Outcome {
    std::optional<std::vector<std::size_t>> steps;
    std::string error;
  };
  std::vector<Outcome> outcomes(cfg.reps);

  auto run_one = [&](std::size_t r) {
    try {
      const auto data = gen_model1(cfg.n, cfg.noise_sd, replication_seed(cfg.master_seed, r));
      const auto dm = build_design(data.x, cfg.design);
      const auto path = run_algorithm(dm, data.y, cfg.algorithm);
      outcomes[r].steps = selection_steps(path);
      if (inspect) inspect(r, dm, path);
    } catch (const Error& e) {
      outcomes[r].error = e.what();
    }
  };

  std::size_t workers = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  workers = std::min(workers, cfg.reps);
  if (workers <= 1) {
    for (std::size_t r = 0; r < cfg.reps; ++r) run_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < cfg.reps; r = next++) run_one(r);
      });
    }
  }

  // The term list is a function of the design kind alone; derive it from a
  // fixed small dataset so it exists even when every replication failed.
  const auto probe = build_design(gen_model1(10, 0.0, 0).x, cfg.design);
  SelectionHistogram hist;
  for (const auto& t : probe.terms) hist.terms.push_back(t.name);
  hist.max_step = hist.terms.size();
  hist.counts.assign(hist.terms.size(), std::vector<std::size_t>(hist.max_step, 0));
  for (std::size_t r = 0; r < cfg.reps; ++r) {
    const auto& o = outcomes[r];
    if (!o.steps) {
      hist.failures.push_back({r, o.error});
      continue;
    }
    ++hist.reps;
    for (std::size_t t = 0; t < o.steps->size(); ++t) ++hist.counts[t][(*o.steps)[t] - 1];
  }
  return hist;
}

double pearson_correlation(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() < 2) throw DimensionMismatch("pearson_correlation: length mismatch");
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  return ca.dot(cb) / (ca.norm() * cb.norm());
}

RatioEstimate correlation_ratio_check(std::size_t n, std::span<const std::uint64_t> seeds, double noise_sd) {
  if (seeds.empty()) throw InvalidConfig("correlation_ratio_check needs at least one seed");
  std::vector<double> ratios;
  RatioEstimate out;
  for (const auto seed : seeds) {
    const auto data = gen_model1(n, noise_sd, seed);
    const Vector x2 = data.x.col(1);
    const Vector x25 = data.x.col(1).cwiseProduct(data.x.col(4));
    ratios.push_back(pearson_correlation(x25, data.y) / pearson_correlation(x2, data.y));
    const double c1 = pearson_correlation(data.x.col(0), data.y);
    out.mean_corr_x1 += c1;
    out.max_abs_corr_x1 = std::max(out.max_abs_corr_x1, std::abs(c1));
  }
  const auto k = static_cast<double>(ratios.size());
  out.mean_corr_x1 /= k;
  for (double r : ratios) out.mean_ratio += r;
  out.mean_ratio /= k;
  if (ratios.size() > 1) {
    double ss = 0.0;
    for (double r : ratios) ss += (r - out.mean_ratio) * (r - out.mean_ratio);
    out.stderr_ratio = std::sqrt(ss / (k - 1.0) / k);
  }
  return out;
}

}  // namespace hlars
