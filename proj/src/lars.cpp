#include "hlars/lars.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hlars/error.hpp"

namespace hlars {

namespace {

ColumnSet set_union(const ColumnSet& a, const ColumnSet& b) {
  ColumnSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

ColumnSet complement_of(const ColumnSet& a, std::size_t m) {
  ColumnSet out;
  out.reserve(m - a.size());
  auto it = a.begin();
  for (std::size_t j = 0; j < m; ++j) {
    if (it != a.end() && *it == j) {
      ++it;
    } else {
      out.push_back(j);
    }
  }
  return out;
}

LarsPath fit_path(const DesignMatrix& dm, const Vector& y_in, const DependencyStructure* deps,
                  const LarsOptions& opts) {
  const Matrix& x = dm.data;
  const auto n = static_cast<std::size_t>(x.rows());
  const auto m = static_cast<std::size_t>(x.cols());
  if (static_cast<std::size_t>(y_in.size()) != n) {
    throw DimensionMismatch("response has " + std::to_string(y_in.size()) + " entries for " +
                            std::to_string(n) + " rows");
  }
  if (deps != nullptr && deps->size() != m) {
    throw DimensionMismatch("dependency structure sized for " + std::to_string(deps->size()) +
                            " columns, design has " + std::to_string(m));
  }

  LarsPath path;
  path.terms = dm.terms;
  path.first_entry.assign(m, std::nullopt);
  path.y = y_in.array() - y_in.mean();
  const Vector& y = path.y;

  const std::size_t max_steps = opts.max_steps.value_or(std::min(n > 0 ? n - 1 : 0, m));
  const Matrix gram = x.transpose() * x;
  const std::vector<FactorGroup> no_groups;
  const auto& groups = deps != nullptr ? deps->groups() : no_groups;

  Vector mu = Vector::Zero(static_cast<Index>(n));
  Vector coef = Vector::Zero(static_cast<Index>(m));
  ColumnSet carried;  // A0 members from the previous step plus the columns that joined
  double start_Chat = 0.0;

  for (std::size_t k = 0; k < max_steps; ++k) {
    PathStep step;
    step.k = k;
    step.chat = x.transpose() * (y - mu);
    step.Chat = step.chat.cwiseAbs().maxCoeff();
    if (k == 0) start_Chat = step.Chat;
    if (step.Chat == 0.0 || !(step.Chat > opts.zero_correlation * start_Chat)) break;

    step.a0 = set_union(active_set(step.chat, step.Chat, opts.tie_tolerance), carried);
    ColumnSet active = step.a0;
    if (deps != nullptr) {
      auto expansion = expand_active(step.a0, *deps);
      step.a1 = std::move(expansion.a1);
      active = std::move(expansion.a);
    }

    const ColumnSet solve_cols = factor_design_columns(active, groups);
    std::vector<Index> cols(solve_cols.begin(), solve_cols.end());
    LeastSquaresFit fit;
    try {
      fit = least_squares_subset(x, gram, cols, y);
    } catch (const RankDeficient& e) {
      const auto column = static_cast<std::size_t>(cols.at(e.column()));
      throw RankDeficient(column, "step " + std::to_string(k + 1) + ": term " + dm.terms.at(column).name +
                                      " is linearly dependent on the other active terms");
    }
    Vector target = Vector::Zero(static_cast<Index>(m));
    for (std::size_t a = 0; a < cols.size(); ++a) target(cols[a]) = fit.coef(static_cast<Index>(a));

    step.ybar = fit.fitted;
    step.avec = x.transpose() * (step.ybar - mu);

    const ColumnSet complement = complement_of(active, m);
    auto length = step_length(step.Chat, step.chat, step.avec, complement, opts);
    step.gamma = length.gamma;
    step.joined = std::move(length.joined);

    coef += step.gamma * (target - coef);
    step.coef = coef;
    step.mu = mu;
    mu = step.mu_next();

    for (auto j : active) {
      if (!path.first_entry[j]) path.first_entry[j] = k + 1;
    }
    carried = set_union(step.a0, step.joined);
    path.steps.push_back(std::move(step));
    if (complement.empty()) {
      path.completed = true;
      break;
    }
  }
  return path;
}

}  // namespace

ColumnSet PathStep::active() const { return set_union(a0, a1); }

Correlations current_correlations(const DesignMatrix& dm, const Vector& y, const Vector& mu) {
  if (y.size() != dm.rows() || mu.size() != dm.rows()) {
    throw DimensionMismatch("current_correlations: vector length does not match rows");
  }
  Correlations out;
  out.chat = crossprod(dm.data, y - mu);
  out.Chat = out.chat.size() > 0 ? out.chat.cwiseAbs().maxCoeff() : 0.0;
  return out;
}

ColumnSet active_set(const Vector& chat, double Chat, double tol) {
  ColumnSet out;
  const double threshold = Chat * (1.0 - tol);
  for (Index j = 0; j < chat.size(); ++j) {
    if (std::abs(chat(j)) >= threshold) out.push_back(static_cast<std::size_t>(j));
  }
  return out;
}

StepLength step_length(double Chat, const Vector& chat, const Vector& avec, const ColumnSet& complement,
                       const LarsOptions& opts) {
  std::vector<double> best(complement.size(), std::numeric_limits<double>::infinity());
  double gamma = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < complement.size(); ++c) {
    const auto j = static_cast<Index>(complement[c]);
    for (const double candidate : {(Chat - chat(j)) / (Chat - avec(j)), (Chat + chat(j)) / (Chat + avec(j))}) {
      if (std::isfinite(candidate) && candidate > opts.gamma_floor) best[c] = std::min(best[c], candidate);
    }
    gamma = std::min(gamma, best[c]);
  }

  StepLength out;
  if (!std::isfinite(gamma) || gamma >= 1.0) {
    // Nothing ties before the active-set fit is reached.
    out.gamma = 1.0;
    if (!std::isfinite(gamma)) return out;
  } else {
    out.gamma = gamma;
  }
  for (std::size_t c = 0; c < complement.size(); ++c) {
    if (best[c] <= gamma + opts.join_tolerance) out.joined.push_back(complement[c]);
  }
  return out;
}

LarsPath lars_fit(const DesignMatrix& dm, const Vector& y, const LarsOptions& opts) {
  return fit_path(dm, y, nullptr, opts);
}

LarsPath modified_lars_fit(const DesignMatrix& dm, const Vector& y, const DependencyStructure& d,
                           const LarsOptions& opts) {
  return fit_path(dm, y, &d, opts);
}

std::vector<CoefficientRow> coefficients_along_path(const LarsPath& path) {
  std::vector<CoefficientRow> rows;
  rows.reserve(path.steps.size() + 1);
  rows.push_back({0, 0.0, Vector::Zero(static_cast<Index>(path.terms.size()))});
  for (const auto& step : path.steps) {
    rows.push_back({step.k + 1, step.coef.lpNorm<1>(), step.coef});
  }
  return rows;
}

}  // namespace hlars
