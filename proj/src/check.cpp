#include "hlars/check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hlars/error.hpp"
#include "hlars/lars.hpp"

namespace hlars {

namespace {

void record(InvariantResult& r, double residual, const std::string& where) {
  if (std::isnan(residual)) residual = std::numeric_limits<double>::infinity();
  if (residual > r.max_residual) {
    r.max_residual = residual;
    if (residual > r.tolerance) r.detail = where;
  }
  if (residual > r.tolerance) r.passed = false;
}

ColumnSet support(const Vector& coef) {
  ColumnSet out;
  for (Index j = 0; j < coef.size(); ++j) {
    if (coef(j) != 0.0) out.push_back(static_cast<std::size_t>(j));
  }
  return out;
}

}  // namespace

bool CheckReport::passed() const {
  return std::all_of(results.begin(), results.end(), [](const InvariantResult& r) { return r.passed; });
}

const InvariantResult& CheckReport::get(const std::string& name) const {
  const auto it = std::find_if(results.begin(), results.end(), [&](const InvariantResult& r) { return r.name == name; });
  if (it == results.end()) throw Error("no invariant named '" + name + "'");
  return *it;
}

CheckReport check_path(const DesignMatrix& dm, const Vector& y_in, const std::vector<Vector>& coef_rows,
                       const DependencyStructure* deps, double tolerance) {
  const Matrix& x = dm.data;
  const auto m = static_cast<std::size_t>(x.cols());
  if (coef_rows.empty()) throw Error("path has no rows");
  for (const auto& row : coef_rows) {
    if (static_cast<std::size_t>(row.size()) != m) throw DimensionMismatch("coefficient row has wrong length");
  }

  const Vector y = y_in.array() - y_in.mean();
  const Matrix gram = x.transpose() * x;
  const LarsOptions opts;
  const std::vector<FactorGroup> no_groups;
  const auto& groups = deps != nullptr ? deps->groups() : no_groups;

  InvariantResult reconstruction{"reconstruction", true, false, 0.0, tolerance, {}};
  InvariantResult decay{"correlation_decay", true, false, 0.0, tolerance, {}};
  InvariantResult equiangular{"equiangularity", true, false, 0.0, tolerance, {}};
  InvariantResult closure{"closure", true, deps == nullptr, 0.0, 0.0, {}};
  InvariantResult completion{"ols_completion", true, false, 0.0, tolerance, {}};

  record(reconstruction, coef_rows.front().cwiseAbs().maxCoeff(), "step 0 is not zero");

  bool reached_full = false;
  for (std::size_t s = 0; s + 1 < coef_rows.size(); ++s) {
    const std::string where = "step " + std::to_string(s + 1);
    const Vector& beta = coef_rows[s];
    const Vector mu = x * beta;
    const Vector chat = x.transpose() * (y - mu);
    const double Chat = chat.cwiseAbs().maxCoeff();
    if (!(Chat > 0.0)) {
      record(reconstruction, std::numeric_limits<double>::infinity(), where + ": no correlation left to follow");
      break;
    }

    const ColumnSet a0 = active_set(chat, Chat, opts.tie_tolerance);
    ColumnSet active = a0;
    if (deps != nullptr) active = expand_active(a0, *deps).a;
    const ColumnSet solve_cols = factor_design_columns(active, groups);
    const std::vector<Index> cols(solve_cols.begin(), solve_cols.end());

    LeastSquaresFit fit;
    try {
      fit = least_squares_subset(x, gram, cols, y);
    } catch (const RankDeficient&) {
      record(reconstruction, std::numeric_limits<double>::infinity(), where + ": active set is rank deficient");
      break;
    }
    Vector target = Vector::Zero(static_cast<Index>(m));
    for (std::size_t a = 0; a < cols.size(); ++a) target(cols[a]) = fit.coef(static_cast<Index>(a));
    const Vector avec = x.transpose() * (fit.fitted - mu);

    for (auto j : a0) {
      const auto jj = static_cast<Index>(j);
      const double sign = chat(jj) < 0.0 ? -1.0 : 1.0;
      record(equiangular, std::abs(avec(jj) - sign * Chat) / Chat, where + ", " + dm.terms[j].name);
    }

    ColumnSet complement;
    for (std::size_t j = 0; j < m; ++j) {
      if (!std::binary_search(active.begin(), active.end(), j)) complement.push_back(j);
    }
    const double gamma = step_length(Chat, chat, avec, complement, opts).gamma;
    const Vector predicted = beta + gamma * (target - beta);
    const Vector& next = coef_rows[s + 1];
    const double scale = std::max(1.0, predicted.cwiseAbs().maxCoeff());
    record(reconstruction, (next - predicted).cwiseAbs().maxCoeff() / scale, where);

    const double next_Chat = (x.transpose() * (y - x * next)).cwiseAbs().maxCoeff();
    record(decay, std::abs(next_Chat - (1.0 - gamma) * Chat) / Chat, where);

    if (deps != nullptr) {
      ColumnSet recorded = support(next);
      for (const auto& g : groups) {
        const bool any = std::any_of(g.members.begin(), g.members.end(), [&](std::size_t c) {
          return c != g.held_out && std::binary_search(recorded.begin(), recorded.end(), c);
        });
        if (any && !std::binary_search(recorded.begin(), recorded.end(), g.held_out)) {
          recorded.insert(std::lower_bound(recorded.begin(), recorded.end(), g.held_out), g.held_out);
        }
      }
      if (!is_closed(recorded, *deps)) record(closure, 1.0, where + ": active terms not closed under dependencies");
    }

    reached_full = complement.empty();
  }

  if (reached_full) {
    const Vector projection = x * x.completeOrthogonalDecomposition().solve(y);
    const Vector final_fit = x * coef_rows.back();
    record(completion, (final_fit - projection).cwiseAbs().maxCoeff() / std::max(1.0, y.norm()), "final step");
  } else {
    completion.skipped = true;
    completion.detail = "path stops before every term is active";
  }

  return {{reconstruction, decay, equiangular, closure, completion}};
}

}  // namespace hlars
