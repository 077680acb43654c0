#include "hlars/linalg.hpp"

#include <cmath>
#include <vector>

#include "hlars/error.hpp"

namespace hlars {

Standardized standardize(const Matrix& m) {
  if (m.rows() < 1) throw DimensionMismatch("standardize: matrix has no rows");
  if (!m.allFinite()) throw Error("standardize: matrix contains non-finite values");

  Standardized out{Matrix(m.rows(), m.cols()), {Vector(m.cols()), Vector(m.cols())}};
  for (Index j = 0; j < m.cols(); ++j) {
    const auto col = m.col(j);
    if (col.minCoeff() == col.maxCoeff()) throw ConstantColumn(static_cast<std::size_t>(j));
    const double center = col.mean();
    Vector centered = col.array() - center;
    // A second centering pass removes the rounding left by the first.
    centered.array() -= centered.mean();
    const double scale = centered.norm();
    if (!(scale > 0.0)) throw ConstantColumn(static_cast<std::size_t>(j));
    out.data.col(j) = centered / scale;
    out.record.center(j) = center;
    out.record.scale(j) = scale;
  }
  return out;
}

Vector crossprod(const Matrix& m, const Vector& v) {
  if (v.size() != m.rows()) {
    throw DimensionMismatch("crossprod: vector length " + std::to_string(v.size()) +
                            " does not match " + std::to_string(m.rows()) + " rows");
  }
  return m.transpose() * v;
}

Cholesky::Cholesky(const Matrix& spd) : lower_(Matrix::Zero(spd.rows(), spd.cols())) {
  if (spd.rows() != spd.cols()) throw DimensionMismatch("Cholesky: matrix is not square");
  const Index k = spd.rows();
  const double reference = k > 0 ? spd.diagonal().cwiseAbs().maxCoeff() : 0.0;
  for (Index j = 0; j < k; ++j) {
    double pivot = spd(j, j) - lower_.row(j).head(j).squaredNorm();
    if (!(pivot > kPivotTolerance * reference)) throw RankDeficient(static_cast<std::size_t>(j));
    const double root = std::sqrt(pivot);
    lower_(j, j) = root;
    for (Index i = j + 1; i < k; ++i) {
      lower_(i, j) = (spd(i, j) - lower_.row(i).head(j).dot(lower_.row(j).head(j))) / root;
    }
  }
}

Vector Cholesky::solve(const Vector& rhs) const {
  if (rhs.size() != lower_.rows()) throw DimensionMismatch("Cholesky::solve: size mismatch");
  const auto tri = lower_.triangularView<Eigen::Lower>();
  Vector z = tri.solve(rhs);
  return tri.transpose().solve(z);
}

LeastSquaresFit least_squares_subset(const Matrix& x, const Matrix& gram,
                                     std::span<const Index> cols, const Vector& y) {
  if (y.size() != x.rows()) throw DimensionMismatch("least_squares: y length does not match rows");
  const auto k = static_cast<Index>(cols.size());
  Matrix sub_gram(k, k);
  Matrix xa(x.rows(), k);
  for (Index a = 0; a < k; ++a) {
    xa.col(a) = x.col(cols[a]);
    for (Index b = 0; b < k; ++b) sub_gram(a, b) = gram(cols[a], cols[b]);
  }
  const Cholesky chol(sub_gram);
  Vector coef = chol.solve(xa.transpose() * y);
  // One refinement step recovers most of the accuracy the normal equations
  // lose to squaring the condition number.
  const Vector residual = y - xa * coef;
  coef += chol.solve(xa.transpose() * residual);
  Vector fitted = xa * coef;
  return {std::move(coef), std::move(fitted)};
}

LeastSquaresFit least_squares(const Matrix& xa, const Vector& y) {
  if (y.size() != xa.rows()) throw DimensionMismatch("least_squares: y length does not match rows");
  std::vector<Index> cols(static_cast<std::size_t>(xa.cols()));
  for (Index j = 0; j < xa.cols(); ++j) cols[static_cast<std::size_t>(j)] = j;
  const Matrix gram = xa.transpose() * xa;
  return least_squares_subset(xa, gram, cols, y);
}

}  // namespace hlars
