#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace hlars {

// Dense storage is Eigen's default column-major layout throughout.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Relative tolerance applied to Cholesky pivots when deciding that a column
// is linearly dependent on the columns before it.
inline constexpr double kPivotTolerance = 1e-10;

struct StandardizationRecord {
  Vector center;
  Vector scale;  // Euclidean norm of the centered column, always > 0
};

struct Standardized {
  Matrix data;
  StandardizationRecord record;
};

// Centers each column to mean zero and scales it to unit Euclidean norm.
// Throws ConstantColumn for a column whose entries are all equal, and Error
// on non-finite input.
Standardized standardize(const Matrix& m);

struct LeastSquaresFit {
  Vector coef;
  Vector fitted;
};

// Ordinary least squares of y on the columns of xa. Solves the normal
// equations by Cholesky with one step of iterative refinement. Throws
// RankDeficient naming the first dependent column.
LeastSquaresFit least_squares(const Matrix& xa, const Vector& y);

// Same as least_squares on the submatrix x(:, cols), reusing a precomputed
// Gram matrix gram = x'x. `coef` is ordered like `cols`.
LeastSquaresFit least_squares_subset(const Matrix& x, const Matrix& gram,
                                     std::span<const Index> cols, const Vector& y);

// m' v, one dot product per column.
Vector crossprod(const Matrix& m, const Vector& v);

// Lower Cholesky factor of a symmetric positive definite matrix, with the
// rank check described for kPivotTolerance. Exposed for the solvers above
// and for tests.
class Cholesky {
 public:
  explicit Cholesky(const Matrix& spd);
  Vector solve(const Vector& rhs) const;
  const Matrix& lower() const { return lower_; }

 private:
  Matrix lower_;
};

}  // namespace hlars
