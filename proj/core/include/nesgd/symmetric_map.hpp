#pragma once

#include "nesgd/point.hpp"

namespace nesgd {

class StructuredOperator;

/// A symmetric linear map on the point space that is not tied to a geometry:
/// the Hessian of a quadratic objective or the factor F of the noise n = F z.
/// LeftMultiply acts as X -> B X; applied to a flattened (vector) point of
/// length m*n it reshapes column-major to m x n first.
class SymmetricMap {
 public:
  enum class Kind { kScaledIdentity, kDiagonal, kDense, kLeftMultiply };

  static SymmetricMap scaled_identity(double scale);
  static SymmetricMap diagonal(Eigen::VectorXd entries);
  static SymmetricMap dense(Eigen::MatrixXd matrix);
  static SymmetricMap left_multiply(Eigen::MatrixXd matrix);

  Kind kind() const noexcept { return kind_; }
  const Eigen::MatrixXd& data() const noexcept { return data_; }

  Point apply(const Point& x) const;
  // Dense matrix over a flattened space of dimension `dim`.
  Eigen::MatrixXd to_dense(Index dim) const;
  double max_eigenvalue() const;
  double min_eigenvalue() const;
  // ||F||_F^2 over a flattened space of dimension `dim`, i.e. trace(F F^T).
  double squared_frobenius(Index dim) const;
  // Whether the map is compatible with points of this shape.
  bool accepts(const Point& x) const noexcept;

 private:
  SymmetricMap(Kind kind, Eigen::MatrixXd data);

  Kind kind_;
  Eigen::MatrixXd data_;
};

/// Largest generalized eigenvalue of (a, bound) on the point space of
/// dimension `dim`: the smallest c with a <= c * bound.
double domination_ratio(const SymmetricMap& a, const StructuredOperator& bound);

/// Same for a structured operator against another (shared space).
double domination_ratio(const StructuredOperator& a, const StructuredOperator& bound);

}  // namespace nesgd
