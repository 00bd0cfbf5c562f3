#pragma once

#include <Eigen/Dense>
#include <string>

namespace nesgd {

using Index = Eigen::Index;

/// An element of the optimization space: either a vector in R^d or a matrix
/// in R^{m x n}. Vectors are stored as d x 1 matrices; the two shapes never
/// mix in arithmetic.
class Point {
 public:
  /// Throws ShapeError on an empty vector and DomainError on non-finite entries.
  static Point vector(Eigen::VectorXd values);
  static Point matrix(Eigen::MatrixXd values);
  static Point zeros_vector(Index d);
  static Point zeros_matrix(Index rows, Index cols);
  static Point zeros_like(const Point& other);

  bool is_matrix() const noexcept { return matrix_; }
  Index rows() const noexcept { return values_.rows(); }
  Index cols() const noexcept { return values_.cols(); }
  Index size() const noexcept { return values_.size(); }

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  Eigen::MatrixXd& values() noexcept { return values_; }

  bool same_shape(const Point& other) const noexcept;
  bool all_finite() const;
  std::string shape_string() const;

  Point& operator+=(const Point& other);
  Point& operator-=(const Point& other);
  Point& operator*=(double scale) noexcept;

 private:
  Point(Eigen::MatrixXd values, bool matrix);

  Eigen::MatrixXd values_;
  bool matrix_ = false;
};

Point operator+(Point lhs, const Point& rhs);
Point operator-(Point lhs, const Point& rhs);
Point operator*(double scale, Point p);
Point operator*(Point p, double scale);

/// Frobenius / Euclidean inner product.
double dot(const Point& a, const Point& b);

void require_same_shape(const Point& a, const Point& b, const char* context);

}  // namespace nesgd
