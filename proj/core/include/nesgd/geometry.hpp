#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "nesgd/point.hpp"

namespace nesgd {

// The three operator subspaces: scalar multiples of the identity (normalized
// SGD), diagonal operators (SignSGD) and left multiplication by a symmetric
// m x m matrix (Muon).
enum class SpaceKind { kScalar, kDiagonal, kLeftMatrix };

std::string_view to_string(SpaceKind kind);
SpaceKind parse_space_kind(std::string_view name);

class OperatorSpace {
 public:
  static OperatorSpace scalar(Index d);
  static OperatorSpace diagonal(Index d);
  static OperatorSpace left_matrix(Index rows, Index cols);

  SpaceKind kind() const noexcept { return kind_; }
  // d for vector spaces, m for LeftMatrix.
  Index rows() const noexcept { return rows_; }
  // 1 for vector spaces, n for LeftMatrix.
  Index cols() const noexcept { return cols_; }
  // Dimension of the point space: d or m*n.
  Index dim() const noexcept { return rows_ * cols_; }
  bool is_matrix() const noexcept { return kind_ == SpaceKind::kLeftMatrix; }

  bool accepts(const Point& x) const noexcept;
  void require(const Point& x, const char* context) const;
  Point zero_point() const;
  std::string describe() const;

  friend bool operator==(const OperatorSpace&, const OperatorSpace&) = default;

 private:
  OperatorSpace(SpaceKind kind, Index rows, Index cols);

  SpaceKind kind_;
  Index rows_;
  Index cols_;
};

/// A self-adjoint operator belonging to an OperatorSpace. The payload is
/// 1x1 (Scalar), d x 1 (Diagonal) or m x m symmetric (LeftMatrix).
class StructuredOperator {
 public:
  /// Strictly positive definite constructors; throw DomainError otherwise.
  static StructuredOperator scalar(const OperatorSpace& space, double beta);
  static StructuredOperator diagonal(const OperatorSpace& space, Eigen::VectorXd h);
  static StructuredOperator left(const OperatorSpace& space, Eigen::MatrixXd b);
  static StructuredOperator identity(const OperatorSpace& space);
  /// Payload only needs to be positive semidefinite (projections may be
  /// singular).
  static StructuredOperator semidefinite(const OperatorSpace& space, Eigen::MatrixXd payload);
  /// Any symmetric payload (used for linear projections of indefinite input).
  static StructuredOperator symmetric(const OperatorSpace& space, Eigen::MatrixXd payload);

  const OperatorSpace& space() const noexcept { return space_; }
  const Eigen::MatrixXd& payload() const noexcept { return payload_; }

  double min_payload_eigenvalue() const;
  double max_payload_eigenvalue() const;
  bool is_positive_definite() const;

  Point apply(const Point& x) const;
  StructuredOperator inverse() const;
  StructuredOperator sqrt() const;
  // this * middle * this, which stays in the space.
  StructuredOperator sandwich(const StructuredOperator& middle) const;

  // Nuclear norm of the operator acting on the point space.
  double trace_norm() const;
  // Dense matrix over the column-major flattened point space.
  Eigen::MatrixXd dense() const;

  StructuredOperator operator+(const StructuredOperator& other) const;
  StructuredOperator scaled(double factor) const;

 private:
  StructuredOperator(OperatorSpace space, Eigen::MatrixXd payload);

  OperatorSpace space_;
  Eigen::MatrixXd payload_;
};

/// Orthogonal projection of x<x,.> onto the space (positive semidefinite).
StructuredOperator project_rank1(const OperatorSpace& space, const Point& x);

/// Orthogonal projection of a dense symmetric operator over the flattened
/// point space. Defined for vector spaces and LeftMatrix with m*n <= 64.
StructuredOperator project_general(const OperatorSpace& space, const Eigen::MatrixXd& dense);

inline constexpr Index kMaxDenseLeftMatrixDim = 64;

/// Primal norm: ||x||_2/sqrt(d), ||x||_inf, or ||X||_op/sqrt(n).
double norm_R(const OperatorSpace& space, const Point& x);
/// Dual norm: sqrt(d)||x||_2, ||x||_1, or sqrt(n)||X||_nuclear.
double norm_R_star(const OperatorSpace& space, const Point& x);

/// Linear maximization oracle over the unit R-ball: returns u with
/// R(u) <= 1 and <g,u> = R*(g). lmo(0) = 0.
Point lmo(const OperatorSpace& space, const Point& g);

using LmoFn = std::function<Point(const OperatorSpace&, const Point&)>;

// Relative threshold below which singular values count as zero.
inline constexpr double kSingularValueCutoff = 1e-10;

/// <x, Hx>, or <x, H^{-1}x> when `inverse` is set.
double weighted_sqnorm(const StructuredOperator& h, const Point& x, bool inverse = false);

double trace_norm(const StructuredOperator& h);

/// B = 1/4 sum over H in {L, M, Sigma, T} of H / trace_norm(H).
StructuredOperator combine_B(const StructuredOperator& l, const StructuredOperator& m,
                             const StructuredOperator& sigma, const StructuredOperator& t);

}  // namespace nesgd
