#include "nesgd/symmetric_map.hpp"

#include <cmath>

#include "nesgd/errors.hpp"
#include "nesgd/geometry.hpp"

namespace nesgd {
namespace {

double lambda_max(const Eigen::MatrixXd& sym) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .maxCoeff();
}

double lambda_min(const Eigen::MatrixXd& sym) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& spd) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spd);
  const Eigen::VectorXd s = eig.eigenvalues().cwiseSqrt().cwiseInverse();
  return eig.eigenvectors() * s.asDiagonal() * eig.eigenvectors().transpose();
}

// Largest eigenvalue of S A S with S = bound^{-1/2}, written as
// 1 + lambda_max(S (A - bound) S) so that A == bound gives exactly 1 even when
// bound is badly conditioned.
double generalized_lambda_max(const Eigen::MatrixXd& a, const Eigen::MatrixXd& bound) {
  const Eigen::MatrixXd s = inverse_sqrt(bound);
  const Eigen::MatrixXd w = s * (a - bound) * s;
  return 1.0 + lambda_max(0.5 * (w + w.transpose()));
}

}  // namespace

SymmetricMap::SymmetricMap(Kind kind, Eigen::MatrixXd data)
    : kind_(kind), data_(std::move(data)) {
  if (!data_.allFinite()) {
    throw DomainError("SymmetricMap: non-finite entries");
  }
}

SymmetricMap SymmetricMap::scaled_identity(double scale) {
  return {Kind::kScaledIdentity, Eigen::MatrixXd::Constant(1, 1, scale)};
}

SymmetricMap SymmetricMap::diagonal(Eigen::VectorXd entries) {
  if (entries.size() < 1) {
    throw ShapeError("SymmetricMap::diagonal: empty");
  }
  return {Kind::kDiagonal, Eigen::MatrixXd(std::move(entries))};
}

SymmetricMap SymmetricMap::dense(Eigen::MatrixXd matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1) {
    throw ShapeError("SymmetricMap::dense: matrix must be square");
  }
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, matrix.cwiseAbs().maxCoeff())) {
    throw DomainError("SymmetricMap::dense: matrix must be symmetric");
  }
  return {Kind::kDense, 0.5 * (matrix + matrix.transpose())};
}

SymmetricMap SymmetricMap::left_multiply(Eigen::MatrixXd matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1) {
    throw ShapeError("SymmetricMap::left_multiply: matrix must be square");
  }
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, matrix.cwiseAbs().maxCoeff())) {
    throw DomainError("SymmetricMap::left_multiply: matrix must be symmetric");
  }
  return {Kind::kLeftMultiply, 0.5 * (matrix + matrix.transpose())};
}

bool SymmetricMap::accepts(const Point& x) const noexcept {
  switch (kind_) {
    case Kind::kScaledIdentity:
      return true;
    case Kind::kDiagonal:
    case Kind::kDense:
      return data_.rows() == x.size();
    case Kind::kLeftMultiply:
      return x.is_matrix() ? x.rows() == data_.rows() : x.size() % data_.rows() == 0;
  }
  return false;
}

Point SymmetricMap::apply(const Point& x) const {
  if (!accepts(x)) {
    throw ShapeError("SymmetricMap::apply: incompatible point " + x.shape_string());
  }
  Point y = x;
  switch (kind_) {
    case Kind::kScaledIdentity:
      y.values() *= data_(0, 0);
      break;
    case Kind::kDiagonal: {
      Eigen::Map<const Eigen::VectorXd> xv(x.values().data(), x.size());
      Eigen::Map<Eigen::VectorXd> yv(y.values().data(), y.size());
      yv = data_.col(0).cwiseProduct(xv);
      break;
    }
    case Kind::kDense: {
      Eigen::Map<const Eigen::VectorXd> xv(x.values().data(), x.size());
      Eigen::Map<Eigen::VectorXd> yv(y.values().data(), y.size());
      yv.noalias() = data_ * xv;
      break;
    }
    case Kind::kLeftMultiply: {
      const Index m = data_.rows();
      const Index n = x.size() / m;
      Eigen::Map<const Eigen::MatrixXd> xm(x.values().data(), m, n);
      Eigen::Map<Eigen::MatrixXd> ym(y.values().data(), m, n);
      ym.noalias() = data_ * xm;
      break;
    }
  }
  return y;
}

Eigen::MatrixXd SymmetricMap::to_dense(Index dim) const {
  switch (kind_) {
    case Kind::kScaledIdentity:
      return data_(0, 0) * Eigen::MatrixXd::Identity(dim, dim);
    case Kind::kDiagonal:
      if (data_.rows() != dim) throw ShapeError("SymmetricMap::to_dense: dimension mismatch");
      return Eigen::VectorXd(data_.col(0)).asDiagonal();
    case Kind::kDense:
      if (data_.rows() != dim) throw ShapeError("SymmetricMap::to_dense: dimension mismatch");
      return data_;
    case Kind::kLeftMultiply: {
      const Index m = data_.rows();
      if (dim % m != 0) throw ShapeError("SymmetricMap::to_dense: dimension mismatch");
      Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
      for (Index j = 0; j < dim / m; ++j) {
        out.block(j * m, j * m, m, m) = data_;
      }
      return out;
    }
  }
  return {};
}

double SymmetricMap::max_eigenvalue() const {
  switch (kind_) {
    case Kind::kScaledIdentity:
    case Kind::kDiagonal:
      return data_.maxCoeff();
    case Kind::kDense:
    case Kind::kLeftMultiply:
      return lambda_max(data_);
  }
  return 0.0;
}

double SymmetricMap::min_eigenvalue() const {
  switch (kind_) {
    case Kind::kScaledIdentity:
    case Kind::kDiagonal:
      return data_.minCoeff();
    case Kind::kDense:
    case Kind::kLeftMultiply:
      return lambda_min(data_);
  }
  return 0.0;
}

double SymmetricMap::squared_frobenius(Index dim) const {
  switch (kind_) {
    case Kind::kScaledIdentity:
      return data_(0, 0) * data_(0, 0) * static_cast<double>(dim);
    case Kind::kDiagonal:
    case Kind::kDense:
      return data_.squaredNorm();
    case Kind::kLeftMultiply:
      return static_cast<double>(dim / data_.rows()) * data_.squaredNorm();
  }
  return 0.0;
}

double domination_ratio(const SymmetricMap& a, const StructuredOperator& bound) {
  const OperatorSpace& space = bound.space();
  const Eigen::MatrixXd& b = bound.payload();
  using Kind = SymmetricMap::Kind;
  switch (space.kind()) {
    case SpaceKind::kScalar:
      return a.max_eigenvalue() / b(0, 0);
    case SpaceKind::kDiagonal:
      if (a.kind() == Kind::kScaledIdentity) {
        return a.data()(0, 0) / b.minCoeff();
      }
      if (a.kind() == Kind::kDiagonal) {
        return a.data().col(0).cwiseQuotient(b.col(0)).maxCoeff();
      }
      break;
    case SpaceKind::kLeftMatrix:
      if (a.kind() == Kind::kScaledIdentity) {
        return a.data()(0, 0) / lambda_min(b);
      }
      if (a.kind() == Kind::kLeftMultiply && a.data().rows() == b.rows()) {
        return generalized_lambda_max(a.data(), b);
      }
      break;
  }
  return generalized_lambda_max(a.to_dense(space.dim()), bound.dense());
}

double domination_ratio(const StructuredOperator& a, const StructuredOperator& bound) {
  if (!(a.space() == bound.space())) {
    throw ShapeError("domination_ratio: operators from different spaces");
  }
  switch (a.space().kind()) {
    case SpaceKind::kScalar:
      return a.payload()(0, 0) / bound.payload()(0, 0);
    case SpaceKind::kDiagonal:
      return a.payload().col(0).cwiseQuotient(bound.payload().col(0)).maxCoeff();
    case SpaceKind::kLeftMatrix:
      return generalized_lambda_max(a.payload(), bound.payload());
  }
  return 0.0;
}

}  // namespace nesgd
