#include "nesgd/geometry.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "nesgd/errors.hpp"

namespace nesgd {
namespace {

constexpr double kSymmetryTol = 1e-12;

double relative_asymmetry(const Eigen::MatrixXd& a) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

// Applies psi to the eigenvalues of a symmetric matrix.
template <typename Fn>
Eigen::MatrixXd spectral_map(const Eigen::MatrixXd& a, Fn psi) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const Eigen::VectorXd mapped = eig.eigenvalues().unaryExpr(psi);
  return eig.eigenvectors() * mapped.asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& x) {
  return Eigen::BDCSVD<Eigen::MatrixXd>(x).singularValues();
}

// Largest singular value from the smaller Gram matrix; accurate to rounding
// relative to itself, which is all a norm needs.
double largest_singular_value(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd gram = x.rows() <= x.cols() ? Eigen::MatrixXd(x * x.transpose())
                                                    : Eigen::MatrixXd(x.transpose() * x);
  const double top =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .maxCoeff();
  return std::sqrt(std::max(top, 0.0));
}

}  // namespace

std::string_view to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::kScalar:
      return "scalar";
    case SpaceKind::kDiagonal:
      return "diagonal";
    case SpaceKind::kLeftMatrix:
      return "left-matrix";
  }
  return "unknown";
}

SpaceKind parse_space_kind(std::string_view name) {
  if (name == "scalar") return SpaceKind::kScalar;
  if (name == "diagonal") return SpaceKind::kDiagonal;
  if (name == "left-matrix") return SpaceKind::kLeftMatrix;
  throw DomainError("unknown operator space '" + std::string(name) + "'");
}

// OperatorSpace ---------------------------------------------------------------

OperatorSpace::OperatorSpace(SpaceKind kind, Index rows, Index cols)
    : kind_(kind), rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) {
    throw ShapeError("operator space dimensions must be >= 1");
  }
}

OperatorSpace OperatorSpace::scalar(Index d) { return {SpaceKind::kScalar, d, 1}; }
OperatorSpace OperatorSpace::diagonal(Index d) { return {SpaceKind::kDiagonal, d, 1}; }
OperatorSpace OperatorSpace::left_matrix(Index rows, Index cols) {
  return {SpaceKind::kLeftMatrix, rows, cols};
}

bool OperatorSpace::accepts(const Point& x) const noexcept {
  return x.is_matrix() == is_matrix() && x.rows() == rows_ && x.cols() == cols_;
}

void OperatorSpace::require(const Point& x, const char* context) const {
  if (!accepts(x)) {
    throw ShapeError(std::string(context) + ": point " + x.shape_string() +
                     " does not belong to " + describe());
  }
}

Point OperatorSpace::zero_point() const {
  return is_matrix() ? Point::zeros_matrix(rows_, cols_) : Point::zeros_vector(rows_);
}

std::string OperatorSpace::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(";
  if (is_matrix()) {
    os << rows_ << "x" << cols_;
  } else {
    os << "d=" << rows_;
  }
  os << ")";
  return os.str();
}

// StructuredOperator ------------------------------------------------------------

StructuredOperator::StructuredOperator(OperatorSpace space, Eigen::MatrixXd payload)
    : space_(space), payload_(std::move(payload)) {}

StructuredOperator StructuredOperator::scalar(const OperatorSpace& space, double beta) {
  if (space.kind() != SpaceKind::kScalar) {
    throw ShapeError("scalar payload requires a scalar space");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw DomainError("scalar payload must be positive and finite");
  }
  return {space, Eigen::MatrixXd::Constant(1, 1, beta)};
}

StructuredOperator StructuredOperator::diagonal(const OperatorSpace& space, Eigen::VectorXd h) {
  if (space.kind() != SpaceKind::kDiagonal || h.size() != space.rows()) {
    throw ShapeError("diagonal payload does not match " + space.describe());
  }
  if (!h.allFinite() || !(h.minCoeff() > 0.0)) {
    throw DomainError("diagonal payload must be strictly positive");
  }
  return {space, Eigen::MatrixXd(std::move(h))};
}

StructuredOperator StructuredOperator::left(const OperatorSpace& space, Eigen::MatrixXd b) {
  if (space.kind() != SpaceKind::kLeftMatrix || b.rows() != space.rows() ||
      b.cols() != space.rows()) {
    throw ShapeError("left payload does not match " + space.describe());
  }
  if (!b.allFinite() || relative_asymmetry(b) > kSymmetryTol) {
    throw DomainError("left payload must be finite and symmetric");
  }
  StructuredOperator op(space, symmetrized(b));
  if (!(op.min_payload_eigenvalue() > 0.0)) {
    throw DomainError("left payload must be positive definite");
  }
  return op;
}

StructuredOperator StructuredOperator::identity(const OperatorSpace& space) {
  switch (space.kind()) {
    case SpaceKind::kScalar:
      return scalar(space, 1.0);
    case SpaceKind::kDiagonal:
      return diagonal(space, Eigen::VectorXd::Ones(space.rows()));
    case SpaceKind::kLeftMatrix:
      return left(space, Eigen::MatrixXd::Identity(space.rows(), space.rows()));
  }
  throw DomainError("unknown space kind");
}

StructuredOperator StructuredOperator::symmetric(const OperatorSpace& space,
                                                 Eigen::MatrixXd payload) {
  const Index expect_rows = space.kind() == SpaceKind::kScalar ? 1 : space.rows();
  const Index expect_cols = space.kind() == SpaceKind::kLeftMatrix ? space.rows() : 1;
  if (payload.rows() != expect_rows || payload.cols() != expect_cols) {
    throw ShapeError("payload shape does not match " + space.describe());
  }
  if (!payload.allFinite()) {
    throw DomainError("payload has non-finite entries");
  }
  if (space.kind() == SpaceKind::kLeftMatrix) {
    if (relative_asymmetry(payload) > kSymmetryTol) {
      throw DomainError("left payload must be symmetric");
    }
    payload = symmetrized(payload);
  }
  return StructuredOperator(space, std::move(payload));
}

StructuredOperator StructuredOperator::semidefinite(const OperatorSpace& space,
                                                    Eigen::MatrixXd payload) {
  StructuredOperator op = symmetric(space, std::move(payload));
  const double scale = std::max(1.0, std::abs(op.max_payload_eigenvalue()));
  if (op.min_payload_eigenvalue() < -1e-12 * scale) {
    throw DomainError("payload must be positive semidefinite");
  }
  return op;
}

double StructuredOperator::min_payload_eigenvalue() const {
  if (space_.kind() == SpaceKind::kLeftMatrix) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(payload_, Eigen::EigenvaluesOnly)
        .eigenvalues()
        .minCoeff();
  }
  return payload_.minCoeff();
}

double StructuredOperator::max_payload_eigenvalue() const {
  if (space_.kind() == SpaceKind::kLeftMatrix) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(payload_, Eigen::EigenvaluesOnly)
        .eigenvalues()
        .maxCoeff();
  }
  return payload_.maxCoeff();
}

bool StructuredOperator::is_positive_definite() const { return min_payload_eigenvalue() > 0.0; }

Point StructuredOperator::apply(const Point& x) const {
  space_.require(x, "StructuredOperator::apply");
  Point y = x;
  switch (space_.kind()) {
    case SpaceKind::kScalar:
      y.values() *= payload_(0, 0);
      break;
    case SpaceKind::kDiagonal:
      y.values() = payload_.cwiseProduct(x.values());
      break;
    case SpaceKind::kLeftMatrix:
      y.values() = payload_ * x.values();
      break;
  }
  return y;
}

StructuredOperator StructuredOperator::inverse() const {
  if (!is_positive_definite()) {
    throw DomainError("cannot invert a singular payload");
  }
  if (space_.kind() == SpaceKind::kLeftMatrix) {
    return {space_, spectral_map(payload_, [](double v) { return 1.0 / v; })};
  }
  return {space_, payload_.cwiseInverse()};
}

StructuredOperator StructuredOperator::sqrt() const {
  if (space_.kind() == SpaceKind::kLeftMatrix) {
    // Eigenvalues at rounding level are zeros of a singular payload; their
    // square roots would otherwise be of order 1e-8.
    const double floor = 1e-14 * std::max(max_payload_eigenvalue(), 0.0);
    return {space_, spectral_map(payload_, [floor](double v) {
              return v <= floor ? 0.0 : std::sqrt(v);
            })};
  }
  return {space_, payload_.cwiseMax(0.0).cwiseSqrt()};
}

StructuredOperator StructuredOperator::sandwich(const StructuredOperator& middle) const {
  if (!(middle.space_ == space_)) {
    throw ShapeError("sandwich: operators from different spaces");
  }
  if (space_.kind() == SpaceKind::kLeftMatrix) {
    return {space_, symmetrized(payload_ * middle.payload_ * payload_)};
  }
  return {space_, payload_.cwiseProduct(middle.payload_).cwiseProduct(payload_)};
}

double StructuredOperator::trace_norm() const {
  switch (space_.kind()) {
    case SpaceKind::kScalar:
      return payload_(0, 0) * static_cast<double>(space_.rows());
    case SpaceKind::kDiagonal:
      return payload_.sum();
    case SpaceKind::kLeftMatrix:
      return static_cast<double>(space_.cols()) * payload_.trace();
  }
  return 0.0;
}

Eigen::MatrixXd StructuredOperator::dense() const {
  const Index dim = space_.dim();
  switch (space_.kind()) {
    case SpaceKind::kScalar:
      return payload_(0, 0) * Eigen::MatrixXd::Identity(dim, dim);
    case SpaceKind::kDiagonal:
      return Eigen::VectorXd(payload_.col(0)).asDiagonal();
    case SpaceKind::kLeftMatrix: {
      // vec(B X) = (I_n kron B) vec(X) for column-major vec.
      const Index m = space_.rows();
      Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
      for (Index j = 0; j < space_.cols(); ++j) {
        out.block(j * m, j * m, m, m) = payload_;
      }
      return out;
    }
  }
  return {};
}

StructuredOperator StructuredOperator::operator+(const StructuredOperator& other) const {
  if (!(other.space_ == space_)) {
    throw ShapeError("operator+: operators from different spaces");
  }
  return {space_, payload_ + other.payload_};
}

StructuredOperator StructuredOperator::scaled(double factor) const {
  return {space_, factor * payload_};
}

// Projections and norms ---------------------------------------------------------

StructuredOperator project_rank1(const OperatorSpace& space, const Point& x) {
  space.require(x, "project_rank1");
  switch (space.kind()) {
    case SpaceKind::kScalar:
      return StructuredOperator::semidefinite(
          space, Eigen::MatrixXd::Constant(1, 1,
                                           x.values().squaredNorm() /
                                               static_cast<double>(space.rows())));
    case SpaceKind::kDiagonal:
      return StructuredOperator::semidefinite(space, x.values().cwiseAbs2());
    case SpaceKind::kLeftMatrix:
      return StructuredOperator::semidefinite(
          space, symmetrized(x.values() * x.values().transpose()) /
                     static_cast<double>(space.cols()));
  }
  throw DomainError("unknown space kind");
}

StructuredOperator project_general(const OperatorSpace& space, const Eigen::MatrixXd& dense) {
  const Index dim = space.dim();
  if (dense.rows() != dim || dense.cols() != dim) {
    throw ShapeError("project_general: operator is not " + std::to_string(dim) + "x" +
                     std::to_string(dim) + " for " + space.describe());
  }
  if (space.kind() == SpaceKind::kLeftMatrix && dim > kMaxDenseLeftMatrixDim) {
    throw DomainError("project_general: left-matrix spaces limited to m*n <= 64");
  }
  if (!dense.allFinite() || relative_asymmetry(dense) > kSymmetryTol) {
    throw DomainError("project_general: operator must be finite and symmetric");
  }
  // Payloads are built directly: projections of indefinite operators are
  // allowed here.
  Eigen::MatrixXd payload;
  switch (space.kind()) {
    case SpaceKind::kScalar:
      payload = Eigen::MatrixXd::Constant(1, 1, dense.trace() / static_cast<double>(dim));
      break;
    case SpaceKind::kDiagonal:
      payload = dense.diagonal();
      break;
    case SpaceKind::kLeftMatrix: {
      const Index m = space.rows();
      payload = Eigen::MatrixXd::Zero(m, m);
      for (Index j = 0; j < space.cols(); ++j) {
        payload += dense.block(j * m, j * m, m, m);
      }
      payload = symmetrized(payload) / static_cast<double>(space.cols());
      break;
    }
  }
  return StructuredOperator::symmetric(space, std::move(payload));
}

double norm_R(const OperatorSpace& space, const Point& x) {
  space.require(x, "norm_R");
  switch (space.kind()) {
    case SpaceKind::kScalar:
      return x.values().norm() / std::sqrt(static_cast<double>(space.rows()));
    case SpaceKind::kDiagonal:
      return x.values().cwiseAbs().maxCoeff();
    case SpaceKind::kLeftMatrix:
      return largest_singular_value(x.values()) /
             std::sqrt(static_cast<double>(space.cols()));
  }
  return 0.0;
}

double norm_R_star(const OperatorSpace& space, const Point& x) {
  space.require(x, "norm_R_star");
  switch (space.kind()) {
    case SpaceKind::kScalar:
      return std::sqrt(static_cast<double>(space.rows())) * x.values().norm();
    case SpaceKind::kDiagonal:
      return x.values().cwiseAbs().sum();
    case SpaceKind::kLeftMatrix:
      return std::sqrt(static_cast<double>(space.cols())) * singular_values(x.values()).sum();
  }
  return 0.0;
}

Point lmo(const OperatorSpace& space, const Point& g) {
  space.require(g, "lmo");
  Point u = Point::zeros_like(g);
  switch (space.kind()) {
    case SpaceKind::kScalar: {
      const double norm = g.values().norm();
      if (norm > 0.0) {
        u.values() = (std::sqrt(static_cast<double>(space.rows())) / norm) * g.values();
      }
      break;
    }
    case SpaceKind::kDiagonal:
      u.values() = g.values().unaryExpr([](double v) {
        return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
      });
      break;
    case SpaceKind::kLeftMatrix: {
      // sqrt(n) (G G^T)^{+/2} G = sqrt(n) U_r V_r^T over the numerically
      // nonzero singular values.
      Eigen::BDCSVD<Eigen::MatrixXd> svd(g.values(), Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Eigen::VectorXd& s = svd.singularValues();
      if (s.size() == 0 || s(0) <= 0.0) {
        break;
      }
      Index rank = 0;
      while (rank < s.size() && s(rank) > kSingularValueCutoff * s(0)) {
        ++rank;
      }
      u.values() = std::sqrt(static_cast<double>(space.cols())) * svd.matrixU().leftCols(rank) *
                   svd.matrixV().leftCols(rank).transpose();
      break;
    }
  }
  return u;
}

double weighted_sqnorm(const StructuredOperator& h, const Point& x, bool inverse) {
  const OperatorSpace& space = h.space();
  space.require(x, "weighted_sqnorm");
  if (inverse && !h.is_positive_definite()) {
    throw DomainError("weighted_sqnorm: singular payload cannot be inverted");
  }
  const Eigen::MatrixXd& p = h.payload();
  switch (space.kind()) {
    case SpaceKind::kScalar:
      return inverse ? x.values().squaredNorm() / p(0, 0) : x.values().squaredNorm() * p(0, 0);
    case SpaceKind::kDiagonal:
      return inverse ? x.values().cwiseAbs2().cwiseQuotient(p).sum()
                     : x.values().cwiseAbs2().cwiseProduct(p).sum();
    case SpaceKind::kLeftMatrix: {
      if (!inverse) {
        return x.values().cwiseProduct(p * x.values()).sum();
      }
      Eigen::LLT<Eigen::MatrixXd> llt(p);
      const Eigen::MatrixXd w = llt.matrixL().solve(x.values());
      return w.squaredNorm();
    }
  }
  return 0.0;
}

double trace_norm(const StructuredOperator& h) { return h.trace_norm(); }

StructuredOperator combine_B(const StructuredOperator& l, const StructuredOperator& m,
                             const StructuredOperator& sigma, const StructuredOperator& t) {
  const OperatorSpace& space = l.space();
  if (!(m.space() == space) || !(sigma.space() == space) || !(t.space() == space)) {
    throw ShapeError("combine_B: operators come from different spaces");
  }
  StructuredOperator b = l.scaled(0.25 / l.trace_norm()) + m.scaled(0.25 / m.trace_norm()) +
                         sigma.scaled(0.25 / sigma.trace_norm()) +
                         t.scaled(0.25 / t.trace_norm());
  if (!b.is_positive_definite()) {
    throw DomainError("combine_B: inputs must be positive definite");
  }
  return b;
}

}  // namespace nesgd
