#include "nesgd/point.hpp"

#include <sstream>
#include <string>

#include "nesgd/errors.hpp"

namespace nesgd {

Point::Point(Eigen::MatrixXd values, bool matrix) : values_(std::move(values)), matrix_(matrix) {}

Point Point::vector(Eigen::VectorXd values) {
  if (values.size() < 1) {
    throw ShapeError("vector point needs d >= 1");
  }
  if (!values.allFinite()) {
    throw DomainError("point has non-finite entries");
  }
  return Point(Eigen::MatrixXd(std::move(values)), false);
}

Point Point::matrix(Eigen::MatrixXd values) {
  if (values.rows() < 1 || values.cols() < 1) {
    throw ShapeError("matrix point needs m, n >= 1");
  }
  if (!values.allFinite()) {
    throw DomainError("point has non-finite entries");
  }
  return Point(std::move(values), true);
}

Point Point::zeros_vector(Index d) { return vector(Eigen::VectorXd::Zero(d)); }

Point Point::zeros_matrix(Index rows, Index cols) {
  return matrix(Eigen::MatrixXd::Zero(rows, cols));
}

Point Point::zeros_like(const Point& other) {
  return Point(Eigen::MatrixXd::Zero(other.rows(), other.cols()), other.matrix_);
}

bool Point::same_shape(const Point& other) const noexcept {
  return matrix_ == other.matrix_ && rows() == other.rows() && cols() == other.cols();
}

bool Point::all_finite() const { return values_.allFinite(); }

std::string Point::shape_string() const {
  std::ostringstream os;
  if (matrix_) {
    os << "matrix(" << rows() << "x" << cols() << ")";
  } else {
    os << "vector(" << rows() << ")";
  }
  return os.str();
}

Point& Point::operator+=(const Point& other) {
  require_same_shape(*this, other, "operator+=");
  values_ += other.values_;
  return *this;
}

Point& Point::operator-=(const Point& other) {
  require_same_shape(*this, other, "operator-=");
  values_ -= other.values_;
  return *this;
}

Point& Point::operator*=(double scale) noexcept {
  values_ *= scale;
  return *this;
}

Point operator+(Point lhs, const Point& rhs) { return lhs += rhs; }
Point operator-(Point lhs, const Point& rhs) { return lhs -= rhs; }
Point operator*(double scale, Point p) { return p *= scale; }
Point operator*(Point p, double scale) { return p *= scale; }

double dot(const Point& a, const Point& b) {
  require_same_shape(a, b, "dot");
  return a.values().cwiseProduct(b.values()).sum();
}

void require_same_shape(const Point& a, const Point& b, const char* context) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(context) + ": shape mismatch " + a.shape_string() + " vs " +
                     b.shape_string());
  }
}

}  // namespace nesgd
