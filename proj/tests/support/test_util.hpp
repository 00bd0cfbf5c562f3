#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "nesgd/geometry.hpp"
#include "nesgd/problems.hpp"
#include "nesgd/random.hpp"

namespace nesgd::testing {

inline Point vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v(i++) = x;
  return Point::vector(v);
}

inline Point mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto m = static_cast<Index>(rows.size());
  const auto n = static_cast<Index>(rows.begin()->size());
  Eigen::MatrixXd a(m, n);
  Index i = 0;
  for (const auto& row : rows) {
    Index j = 0;
    for (double x : row) a(i, j++) = x;
    ++i;
  }
  return Point::matrix(a);
}

// Desk-scale spaces used by the property tests.
inline std::vector<OperatorSpace> small_spaces() {
  return {OperatorSpace::scalar(1),      OperatorSpace::scalar(3),
          OperatorSpace::diagonal(1),    OperatorSpace::diagonal(4),
          OperatorSpace::left_matrix(2, 2), OperatorSpace::left_matrix(2, 3),
          OperatorSpace::left_matrix(3, 2)};
}

// Separable quadratic 1/2 sum a_i (x_i - x_opt_i)^2 with L = M = diag(a),
// Sigma = sigma_level * diag(a) and T = I / d.
inline ProblemSpec diagonal_quadratic(const Eigen::VectorXd& a, const Eigen::VectorXd& x_opt,
                                      double sigma_level, double radius = kInfinity) {
  const auto d = a.size();
  const auto space = OperatorSpace::diagonal(d);
  const auto sigma = StructuredOperator::diagonal(space, sigma_level * a);
  ProblemSpec p{
      .name = "diag-test",
      .space = space,
      .hessian = SymmetricMap::diagonal(a),
      .x_opt = Point::vector(x_opt),
      .noise_factor = saturating_noise_factor(sigma),
      .L = StructuredOperator::diagonal(space, a),
      .sigma = sigma,
      .M = StructuredOperator::diagonal(space, a),
      .T = StructuredOperator::diagonal(space, Eigen::VectorXd::Constant(d, 1.0 / d)),
      .radius = radius,
      .x0 = Point::zeros_vector(d),
  };
  validate(p);
  return p;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("nesgd_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace nesgd::testing
