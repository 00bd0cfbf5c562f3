#include "nesgd/random.hpp"

namespace nesgd {

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double Rng::normal() {
  ++draws_;
  return normal_(engine_);
}

double Rng::uniform(double lo, double hi) {
  ++draws_;
  return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double Rng::rademacher() {
  ++draws_;
  return (engine_() >> 63) != 0 ? 1.0 : -1.0;
}

std::uint64_t Rng::next_u64() {
  ++draws_;
  return engine_();
}

Eigen::MatrixXd Rng::normal_matrix(Index rows, Index cols) {
  Eigen::MatrixXd z(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      z(i, j) = normal();
    }
  }
  return z;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace nesgd
