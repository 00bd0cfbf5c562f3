#pragma once

#include <cstdint>
#include <random>

#include "nesgd/point.hpp"

namespace nesgd {

/// Seeded random source. Copies carry the full engine state, so a copied Rng
/// replays the same stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  double normal();
  double uniform(double lo, double hi);
  // +1 or -1 with equal probability.
  double rademacher();
  std::uint64_t next_u64();

  // Number of scalar variates produced so far.
  std::uint64_t draws() const noexcept { return draws_; }
  std::uint64_t seed() const noexcept { return seed_; }

  Eigen::MatrixXd normal_matrix(Index rows, Index cols);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uint64_t draws_ = 0;
};

/// Derives an independent sub-seed for stream `stream` (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace nesgd
