#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace uis {

/// Seeded pseudo-random stream. Identical seed and identical call sequence
/// give identical draws on a given platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  double normal();
  double uniform();  // [0, 1)
  std::uint64_t next_u64() { return engine_(); }
  Eigen::VectorXd normal_vector(Eigen::Index n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace uis
