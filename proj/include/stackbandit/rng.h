#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace stackbandit {

// Seed derivation for independent streams (game, contexts, followers, ...).
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Thin wrapper around mt19937_64. All draws are built from raw 64-bit
// outputs so sequences do not depend on the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  double exponential();
  // Dirichlet via normalized Gamma draws (exponentials when alpha == 1).
  Eigen::VectorXd dirichlet(int k, double alpha = 1.0);
  double gamma(double shape);
  double normal();
  std::size_t categorical(const Eigen::VectorXd& probs);

 private:
  std::mt19937_64 engine_;
};

}  // namespace stackbandit
