#include "stackbandit/rng.h"

#include <cmath>
#include <stdexcept>

namespace stackbandit {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ (0x5851f42d4c957f2dULL * (stream + 1)));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Rng::index: empty range");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return static_cast<std::size_t>(r % n);
}

double Rng::exponential() {
  // 1 - U lies in (0, 1], so the log is finite.
  return -std::log(1.0 - uniform());
}

double Rng::normal() {
  // Box-Muller, one output per call.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::gamma(double shape) {
  if (shape <= 0.0) throw std::invalid_argument("Rng::gamma: shape must be positive");
  if (shape == 1.0) return exponential();
  if (shape < 1.0) {
    // Boost to shape + 1 and rescale.
    const double g = gamma(shape + 1.0);
    return g * std::pow(1.0 - uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = 1.0 - uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

Eigen::VectorXd Rng::dirichlet(int k, double alpha) {
  if (k < 1) throw std::invalid_argument("Rng::dirichlet: k must be positive");
  Eigen::VectorXd g(k);
  for (int i = 0; i < k; ++i) g[i] = alpha == 1.0 ? exponential() : gamma(alpha);
  return g / g.sum();
}

std::size_t Rng::categorical(const Eigen::VectorXd& probs) {
  const double u = uniform() * probs.sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<std::size_t>(i);
  }
  // Rounding can leave u == sum; fall back to the last positive entry.
  for (Eigen::Index i = probs.size() - 1; i >= 0; --i) {
    if (probs[i] > 0.0) return static_cast<std::size_t>(i);
  }
  throw std::invalid_argument("Rng::categorical: no positive mass");
}

}  // namespace stackbandit
