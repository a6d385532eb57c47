#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "json.hpp"
#include "stackbandit/rng.h"

namespace stackbandit {

// Linear contextual bandit over a finite per-round action set. recommend()
// returns an index into `actions`, so the chosen vector is always one of the
// supplied elements. Calls alternate recommend / observe_utility.
class LinearBandit {
 public:
  virtual ~LinearBandit() = default;
  virtual std::size_t recommend(std::span<const Eigen::VectorXd> actions) = 0;
  virtual void observe_utility(const Eigen::VectorXd& chosen, double utility) = 0;
  virtual std::string name() const = 0;
  // Per-round diagnostic state for verbose logs.
  virtual nlohmann::json snapshot() const { return nlohmann::json::object(); }
};

// Adversarial linear bandit with losses, consumed by ScaledAdversarialBandit.
// Actions passed in always lie in the Euclidean unit ball.
class LinearLossMinimizer {
 public:
  virtual ~LinearLossMinimizer() = default;
  virtual std::size_t recommend(std::span<const Eigen::VectorXd> actions) = 0;
  virtual void observe_loss(const Eigen::VectorXd& chosen, double loss) = 0;
  virtual std::string name() const = 0;
};

struct OfulConfig {
  double lambda = 1.0;        // ridge parameter
  double noise_scale = 4.0;   // sub-Gaussian scale R
  double confidence = 0.1;    // delta of the confidence ellipsoid
  double theta_bound = 1.0;   // S >= ||theta*||_2
};

// OFUL: ridge estimate plus a self-normalized confidence ellipsoid, playing
// argmax_v <v, theta_hat> + beta_t ||v||_{V^{-1}} (ties to list order), with
//   beta_t = R sqrt(2 log(1/delta) + n log(1 + t / (lambda n))) + sqrt(lambda) S.
class Oful final : public LinearBandit {
 public:
  Oful(int dim, OfulConfig config = {});

  std::size_t recommend(std::span<const Eigen::VectorXd> actions) override;
  void observe_utility(const Eigen::VectorXd& chosen, double utility) override;
  std::string name() const override { return "oful"; }
  nlohmann::json snapshot() const override;

  int dim() const { return dim_; }
  int rounds() const { return rounds_; }
  double beta() const;
  const Eigen::VectorXd& theta_hat() const { return theta_hat_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::VectorXd& response() const { return response_; }
  double min_eigenvalue() const;
  // ||theta - theta_hat||_V <= beta_t.
  bool confidence_contains(const Eigen::VectorXd& theta) const;

 private:
  void refresh_inverse();

  int dim_;
  OfulConfig config_;
  int rounds_ = 0;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd gram_inv_;
  Eigen::VectorXd response_;
  Eigen::VectorXd theta_hat_;
};

// Fallback adversarial engine: with probability min(1, t^{-1/3}) play
// uniformly over the action set, otherwise greedily minimize the ridge
// estimate of the loss vector. It does not carry the regret guarantee of the
// log-determinant FTRL engine the wrapper is designed around.
class ForcedExplorationLoss final : public LinearLossMinimizer {
 public:
  ForcedExplorationLoss(int dim, std::uint64_t seed, double ridge = 1.0);

  std::size_t recommend(std::span<const Eigen::VectorXd> actions) override;
  void observe_loss(const Eigen::VectorXd& chosen, double loss) override;
  std::string name() const override { return "forced-exploration"; }

  const Eigen::VectorXd& loss_estimate() const { return estimate_; }

 private:
  int dim_;
  Rng rng_;
  int rounds_ = 0;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd response_;
  Eigen::VectorXd estimate_;
};

// Maps a utility bandit over [-1, 1]^n onto a loss minimizer over the unit
// ball: actions are divided by sqrt(n) and utilities become losses -u/sqrt(n).
class ScaledAdversarialBandit final : public LinearBandit {
 public:
  ScaledAdversarialBandit(int dim, std::unique_ptr<LinearLossMinimizer> inner);

  std::size_t recommend(std::span<const Eigen::VectorXd> actions) override;
  void observe_utility(const Eigen::VectorXd& chosen, double utility) override;
  std::string name() const override { return "scaled-" + inner_->name(); }

  double scale() const { return sqrt_dim_; }
  const LinearLossMinimizer& inner() const { return *inner_; }

 private:
  int dim_;
  double sqrt_dim_;
  std::unique_ptr<LinearLossMinimizer> inner_;
};

}  // namespace stackbandit
