#include "stackbandit/bandit.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stackbandit {
namespace {

// Sherman-Morrison drift is cleared with a fresh factorization this often.
constexpr int kRefreshEvery = 256;

void check_actions(std::span<const Eigen::VectorXd> actions, int dim, const char* who) {
  if (actions.empty()) throw std::invalid_argument(std::string(who) + ": empty action set");
  for (const auto& v : actions) {
    if (v.size() != dim) throw std::invalid_argument(std::string(who) + ": action has wrong dimension");
    if (!v.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite action");
  }
}

void check_feedback(const Eigen::VectorXd& v, double u, int dim, const char* who) {
  if (v.size() != dim) throw std::invalid_argument(std::string(who) + ": action has wrong dimension");
  if (!v.allFinite() || !std::isfinite(u)) {
    throw std::invalid_argument(std::string(who) + ": non-finite feedback");
  }
}

}  // namespace

Oful::Oful(int dim, OfulConfig config) : dim_(dim), config_(config) {
  if (dim < 1) throw std::invalid_argument("Oful: dimension must be positive");
  if (!(config.lambda > 0.0) || !(config.noise_scale >= 0.0) || !(config.confidence > 0.0) ||
      !(config.confidence < 1.0) || !(config.theta_bound >= 0.0)) {
    throw std::invalid_argument("Oful: invalid configuration");
  }
  gram_ = config.lambda * Eigen::MatrixXd::Identity(dim, dim);
  gram_inv_ = Eigen::MatrixXd::Identity(dim, dim) / config.lambda;
  response_ = Eigen::VectorXd::Zero(dim);
  theta_hat_ = Eigen::VectorXd::Zero(dim);
}

double Oful::beta() const {
  const double n = dim_;
  const double t = rounds_;
  return config_.noise_scale *
             std::sqrt(2.0 * std::log(1.0 / config_.confidence) +
                       n * std::log(1.0 + t / (config_.lambda * n))) +
         std::sqrt(config_.lambda) * config_.theta_bound;
}

std::size_t Oful::recommend(std::span<const Eigen::VectorXd> actions) {
  check_actions(actions, dim_, "Oful::recommend");
  const double b = beta();
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const Eigen::VectorXd& v = actions[i];
    const double width = std::sqrt(std::max(0.0, v.dot(gram_inv_ * v)));
    const double score = v.dot(theta_hat_) + b * width;
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

void Oful::observe_utility(const Eigen::VectorXd& chosen, double utility) {
  check_feedback(chosen, utility, dim_, "Oful::observe_utility");
  ++rounds_;
  gram_.noalias() += chosen * chosen.transpose();
  response_ += utility * chosen;
  if (rounds_ % kRefreshEvery == 0) {
    refresh_inverse();
  } else {
    const Eigen::VectorXd g = gram_inv_ * chosen;
    gram_inv_ -= (g * g.transpose()) / (1.0 + chosen.dot(g));
  }
  theta_hat_ = gram_inv_ * response_;
}

void Oful::refresh_inverse() {
  gram_inv_ = gram_.ldlt().solve(Eigen::MatrixXd::Identity(dim_, dim_));
}

double Oful::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

bool Oful::confidence_contains(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd diff = theta - theta_hat_;
  return std::sqrt(std::max(0.0, diff.dot(gram_ * diff))) <= beta();
}

nlohmann::json Oful::snapshot() const {
  return {{"theta_hat", std::vector<double>(theta_hat_.data(), theta_hat_.data() + dim_)},
          {"gram_diag", std::vector<double>(gram_.diagonal().data(),
                                            gram_.diagonal().data() + dim_)},
          {"beta", beta()}};
}

ForcedExplorationLoss::ForcedExplorationLoss(int dim, std::uint64_t seed, double ridge)
    : dim_(dim), rng_(seed) {
  if (dim < 1) throw std::invalid_argument("ForcedExplorationLoss: dimension must be positive");
  gram_ = ridge * Eigen::MatrixXd::Identity(dim, dim);
  response_ = Eigen::VectorXd::Zero(dim);
  estimate_ = Eigen::VectorXd::Zero(dim);
}

std::size_t ForcedExplorationLoss::recommend(std::span<const Eigen::VectorXd> actions) {
  check_actions(actions, dim_, "ForcedExplorationLoss::recommend");
  const double t = rounds_ + 1;
  const double explore = std::min(1.0, std::pow(t, -1.0 / 3.0));
  // Draw both variates every round so the stream position is independent of
  // the branch taken.
  const double coin = rng_.uniform();
  const std::size_t uniform_pick = rng_.index(actions.size());
  if (coin < explore) return uniform_pick;
  std::size_t best = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const double loss = actions[i].dot(estimate_);
    if (loss < best_loss) {
      best_loss = loss;
      best = i;
    }
  }
  return best;
}

void ForcedExplorationLoss::observe_loss(const Eigen::VectorXd& chosen, double loss) {
  check_feedback(chosen, loss, dim_, "ForcedExplorationLoss::observe_loss");
  ++rounds_;
  gram_.noalias() += chosen * chosen.transpose();
  response_ += loss * chosen;
  estimate_ = gram_.ldlt().solve(response_);
}

ScaledAdversarialBandit::ScaledAdversarialBandit(int dim,
                                                 std::unique_ptr<LinearLossMinimizer> inner)
    : dim_(dim), sqrt_dim_(std::sqrt(static_cast<double>(dim))), inner_(std::move(inner)) {
  if (dim < 1) throw std::invalid_argument("ScaledAdversarialBandit: dimension must be positive");
  if (!inner_) throw std::invalid_argument("ScaledAdversarialBandit: missing inner engine");
}

std::size_t ScaledAdversarialBandit::recommend(std::span<const Eigen::VectorXd> actions) {
  check_actions(actions, dim_, "ScaledAdversarialBandit::recommend");
  std::vector<Eigen::VectorXd> scaled;
  scaled.reserve(actions.size());
  for (const auto& v : actions) {
    if (v.cwiseAbs().maxCoeff() > 1.0 + 1e-9) {
      throw std::invalid_argument("ScaledAdversarialBandit::recommend: entry outside [-1, 1]");
    }
    scaled.push_back(v / sqrt_dim_);
  }
  const std::size_t pick = inner_->recommend(scaled);
  if (pick >= actions.size()) {
    throw std::logic_error("ScaledAdversarialBandit: inner engine returned an invalid index");
  }
  return pick;
}

void ScaledAdversarialBandit::observe_utility(const Eigen::VectorXd& chosen, double utility) {
  check_feedback(chosen, utility, dim_, "ScaledAdversarialBandit::observe_utility");
  if (std::abs(utility) > 1.0 + 1e-9) {
    throw std::invalid_argument("ScaledAdversarialBandit::observe_utility: |u| > 1");
  }
  inner_->observe_loss(chosen / sqrt_dim_, -utility / sqrt_dim_);
}

}  // namespace stackbandit
