#pragma once

#include "cblab/adacb.hpp"

namespace cblab {

struct SquareCBConfig {
  double gamma0 = 100.0;
  double rho = 0.5;
};

/// gamma_t = gamma0 * t^rho.
double squarecb_gamma(long t, const SquareCBConfig& config);
/// IGW over all actions with the round-t learning rate.
Eigen::VectorXd squarecb_distribution(long t, const Eigen::Ref<const Eigen::RowVectorXd>& predictions,
                                      const SquareCBConfig& config);
/// (1 - eps) on the greedy action plus eps spread uniformly.
Eigen::VectorXd epsilon_greedy_distribution(double epsilon, const Eigen::Ref<const Eigen::RowVectorXd>& predictions);

/// Shared plumbing: running sufficient statistics and a per-round refit.
class RefitLearner : public CBLearner {
 public:
  explicit RefitLearner(std::shared_ptr<const RegressionOracle> oracle);
  void observe(Context x, Action a, double reward) override;
  long round() const { return round_; }

 protected:
  const Fit& estimate();
  StepResult sample(Eigen::VectorXd probs, Rng& rng);

  std::shared_ptr<const RegressionOracle> oracle_;
  RegressionData data_;
  long round_ = 0;

 private:
  std::optional<Fit> fhat_;
};

class SquareCB : public RefitLearner {
 public:
  SquareCB(std::shared_ptr<const RegressionOracle> oracle, SquareCBConfig config);
  StepResult step(Context x, Rng& rng) override;

 private:
  SquareCBConfig config_;
};

class EpsilonGreedy : public RefitLearner {
 public:
  EpsilonGreedy(std::shared_ptr<const RegressionOracle> oracle, double epsilon);
  StepResult step(Context x, Rng& rng) override;

 private:
  double epsilon_;
};

struct UCBConfig {
  double c1 = 16.0;
  double delta = 0.05;
  double alpha = 1e-3;
  long horizon = 2;  // only enters log|F| for unconstrained linear classes
};

/// Optimism over the ball {f : ||f - fhat||_Z <= sqrt(c1 log(|F|/delta))}.
class UCB : public RefitLearner {
 public:
  UCB(std::shared_ptr<const RegressionOracle> oracle, UCBConfig config);
  StepResult step(Context x, Rng& rng) override;
  double radius() const { return radius_; }
  /// Upper confidence bound of every action at x on the current data.
  Eigen::RowVectorXd upper_bounds(Context x);

 private:
  UCBConfig config_;
  double radius_;
};

}  // namespace cblab
