#include "cblab/baselines.hpp"

#include <cmath>
#include <numeric>

namespace cblab {

double squarecb_gamma(long t, const SquareCBConfig& config) {
  return config.gamma0 * std::pow(static_cast<double>(t), config.rho);
}

Eigen::VectorXd squarecb_distribution(long t, const Eigen::Ref<const Eigen::RowVectorXd>& predictions,
                                      const SquareCBConfig& config) {
  std::vector<Action> all(static_cast<std::size_t>(predictions.size()));
  std::iota(all.begin(), all.end(), 0);
  return igw_distribution(all, squarecb_gamma(t, config), predictions);
}

Eigen::VectorXd epsilon_greedy_distribution(double epsilon, const Eigen::Ref<const Eigen::RowVectorXd>& predictions) {
  const auto k = predictions.size();
  Eigen::VectorXd p = Eigen::VectorXd::Constant(k, epsilon / static_cast<double>(k));
  p(greedy_action(predictions)) += 1.0 - epsilon;
  return p;
}

RefitLearner::RefitLearner(std::shared_ptr<const RegressionOracle> oracle)
    : oracle_(std::move(oracle)), data_(oracle_->n_contexts(), oracle_->n_actions()) {}

void RefitLearner::observe(Context x, Action a, double reward) {
  data_.add(x, a, reward);
  ++round_;
  fhat_.reset();
}

const Fit& RefitLearner::estimate() {
  if (!fhat_) fhat_ = oracle_->fit(data_);
  return *fhat_;
}

StepResult RefitLearner::sample(Eigen::VectorXd probs, Rng& rng) {
  StepResult out;
  out.probs = std::move(probs);
  out.action = rng.categorical(out.probs);
  for (Eigen::Index a = 0; a < out.probs.size(); ++a)
    if (out.probs(a) > 0.0) out.candidates.push_back(static_cast<Action>(a));
  return out;
}

SquareCB::SquareCB(std::shared_ptr<const RegressionOracle> oracle, SquareCBConfig config)
    : RefitLearner(std::move(oracle)), config_(config) {
  if (!(config_.gamma0 > 0.0)) throw Error("gamma0 must be positive");
  if (!(config_.rho > 0.0 && config_.rho <= 1.0)) throw Error("rho must lie in (0, 1]");
}

StepResult SquareCB::step(Context x, Rng& rng) {
  return sample(squarecb_distribution(round_ + 1, estimate().values.row(x), config_), rng);
}

EpsilonGreedy::EpsilonGreedy(std::shared_ptr<const RegressionOracle> oracle, double epsilon)
    : RefitLearner(std::move(oracle)), epsilon_(epsilon) {
  if (!(epsilon_ >= 0.0 && epsilon_ <= 1.0)) throw Error("epsilon must lie in [0, 1]");
}

StepResult EpsilonGreedy::step(Context x, Rng& rng) {
  return sample(epsilon_greedy_distribution(epsilon_, estimate().values.row(x)), rng);
}

UCB::UCB(std::shared_ptr<const RegressionOracle> oracle, UCBConfig config)
    : RefitLearner(std::move(oracle)), config_(config) {
  if (!(config_.c1 > 0.0)) throw Error("c1 must be positive");
  if (!(config_.delta > 0.0 && config_.delta <= 1.0)) throw Error("delta must lie in (0, 1]");
  const double log_f = log_class_size(oracle_->function_class(), static_cast<int>(config_.horizon));
  radius_ = std::sqrt(config_.c1 * std::max(log_f - std::log(config_.delta), 0.0));
}

Eigen::RowVectorXd UCB::upper_bounds(Context x) {
  const Fit& center = estimate();
  Eigen::RowVectorXd u(oracle_->n_actions());
  for (int a = 0; a < oracle_->n_actions(); ++a)
    u(a) = oracle_->ball_upper_bound(x, a, center, data_, radius_, false, config_.alpha);
  return u;
}

StepResult UCB::step(Context x, Rng& rng) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(oracle_->n_actions());
  p(greedy_action(upper_bounds(x))) = 1.0;
  return sample(std::move(p), rng);
}

}  // namespace cblab
