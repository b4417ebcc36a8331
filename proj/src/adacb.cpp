#include "cblab/adacb.hpp"

#include <cmath>

namespace cblab {

int EpochSchedule::epoch_of(long round) const {
  for (int m = 1; m <= M; ++m)
    if (round <= tau[static_cast<std::size_t>(m)]) return m;
  return M;
}

EpochSchedule epoch_schedule(long horizon) {
  if (horizon < 2) throw Error("horizon must be at least 2");
  EpochSchedule s;
  while ((1L << s.M) < horizon) ++s.M;
  s.tau.assign(static_cast<std::size_t>(s.M) + 1, 0);
  s.t.assign(static_cast<std::size_t>(s.M) + 1, 0);
  s.n.assign(static_cast<std::size_t>(s.M) + 1, 0.5);
  for (int m = 1; m <= s.M; ++m) {
    const auto i = static_cast<std::size_t>(m);
    s.tau[i] = 1L << m;
    const long sum = s.tau[i] + s.tau[i - 1];
    if (sum % 2 != 0) throw InvariantViolation("epoch midpoint is not integral");
    s.t[i] = sum / 2;
    s.n[i] = static_cast<double>(s.tau[i] - s.tau[i - 1]);
  }
  return s;
}

Eigen::VectorXd igw_distribution(std::span<const Action> candidates, double gamma,
                                 const Eigen::Ref<const Eigen::RowVectorXd>& predictions) {
  if (candidates.empty()) throw Error("candidate set is empty");
  if (gamma < 0.0) throw Error("learning rate must be nonnegative");
  Action best = candidates.front();
  for (Action a : candidates)
    if (predictions(a) > predictions(best) || (predictions(a) == predictions(best) && a < best)) best = a;
  const double k = static_cast<double>(candidates.size());
  Eigen::VectorXd p = Eigen::VectorXd::Zero(predictions.size());
  double rest = 0.0;
  for (Action a : candidates) {
    if (a == best) continue;
    p(a) = 1.0 / (k + gamma * (predictions(best) - predictions(a)));
    rest += p(a);
  }
  p(best) = 1.0 - rest;
  return p;
}

double scale_factor_policy(double q, double mu, double q_prev, double mu_prev) {
  return (q + mu) / std::sqrt(q_prev + mu_prev);
}

double scale_factor_value(double mean_width, int n_actions, long horizon, double log_class_over_delta,
                          double n_prev) {
  const double threshold = std::sqrt(n_actions * static_cast<double>(horizon) * log_class_over_delta) / n_prev;
  return mean_width >= threshold ? 1.0 : 0.0;
}

AdaCB::AdaCB(std::shared_ptr<const RegressionOracle> oracle, AdaCBConfig config)
    : oracle_(std::move(oracle)), config_(config), schedule_(epoch_schedule(config.horizon)) {
  delta_ = config_.delta_or_default();
  alpha_ = config_.alpha_or_default();
  if (!(delta_ > 0.0 && delta_ <= 1.0)) throw Error("delta must lie in (0, 1]");
  if (!(config_.c > 0.0)) throw Error("c must be positive");
  if (!(alpha_ > 0.0)) throw Error("alpha must be positive");
  if (!(config_.beta_scale > 0.0)) throw Error("beta_scale must be positive");
  const double T = static_cast<double>(config_.horizon);
  log_class_ = log_class_size(oracle_->function_class(), static_cast<int>(config_.horizon));
  log_term_ = std::log(2.0) + log_class_ + 2.0 * std::log(T) - std::log(delta_);
  history_.reserve(static_cast<std::size_t>(config_.horizon));
}

double AdaCB::beta(int m) const {
  return config_.beta_scale * 16.0 * (schedule_.M - m + 1) * log_term_;
}

double AdaCB::mu(int m) const {
  return 64.0 * std::log(4.0 * schedule_.M / delta_) / schedule_.n[static_cast<std::size_t>(m - 1)];
}

void AdaCB::open_epoch(int m) {
  const int nx = oracle_->n_contexts(), na = oracle_->n_actions();
  const auto um = static_cast<std::size_t>(m);
  const auto prefix = [&](long len) {
    return RegressionData::from_history(std::span(history_).first(static_cast<std::size_t>(len)), nx, na);
  };
  EpochLog log;
  log.m = m;
  log.first_round = round_ + 1;
  log.beta = beta(m);
  log.mu = mu(m);

  fhat_ = oracle_->fit(prefix(schedule_.tau[um - 1]));
  space_.emplace(*oracle_, prefix(schedule_.t[um - 1]), log.beta, alpha_);
  memo_.assign(static_cast<std::size_t>(nx), std::nullopt);
  epoch_ = m;

  if (space_->enumerated() && !oracle_->is_product()) log.members = space_->members();
  if (auto star = star_table(oracle_->function_class())) {
    const RegressionData d = prefix(schedule_.t[um - 1]);
    log.contains_star = d.loss(*star) <= space_->center().loss + log.beta + 1e-9 * std::max(1.0, space_->center().loss);
  }

  const double n_prev = schedule_.n[um - 1];
  if (m == 1) {
    log.lambda = config_.option == ExplorationOption::I ? 1.0 : 0.0;
  } else {
    // Split sample: contexts from the second half of the previous epoch.
    const long from = schedule_.t[um - 1], to = schedule_.tau[um - 1];
    log.split_size = static_cast<std::size_t>(to - from);
    double q = 0.0, w = 0.0;
    for (long s = from; s < to; ++s) {
      const Context x = history_[static_cast<std::size_t>(s)].context;
      if (config_.option == ExplorationOption::I)
        q += candidates(x).size() > 1 ? 1.0 : 0.0;
      else
        w += space_->width(x);
    }
    const double k = static_cast<double>(std::max<long>(to - from, 1));
    log.q_hat = q / k;
    log.mean_width = w / k;
    if (config_.option == ExplorationOption::I) {
      const EpochLog& prev = logs_.back();
      log.lambda = scale_factor_policy(log.q_hat, log.mu, prev.q_hat, prev.mu);
    } else {
      log.lambda = scale_factor_value(log.mean_width, na, config_.horizon, log_class_ - std::log(delta_), n_prev);
    }
  }
  log.gamma = log.lambda * config_.c * std::sqrt(na * n_prev / log_term_);
  logs_.push_back(std::move(log));
}

const std::vector<Action>& AdaCB::candidates(Context x) {
  auto& slot = memo_[static_cast<std::size_t>(x)];
  if (!slot) slot = space_->candidate_set(x);
  return *slot;
}

StepResult AdaCB::step(Context x, Rng& rng) {
  if (awaiting_observation_) throw OutOfOrderRound("step() called twice without observe()");
  if (round_ >= config_.horizon) throw OutOfOrderRound("horizon exhausted");
  if (x < 0 || x >= oracle_->n_contexts()) throw Error("context out of range");
  const int m = schedule_.epoch_of(round_ + 1);
  while (epoch_ < m) open_epoch(epoch_ + 1);

  StepResult out;
  out.epoch = epoch_;
  out.candidates = candidates(x);
  out.probs = igw_distribution(out.candidates, logs_.back().gamma, fhat_.values.row(x));
  out.action = rng.categorical(out.probs);
  awaiting_observation_ = true;
  pending_context_ = x;
  return out;
}

void AdaCB::observe(Context x, Action a, double reward) {
  if (!awaiting_observation_ || x != pending_context_) throw OutOfOrderRound("observe() does not match the last step()");
  history_.push_back({x, a, reward});
  ++round_;
  awaiting_observation_ = false;
}

}  // namespace cblab
