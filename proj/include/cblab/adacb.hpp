#pragma once

#include "cblab/oracle.hpp"
#include "cblab/rng.hpp"

#include <memory>
#include <span>

namespace cblab {

class OutOfOrderRound : public Error {
 public:
  using Error::Error;
};

/// Doubling epochs. Index 0 holds tau_0 = t_0 = 0 and n_0 = 1/2; epochs are 1..M.
struct EpochSchedule {
  int M = 0;
  std::vector<long> tau;
  std::vector<long> t;
  std::vector<double> n;

  /// Epoch containing 1-indexed round `round` (tau_{m-1} < round <= tau_m).
  int epoch_of(long round) const;
};

EpochSchedule epoch_schedule(long horizon);

/// Inverse gap weighting over `candidates`; zero mass elsewhere.
Eigen::VectorXd igw_distribution(std::span<const Action> candidates, double gamma,
                                 const Eigen::Ref<const Eigen::RowVectorXd>& predictions);

enum class ExplorationOption { I, II };

struct AdaCBConfig {
  long horizon = 0;
  std::optional<double> delta;  // default 1/T
  double c = 1.0;
  ExplorationOption option = ExplorationOption::I;
  std::optional<double> alpha;  // default 1/T
  /// Multiplies every beta_m. 1 reproduces the analytic radius.
  double beta_scale = 1.0;

  double delta_or_default() const { return delta.value_or(1.0 / static_cast<double>(horizon)); }
  double alpha_or_default() const { return alpha.value_or(1.0 / static_cast<double>(horizon)); }
};

/// Option I: (q_m + mu_m) / sqrt(q_{m-1} + mu_{m-1}).
double scale_factor_policy(double q, double mu, double q_prev, double mu_prev);
/// Option II: 1{mean width >= sqrt(A T log(|F|/delta)) / n_{m-1}}.
double scale_factor_value(double mean_width, int n_actions, long horizon, double log_class_over_delta,
                          double n_prev);

/// Per-epoch parameters, recorded when the epoch opens.
struct EpochLog {
  int m = 0;
  long first_round = 0;
  double beta = 0.0;
  double mu = 0.0;
  double q_hat = 1.0;       // Option I statistic (1 in epoch 1)
  double mean_width = 0.0;  // Option II statistic
  double lambda = 0.0;
  double gamma = 0.0;
  std::size_t split_size = 0;
  std::vector<std::size_t> members;  // enumerated finite classes only
  std::optional<bool> contains_star;
};

struct StepResult {
  Action action = 0;
  Eigen::VectorXd probs;
  std::vector<Action> candidates;
  int epoch = 0;
};

/// Sequential contextual bandit learner: step() then observe(), once per round.
class CBLearner {
 public:
  virtual ~CBLearner() = default;
  virtual StepResult step(Context x, Rng& rng) = 0;
  virtual void observe(Context x, Action a, double reward) = 0;
};

class AdaCB : public CBLearner {
 public:
  AdaCB(std::shared_ptr<const RegressionOracle> oracle, AdaCBConfig config);

  /// Opens a new epoch if needed, then samples a_t from the IGW distribution.
  StepResult step(Context x, Rng& rng) override;
  /// Must follow step() for the same round.
  void observe(Context x, Action a, double reward) override;

  long round() const { return round_; }
  int epoch() const { return epoch_; }
  const EpochSchedule& schedule() const { return schedule_; }
  const std::vector<EpochLog>& epochs() const { return logs_; }
  const History& history() const { return history_; }
  const Fit& estimate() const { return fhat_; }
  double beta(int m) const;
  double mu(int m) const;
  double log_term() const { return log_term_; }

 private:
  void open_epoch(int m);
  const std::vector<Action>& candidates(Context x);

  std::shared_ptr<const RegressionOracle> oracle_;
  AdaCBConfig config_;
  EpochSchedule schedule_;
  double delta_;
  double alpha_;
  double log_class_;
  double log_term_;  // log(2|F|T^2/delta)
  long round_ = 0;
  bool awaiting_observation_ = false;
  Context pending_context_ = 0;
  int epoch_ = 0;
  History history_;
  Fit fhat_;
  std::optional<VersionSpace> space_;
  std::vector<std::optional<std::vector<Action>>> memo_;
  std::vector<EpochLog> logs_;
};

}  // namespace cblab
