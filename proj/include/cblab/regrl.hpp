#pragma once

#include "cblab/instances.hpp"
#include "cblab/oracle.hpp"
#include "cblab/rng.hpp"

#include <functional>
#include <memory>
#include <string>

namespace cblab {

class TargetOutOfRange : public Error {
 public:
  using Error::Error;
};

/// beta_1..beta_H (layer 0 first) from the backward recursion
///   beta_H^2 = 400 H^2 log(F_max H K / delta)
///   beta_h^2 = beta_{h+1}^2 / 2 + 60^4 H^2 A^2 theta_{h+1}^2 log^2(H K e) log(2 F_max H K / delta)
///              + 700 H^2 S log(2 e K).
/// `theta[h]` is the disagreement of layer h; theta[0] is unused.
std::vector<double> beta_schedule(int horizon, int n_states, int n_actions, double log_f_max, int iterations,
                                  double delta, const std::vector<double>& theta);
/// Same recursion with theta_{h+1} evaluated at scale beta_{h+1} / sqrt(K) as the recursion proceeds.
std::vector<double> beta_schedule(int horizon, int n_states, int n_actions, double log_f_max, int iterations,
                                  double delta, const std::function<double(int layer, double eps)>& theta);

enum class BetaSource { Analytic, Fixed };

struct RLConfig {
  int iterations = 100;
  std::optional<double> delta;  // default 1/(K H)
  BetaSource beta_source = BetaSource::Fixed;
  std::vector<double> beta;     // Fixed: one radius per layer, or a single value for all layers
  double alpha = 1e-3;
  /// log F_max for the analytic schedule. Finite classes default to log max |F_h|;
  /// linear classes to dim * log(K).
  std::optional<double> log_f_max;
};

struct Transition {
  Context x;
  Action a;
  double reward;
  Context next;  // -1 at the last layer
};

/// argmin over the class of sum (f(x,a) - (r + vbar_next(x')))^2. Targets must lie in [-2H, 2H].
Fit lsvi_fit(const RegressionOracle& oracle, const std::vector<Transition>& data, const Eigen::VectorXd* vbar_next,
             int horizon);

/// sup f(x,a) over {f in star(F, center) : ||f - center||_Z <= beta}.
double star_ucb(const RegressionOracle& oracle, Context x, Action a, const Fit& center, const RegressionData& z,
                double beta, double alpha);

struct Plan {
  std::vector<Fit> fits;
  std::vector<Table> qbar;             // unclipped optimistic Q per layer
  std::vector<Eigen::VectorXd> vbar;   // max_a qbar, clipped to [0, H]
  std::vector<Policy> policy;          // greedy on qbar, lowest-index ties
};

class RegRL {
 public:
  /// `classes` gives F_h per layer; empty means the tabular class of each layer.
  RegRL(std::shared_ptr<const BlockMDPInstance> mdp, RLConfig config, std::vector<FunctionClass> classes = {});

  const std::vector<double>& beta() const { return beta_; }
  const std::vector<double>& theta() const { return theta_; }
  double log_f_max() const { return log_f_max_; }
  const std::vector<std::vector<Transition>>& datasets() const { return data_; }
  const RegressionOracle& oracle(int h) const { return *oracles_[static_cast<std::size_t>(h)]; }
  const RLConfig& config() const { return config_; }

  /// Backward pass on the current datasets.
  Plan plan() const;
  /// H trajectories: roll in with `policy` for layers < h, then uniform actions; trajectory h feeds layer h.
  void gather(const std::vector<Policy>& policy, Rng& env, Rng& alg);

 private:
  std::shared_ptr<const BlockMDPInstance> mdp_;
  RLConfig config_;
  std::vector<std::shared_ptr<const RegressionOracle>> oracles_;
  std::vector<std::vector<Transition>> data_;
  std::vector<double> beta_;
  std::vector<double> theta_;
  double log_f_max_ = 0.0;
};

struct RLRun {
  std::vector<double> beta;
  std::string beta_source;
  std::vector<double> suboptimality;  // V* - V^{pi^(k)}, exact, per iteration
  int returned_k = 0;                 // 1-based
  std::vector<Policy> returned;
  double returned_suboptimality = 0.0;
  double mean_suboptimality = 0.0;    // expectation over the uniform return draw
  std::size_t optimism_pairs = 0;     // (k, h) pairs with qbar >= Q* - alpha at every (x, a)
  std::size_t optimism_points = 0;
  std::size_t queried_points = 0;
};

/// Full run. Substreams: "env" (simulator), "algorithm" (uniform actions), "return" (k draw).
RLRun run_regrl(std::shared_ptr<const BlockMDPInstance> mdp, const RLConfig& config, std::uint64_t seed,
                std::vector<FunctionClass> classes = {});

}  // namespace cblab
