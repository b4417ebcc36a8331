#pragma once

#include "cblab/core.hpp"
#include "cblab/rng.hpp"

#include <cstdint>

namespace cblab {

class InvalidMean : public Error {
 public:
  using Error::Error;
};

class InfeasibleParameters : public Error {
 public:
  using Error::Error;
};

class InfeasibleGap : public Error {
 public:
  using Error::Error;
};

enum class MabClass {
  StarOnly,   // F = {f*}
  Orderings,  // one function per distinct permutation of the means
};

/// Single-context bandit with f* = `means`. The ordering class lists the
/// distinct permutations in lexicographic order of values.
CBInstance gen_mab(const std::vector<double>& means, RewardLaw law = RewardLaw::Bernoulli,
                   MabClass layout = MabClass::Orderings);

/// One block's f* in the lower-bound construction: 0 for mu_0 everywhere,
/// otherwise (l, b) with l in 1..k and action b in 1..A-1.
struct BlockChoice {
  int l = 1;
  int b = 1;
};

/// Lower-bound construction: d blocks of k + 1 contexts, k = floor(theta),
/// full product of per-block function sets. Context id = block * (k + 1) + l.
/// `star` defaults to (l = 1, b = 1) in every block; l = 0 selects mu_0.
CBInstance gen_disagreement_lb(int n_actions, double f_cap, double gap, double epsilon, double theta,
                               std::optional<std::vector<BlockChoice>> star = std::nullopt,
                               RewardLaw law = RewardLaw::Bernoulli);

/// X = [d], A = {0, 1}; f* first, then f_1..f_d.
FiniteFunctionClass gen_star_separation(int d, double gap = 0.5);
FiniteFunctionClass gen_eluder_separation(int d, double gap);

/// Features in [0,1]^d and simplex weights, so every value lies in [0,1]
/// without rescaling (metadata rescale = 1). Weight 0 is f*.
CBInstance gen_linear(int dim, int n_actions, int n_contexts, int weight_count, std::uint64_t seed,
                      RewardLaw law = RewardLaw::Bernoulli);

/// Context source for experiments: i.i.d. draws from D, or a fixed script
/// that cycles when exhausted.
class ContextStream {
 public:
  explicit ContextStream(Eigen::VectorXd dist) : dist_(std::move(dist)) {}
  explicit ContextStream(std::vector<Context> script) : script_(std::move(script)) {
    if (script_.empty()) throw Error("context script is empty");
  }
  Context next(Rng& rng) {
    if (!script_.empty()) return script_[pos_++ % script_.size()];
    return rng.categorical(dist_);
  }

 private:
  Eigen::VectorXd dist_;
  std::vector<Context> script_;
  std::size_t pos_ = 0;
};

/// Layered block MDP. Layers are 0-indexed (h = 0..H-1).
struct BlockMDPInstance {
  int horizon = 0;
  int n_actions = 0;
  std::vector<int> n_states;                      // S_h
  std::vector<int> n_obs;                         // |X_h|
  std::vector<std::vector<int>> decoder;          // observation -> latent state
  std::vector<Eigen::MatrixXd> emission;          // S_h x X_h, rows are psi(s)
  Eigen::VectorXd initial;                        // latent law at layer 0
  std::vector<std::vector<Eigen::MatrixXd>> transition;  // [h][a]: S_h x S_{h+1}, h < H-1
  std::vector<Eigen::MatrixXd> reward;            // S_h x A, Bernoulli means
  std::map<std::string, double> metadata;
};

void validate(const BlockMDPInstance& mdp);

struct LatentValues {
  std::vector<Eigen::MatrixXd> Q;  // S_h x A
  std::vector<Eigen::VectorXd> V;  // S_h
  /// Smallest positive V*(s) - Q*(s, a) over all layers.
  double min_positive_gap = 0.0;
};

LatentValues latent_value_iteration(const BlockMDPInstance& mdp);

/// Q*_h(x, a) over observations (constant on emission blocks).
Table observation_q(const BlockMDPInstance& mdp, const LatentValues& values, int h);

/// Exact value of a deterministic observation-level policy (one Policy per layer).
double policy_value(const BlockMDPInstance& mdp, const std::vector<Policy>& policy);
double optimal_value(const BlockMDPInstance& mdp);

/// Per-layer class: one-hot features of (x, a), weights over all of R^{X_h A}.
LinearFunctionClass tabular_class(const BlockMDPInstance& mdp, int h);

struct BlockMDPOptions {
  bool dense_rewards = false;
  int max_attempts = 10000;
};

BlockMDPInstance gen_block_mdp(std::vector<int> states_per_layer, int n_actions, int horizon,
                               std::vector<int> obs_per_layer, double gap_target, std::uint64_t seed,
                               BlockMDPOptions options = {});

}  // namespace cblab
