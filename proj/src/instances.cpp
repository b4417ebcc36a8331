#include "cblab/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cblab {

CBInstance gen_mab(const std::vector<double>& means, RewardLaw law, MabClass layout) {
  if (means.empty()) throw InvalidMean("bandit needs at least one arm");
  for (double m : means) {
    if (!std::isfinite(m)) throw InvalidMean("arm mean is not finite");
    if (law == RewardLaw::Bernoulli && (m < 0.0 || m > 1.0)) throw InvalidMean("Bernoulli means must lie in [0, 1]");
  }
  const auto k = static_cast<Eigen::Index>(means.size());
  auto as_table = [&](const std::vector<double>& v) {
    Table t(1, k);
    for (Eigen::Index a = 0; a < k; ++a) t(0, a) = v[static_cast<std::size_t>(a)];
    return t;
  };
  std::vector<Table> tables;
  std::size_t star = 0;
  if (layout == MabClass::Orderings) {
    if (means.size() > 8) throw InvalidMean("ordering class limited to 8 arms");
    // Canonical lexicographic order, so f*'s index depends only on the arrangement.
    std::vector<double> perm = means;
    std::sort(perm.begin(), perm.end());
    do {
      if (perm == means) star = tables.size();
      tables.push_back(as_table(perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    tables.push_back(as_table(means));
  }
  CBInstance inst = make_instance(FiniteFunctionClass(std::move(tables), star), Eigen::VectorXd::Ones(1), law);
  inst.metadata["arms"] = static_cast<double>(k);
  return inst;
}

CBInstance gen_disagreement_lb(int n_actions, double f_cap, double gap, double epsilon, double theta,
                               std::optional<std::vector<BlockChoice>> star, RewardLaw law) {
  if (n_actions < 2) throw InfeasibleParameters("need at least two actions");
  if (!(gap > 0.0 && gap < 0.25)) throw InfeasibleParameters("gap must lie in (0, 1/4)");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InfeasibleParameters("epsilon must lie in (0, 1]");
  if (!(theta >= 1.0 && theta <= 1.0 / epsilon + 1e-12)) throw InfeasibleParameters("theta must lie in [1, 1/epsilon]");
  const int k = static_cast<int>(std::floor(theta + 1e-12));
  const double base = std::exp(2.0) * n_actions * k;
  int d = 0;
  while (std::pow(base, d + 1) <= f_cap) ++d;
  if (d < 1) throw InfeasibleParameters("F_cap admits no block (need (e^2 A k) <= F_cap)");

  const int per_block = 1 + k * (n_actions - 1);
  const int width = k + 1;
  const int nx = d * width;
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(per_block);

  Eigen::RowVectorXd mu0 = Eigen::RowVectorXd::Constant(n_actions, 0.5);
  mu0(0) = 0.5 + gap;
  auto mu = [&](int b) {
    Eigen::RowVectorXd v = mu0;
    v(b) = 0.5 + 2.0 * gap;
    return v;
  };

  if (!star) star = std::vector<BlockChoice>(static_cast<std::size_t>(d), BlockChoice{});
  if (star->size() != static_cast<std::size_t>(d)) throw InfeasibleParameters("star choice needs one entry per block");
  auto option_of = [&](const BlockChoice& c) {
    if (c.l == 0) return 0;
    if (c.l < 1 || c.l > k || c.b < 1 || c.b >= n_actions) throw InfeasibleParameters("star choice out of range");
    return 1 + (c.l - 1) * (n_actions - 1) + (c.b - 1);
  };

  std::vector<Table> tables;
  tables.reserve(total);
  std::size_t star_index = 0;
  for (int i = 0; i < d; ++i) star_index = star_index * per_block + static_cast<std::size_t>(option_of((*star)[static_cast<std::size_t>(i)]));
  std::vector<int> option(static_cast<std::size_t>(d));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (int i = d - 1; i >= 0; --i) {
      option[static_cast<std::size_t>(i)] = static_cast<int>(rest % per_block);
      rest /= per_block;
    }
    Table t(nx, n_actions);
    for (int i = 0; i < d; ++i) {
      const int o = option[static_cast<std::size_t>(i)];
      const int l = o == 0 ? 0 : 1 + (o - 1) / (n_actions - 1);
      const int b = o == 0 ? 0 : 1 + (o - 1) % (n_actions - 1);
      for (int j = 0; j < width; ++j) t.row(i * width + j) = (o != 0 && j == l) ? mu(b) : mu0;
    }
    tables.push_back(std::move(t));
  }

  Eigen::VectorXd dist(nx);
  for (int i = 0; i < d; ++i) {
    dist(i * width) = (1.0 - k * epsilon) / d;
    for (int j = 1; j < width; ++j) dist(i * width + j) = epsilon / d;
  }
  CBInstance inst = make_instance(FiniteFunctionClass(std::move(tables), star_index), dist, law);
  inst.metadata["d"] = d;
  inst.metadata["k"] = k;
  inst.metadata["gap"] = gap;
  inst.metadata["epsilon"] = epsilon;
  inst.metadata["theta"] = theta;
  inst.metadata["full_product"] = 1.0;
  return inst;
}

FiniteFunctionClass gen_star_separation(int d, double gap) {
  if (d < 1) throw InfeasibleParameters("d must be at least 1");
  if (!(gap > 0.0 && gap < 2.0 / 3.0)) throw InfeasibleParameters("gap must lie in (0, 2/3)");
  std::vector<Table> fs;
  Table star(d, 2);
  star.col(0).setConstant(gap / 2.0);
  star.col(1).setConstant(gap);
  fs.push_back(star);
  for (int i = 0; i < d; ++i) {
    Table f(d, 2);
    f.col(1).setConstant(gap);
    f.col(0).setZero();
    f(i, 0) = 1.5 * gap;
    fs.push_back(f);
  }
  return FiniteFunctionClass(std::move(fs), 0);
}

FiniteFunctionClass gen_eluder_separation(int d, double gap) {
  if (d < 1) throw InfeasibleParameters("d must be at least 1");
  if (!(gap > 0.0 && gap <= 1.0)) throw InfeasibleParameters("gap must lie in (0, 1]");
  std::vector<Table> fs;
  Table star(d, 2);
  star.col(0).setZero();
  star.col(1).setConstant(gap);
  fs.push_back(star);
  for (int i = 0; i < d; ++i) {
    Table f(d, 2);
    f.col(1).setConstant(gap);
    for (int j = 0; j < d; ++j) f(j, 0) = j < i ? 0.0 : gap;
    fs.push_back(f);
  }
  return FiniteFunctionClass(std::move(fs), 0);
}

CBInstance gen_linear(int dim, int n_actions, int n_contexts, int weight_count, std::uint64_t seed, RewardLaw law) {
  if (dim < 1 || n_actions < 1 || n_contexts < 1 || weight_count < 1) throw InfeasibleParameters("sizes must be positive");
  // Draw order: features (row-major), weights, context distribution.
  Rng rng(seed, "gen_linear");
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(n_contexts) * n_actions, dim);
  for (Eigen::Index r = 0; r < phi.rows(); ++r)
    for (Eigen::Index c = 0; c < dim; ++c) phi(r, c) = rng.uniform();
  Eigen::MatrixXd w(weight_count, dim);
  for (int i = 0; i < weight_count; ++i) w.row(i) = rng.simplex(dim).transpose();
  Eigen::VectorXd dist = rng.simplex(n_contexts);
  Eigen::VectorXd star = w.row(0).transpose();
  CBInstance inst = make_instance(LinearFunctionClass(n_contexts, n_actions, phi, w, star), dist, law);
  inst.metadata["rescale"] = 1.0;
  inst.metadata["dim"] = dim;
  return inst;
}

void validate(const BlockMDPInstance& m) {
  auto require = [](bool c, const char* what) {
    if (!c) throw InvariantViolation(what);
  };
  const auto H = static_cast<std::size_t>(m.horizon);
  require(m.horizon >= 1 && m.n_actions >= 1, "block MDP needs H >= 1 and A >= 1");
  require(m.n_states.size() == H && m.n_obs.size() == H && m.decoder.size() == H && m.emission.size() == H &&
              m.reward.size() == H && m.transition.size() + 1 == H,
          "block MDP layers have inconsistent lengths");
  require(m.initial.size() == m.n_states[0] && std::abs(m.initial.sum() - 1.0) <= 1e-12 && m.initial.minCoeff() >= 0,
          "initial latent law must be a distribution");
  for (std::size_t h = 0; h < H; ++h) {
    const int S = m.n_states[h], X = m.n_obs[h];
    require(X >= S, "each layer needs at least as many observations as states");
    require(m.emission[h].rows() == S && m.emission[h].cols() == X, "emission shape");
    require(static_cast<int>(m.decoder[h].size()) == X, "decoder shape");
    for (int s = 0; s < S; ++s)
      require(std::abs(m.emission[h].row(s).sum() - 1.0) <= 1e-12 && m.emission[h].row(s).minCoeff() >= 0,
              "emission rows must be distributions");
    for (int x = 0; x < X; ++x)
      for (int s = 0; s < S; ++s)
        require(m.emission[h](s, x) == 0.0 || m.decoder[h][static_cast<std::size_t>(x)] == s,
                "emission supports must be disjoint and match the decoder");
    require(m.reward[h].rows() == S && m.reward[h].cols() == m.n_actions, "reward shape");
    require(m.reward[h].minCoeff() >= 0.0 && m.reward[h].maxCoeff() <= 1.0, "rewards must lie in [0, 1]");
    if (h + 1 < H) {
      require(m.transition[h].size() == static_cast<std::size_t>(m.n_actions), "transition per action");
      for (const auto& P : m.transition[h]) {
        require(P.rows() == S && P.cols() == m.n_states[h + 1], "transition shape");
        for (int s = 0; s < S; ++s)
          require(std::abs(P.row(s).sum() - 1.0) <= 1e-12 && P.row(s).minCoeff() >= 0, "transition rows must be distributions");
      }
    }
  }
}

LatentValues latent_value_iteration(const BlockMDPInstance& m) {
  const auto H = static_cast<std::size_t>(m.horizon);
  LatentValues out;
  out.Q.resize(H);
  out.V.resize(H);
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = H; i-- > 0;) {
    Eigen::MatrixXd q = m.reward[i];
    if (i + 1 < H)
      for (int a = 0; a < m.n_actions; ++a) q.col(a) += m.transition[i][static_cast<std::size_t>(a)] * out.V[i + 1];
    out.V[i] = q.rowwise().maxCoeff();
    for (Eigen::Index s = 0; s < q.rows(); ++s)
      for (Eigen::Index a = 0; a < q.cols(); ++a) {
        const double g = out.V[i](s) - q(s, a);
        if (g > 1e-12) gap = std::min(gap, g);
      }
    out.Q[i] = std::move(q);
  }
  out.min_positive_gap = std::isfinite(gap) ? gap : 0.0;
  return out;
}

Table observation_q(const BlockMDPInstance& m, const LatentValues& values, int h) {
  const auto i = static_cast<std::size_t>(h);
  Table q(m.n_obs[i], m.n_actions);
  for (int x = 0; x < m.n_obs[i]; ++x) q.row(x) = values.Q[i].row(m.decoder[i][static_cast<std::size_t>(x)]);
  return q;
}

double policy_value(const BlockMDPInstance& m, const std::vector<Policy>& policy) {
  if (policy.size() != static_cast<std::size_t>(m.horizon)) throw Error("policy needs one table per layer");
  Eigen::VectorXd latent = m.initial;
  double value = 0.0;
  for (std::size_t h = 0; h < static_cast<std::size_t>(m.horizon); ++h) {
    Eigen::VectorXd next = h + 1 < static_cast<std::size_t>(m.horizon) ? Eigen::VectorXd::Zero(m.n_states[h + 1]) : Eigen::VectorXd();
    for (int s = 0; s < m.n_states[h]; ++s) {
      if (latent(s) == 0.0) continue;
      for (int x = 0; x < m.n_obs[h]; ++x) {
        const double w = latent(s) * m.emission[h](s, x);
        if (w == 0.0) continue;
        const Action a = policy[h](x);
        value += w * m.reward[h](s, a);
        if (next.size()) next += w * m.transition[h][static_cast<std::size_t>(a)].row(s).transpose();
      }
    }
    latent = std::move(next);
  }
  return value;
}

double optimal_value(const BlockMDPInstance& m) { return m.initial.dot(latent_value_iteration(m).V[0]); }

LinearFunctionClass tabular_class(const BlockMDPInstance& m, int h) {
  const int X = m.n_obs[static_cast<std::size_t>(h)], A = m.n_actions;
  return LinearFunctionClass(X, A, Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(X) * A, static_cast<Eigen::Index>(X) * A));
}

BlockMDPInstance gen_block_mdp(std::vector<int> states, int n_actions, int horizon, std::vector<int> obs, double gap_target,
                               std::uint64_t seed, BlockMDPOptions options) {
  if (horizon < 1 || n_actions < 1) throw InfeasibleParameters("need H >= 1 and A >= 1");
  if (states.size() == 1) states.assign(static_cast<std::size_t>(horizon), states[0]);
  if (obs.size() == 1) obs.assign(static_cast<std::size_t>(horizon), obs[0]);
  const auto H = static_cast<std::size_t>(horizon);
  if (states.size() != H || obs.size() != H) throw InfeasibleParameters("per-layer sizes need one entry per layer");
  for (std::size_t h = 0; h < H; ++h)
    if (states[h] < 1 || obs[h] < states[h]) throw InfeasibleParameters("need 1 <= S_h <= |X_h|");
  if (!(gap_target > 0.0)) throw InfeasibleParameters("gap target must be positive");

  // Draw order per attempt: emissions (assignment, weights), initial law,
  // transitions (layer, action, state), rewards (layer, state, action).
  Rng rng(seed, "gen_block_mdp");
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    BlockMDPInstance m;
    m.horizon = horizon;
    m.n_actions = n_actions;
    m.n_states = states;
    m.n_obs = obs;
    for (std::size_t h = 0; h < H; ++h) {
      const int S = states[h], X = obs[h];
      std::vector<int> dec(static_cast<std::size_t>(X));
      for (int x = 0; x < X; ++x) dec[static_cast<std::size_t>(x)] = x < S ? x : static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(S)));
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(S, X);
      for (int x = 0; x < X; ++x) {
        double u;
        do u = rng.uniform();
        while (u <= 0.0);
        e(dec[static_cast<std::size_t>(x)], x) = -std::log(u);
      }
      for (int s = 0; s < S; ++s) e.row(s) /= e.row(s).sum();
      m.decoder.push_back(std::move(dec));
      m.emission.push_back(std::move(e));
    }
    m.initial = rng.simplex(states[0]);
    for (std::size_t h = 0; h + 1 < H; ++h) {
      std::vector<Eigen::MatrixXd> per_action;
      for (int a = 0; a < n_actions; ++a) {
        Eigen::MatrixXd P(states[h], states[h + 1]);
        for (int s = 0; s < states[h]; ++s) P.row(s) = rng.simplex(states[h + 1]).transpose();
        per_action.push_back(std::move(P));
      }
      m.transition.push_back(std::move(per_action));
    }
    for (std::size_t h = 0; h < H; ++h) {
      Eigen::MatrixXd r = Eigen::MatrixXd::Zero(states[h], n_actions);
      if (options.dense_rewards || h + 1 == H)
        for (int s = 0; s < states[h]; ++s)
          for (int a = 0; a < n_actions; ++a) r(s, a) = rng.uniform();
      m.reward.push_back(std::move(r));
    }

    const double g = latent_value_iteration(m).min_positive_gap;
    if (g <= 0.0) continue;
    const double scale = gap_target / g;
    bool fits = true;
    for (const auto& r : m.reward)
      if (scale * (r.maxCoeff() - r.minCoeff()) > 1.0) fits = false;
    if (!fits) continue;
    // Per-layer shifts leave every gap unchanged.
    for (auto& r : m.reward) {
      const double lo = r.minCoeff(), range = scale * (r.maxCoeff() - lo);
      r = ((r.array() - lo) * scale + (1.0 - range) / 2.0).matrix();
      if (range == 0.0) r.setZero();
    }
    m.metadata["gap_target"] = gap_target;
    m.metadata["attempts"] = attempt + 1;
    m.metadata["dense_rewards"] = options.dense_rewards ? 1.0 : 0.0;
    validate(m);
    return m;
  }
  throw InfeasibleGap("no sampled MDP admits the requested gap within [0, 1] rewards");
}

}  // namespace cblab
