#include "cblab/regrl.hpp"

#include "cblab/complexity.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>

namespace cblab {

std::vector<double> beta_schedule(int horizon, int n_states, int n_actions, double log_f_max, int iterations,
                                  double delta, const std::function<double(int, double)>& theta) {
  if (horizon < 1 || iterations < 1) throw Error("need H >= 1 and K >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw Error("delta must lie in (0, 1)");
  const double H = horizon, K = iterations, A = n_actions, S = n_states;
  const double e = std::numbers::e;
  const double log_hk = std::log(H * K * e);
  std::vector<double> b2(static_cast<std::size_t>(horizon));
  b2.back() = 400.0 * H * H * (log_f_max + std::log(H * K / delta));
  for (int h = horizon - 2; h >= 0; --h) {
    const double th = theta(h + 1, std::sqrt(b2[h + 1]) / std::sqrt(K));
    b2[h] = 0.5 * b2[h + 1] + std::pow(60.0, 4) * H * H * A * A * th * th * log_hk * log_hk *
                                  (std::log(2.0) + log_f_max + std::log(H * K / delta)) +
            700.0 * H * H * S * std::log(2.0 * e * K);
  }
  std::vector<double> out;
  for (double v : b2) {
    if (!(v > 0.0)) throw Error("confidence radius is not positive");
    out.push_back(std::sqrt(v));
  }
  return out;
}

std::vector<double> beta_schedule(int horizon, int n_states, int n_actions, double log_f_max, int iterations,
                                  double delta, const std::vector<double>& theta) {
  if (static_cast<int>(theta.size()) != horizon) throw Error("need one theta per layer");
  return beta_schedule(horizon, n_states, n_actions, log_f_max, iterations, delta,
                       [&](int h, double) { return theta[static_cast<std::size_t>(h)]; });
}

Fit lsvi_fit(const RegressionOracle& oracle, const std::vector<Transition>& data, const Eigen::VectorXd* vbar_next,
             int horizon) {
  RegressionData d(oracle.n_contexts(), oracle.n_actions());
  for (const auto& t : data) {
    double y = t.reward;
    if (vbar_next && t.next >= 0) y += (*vbar_next)(t.next);
    if (!(std::abs(y) <= 2.0 * horizon)) throw TargetOutOfRange("regression target outside [-2H, 2H]");
    d.add(t.x, t.a, y);
  }
  return oracle.fit(d);
}

double star_ucb(const RegressionOracle& oracle, Context x, Action a, const Fit& center, const RegressionData& z,
                double beta, double alpha) {
  if (!(beta > 0.0)) throw Error("beta must be positive");
  if (const auto* lin = std::get_if<LinearFunctionClass>(&oracle.function_class()); lin && lin->unconstrained()) {
    // Directions the data never constrains leave the ball unbounded.
    const Eigen::MatrixXd& phi = lin->features();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(phi.cols(), phi.cols());
    for (Eigen::Index r = 0; r < phi.rows(); ++r) {
      const double w = z.counts(r / oracle.n_actions(), r % oracle.n_actions());
      if (w > 0.0) gram.noalias() += w * phi.row(r).transpose() * phi.row(r);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const Eigen::VectorXd v = lin->feature(x, a);
    const double top = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    Eigen::VectorXd off = v;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()(i) > 1e-10 * top) off -= es.eigenvectors().col(i).dot(v) * es.eigenvectors().col(i);
    if (off.norm() > 1e-9 * std::max(1.0, v.norm())) return std::numeric_limits<double>::infinity();
  }
  return oracle.ball_upper_bound(x, a, center, z, beta, true, alpha);
}

namespace {

double layer_theta(const BlockMDPInstance& m, const FunctionClass& cls, int h, double eps) {
  double total = 0.0;
  const auto& em = m.emission[static_cast<std::size_t>(h)];
  for (Eigen::Index s = 0; s < em.rows(); ++s) {
    const Eigen::VectorXd psi = em.row(s).transpose();
    if (const auto* lin = std::get_if<LinearFunctionClass>(&cls); lin && lin->unconstrained()) {
      total += rl_disagreement_linear(lin->features(), m.n_actions, psi);
    } else {
      std::vector<Table> fs;
      if (const auto* f = std::get_if<FiniteFunctionClass>(&cls))
        fs = f->functions();
      else if (const auto* l = std::get_if<LinearFunctionClass>(&cls))
        fs = l->materialize().functions();
      else
        fs = std::get<ProductFunctionClass>(cls).materialize().functions();
      total += rl_disagreement(fs, psi, std::max(eps, 1e-12));
    }
  }
  return total;
}

double default_log_f_max(const std::vector<FunctionClass>& classes, int iterations) {
  double out = 0.0;
  for (const auto& c : classes) out = std::max(out, log_class_size(c, iterations));
  return out;
}

}  // namespace

RegRL::RegRL(std::shared_ptr<const BlockMDPInstance> mdp, RLConfig config, std::vector<FunctionClass> classes)
    : mdp_(std::move(mdp)), config_(std::move(config)) {
  validate(*mdp_);
  const int H = mdp_->horizon;
  if (config_.iterations < 1) throw Error("K must be at least 1");
  if (!(config_.alpha > 0.0)) throw Error("alpha must be positive");
  if (classes.empty())
    for (int h = 0; h < H; ++h) classes.emplace_back(tabular_class(*mdp_, h));
  if (static_cast<int>(classes.size()) != H) throw Error("need one function class per layer");
  for (int h = 0; h < H; ++h) {
    if (n_contexts(classes[h]) != mdp_->n_obs[h] || n_actions(classes[h]) != mdp_->n_actions)
      throw Error("layer class does not match the observation space");
  }
  log_f_max_ = config_.log_f_max ? *config_.log_f_max : default_log_f_max(classes, config_.iterations);

  if (config_.beta_source == BetaSource::Fixed) {
    if (config_.beta.size() == 1) config_.beta.assign(static_cast<std::size_t>(H), config_.beta[0]);
    if (static_cast<int>(config_.beta.size()) != H) throw Error("fixed beta needs one value per layer");
    beta_ = config_.beta;
    for (double b : beta_)
      if (!(b > 0.0)) throw Error("beta must be positive");
  } else {
    const double delta = config_.delta ? *config_.delta : 1.0 / (static_cast<double>(config_.iterations) * H);
    int S = 0;
    for (int s : mdp_->n_states) S = std::max(S, s);
    theta_.assign(static_cast<std::size_t>(H), 0.0);
    beta_ = beta_schedule(H, S, mdp_->n_actions, log_f_max_, config_.iterations, delta, [&](int h, double eps) {
      theta_[static_cast<std::size_t>(h)] = layer_theta(*mdp_, classes[static_cast<std::size_t>(h)], h, eps);
      return theta_[static_cast<std::size_t>(h)];
    });
  }
  for (auto& c : classes) oracles_.push_back(std::make_shared<const RegressionOracle>(std::move(c)));
  data_.resize(static_cast<std::size_t>(H));
}

Plan RegRL::plan() const {
  const int H = mdp_->horizon, A = mdp_->n_actions;
  Plan p;
  p.fits.resize(static_cast<std::size_t>(H));
  p.qbar.resize(static_cast<std::size_t>(H));
  p.vbar.resize(static_cast<std::size_t>(H));
  p.policy.resize(static_cast<std::size_t>(H));
  for (int h = H - 1; h >= 0; --h) {
    const auto hs = static_cast<std::size_t>(h);
    const auto& oracle = *oracles_[hs];
    const Eigen::VectorXd* next = h + 1 < H ? &p.vbar[hs + 1] : nullptr;
    p.fits[hs] = lsvi_fit(oracle, data_[hs], next, H);

    RegressionData z(oracle.n_contexts(), A);
    for (const auto& t : data_[hs]) z.counts(t.x, t.a) += 1.0;
    const int X = mdp_->n_obs[hs];
    Table q(X, A);
    for (int x = 0; x < X; ++x)
      for (int a = 0; a < A; ++a) q(x, a) = star_ucb(oracle, x, a, p.fits[hs], z, beta_[hs], config_.alpha);
    p.policy[hs] = induced_policy(q);
    p.vbar[hs] = q.rowwise().maxCoeff().cwiseMax(0.0).cwiseMin(static_cast<double>(H));
    p.qbar[hs] = std::move(q);
  }
  return p;
}

void RegRL::gather(const std::vector<Policy>& policy, Rng& env, Rng& alg) {
  const BlockMDPInstance& m = *mdp_;
  const int H = m.horizon;
  auto unif = [&] { return static_cast<Action>(alg.uniform_int(static_cast<std::uint64_t>(m.n_actions))); };
  for (int h = 0; h < H; ++h) {
    int s = env.categorical(m.initial);
    int x = env.categorical(m.emission[0].row(s).transpose());
    for (int l = 0; l < H; ++l) {
      const auto ls = static_cast<std::size_t>(l);
      const Action a = l < h ? policy[ls](x) : unif();
      const double r = env.bernoulli(m.reward[ls](s, a)) ? 1.0 : 0.0;
      int next_x = -1;
      if (l + 1 < H) {
        s = env.categorical(m.transition[ls][static_cast<std::size_t>(a)].row(s).transpose());
        next_x = env.categorical(m.emission[ls + 1].row(s).transpose());
      }
      if (l == h) data_[ls].push_back({x, a, r, next_x});
      x = next_x;
    }
  }
}

RLRun run_regrl(std::shared_ptr<const BlockMDPInstance> mdp, const RLConfig& config, std::uint64_t seed,
                std::vector<FunctionClass> classes) {
  RegRL algo(mdp, config, std::move(classes));
  const int H = mdp->horizon, K = config.iterations;
  const LatentValues lv = latent_value_iteration(*mdp);
  const double v_star = mdp->initial.dot(lv.V[0]);
  std::vector<Table> qstar;
  for (int h = 0; h < H; ++h) qstar.push_back(observation_q(*mdp, lv, h));

  Rng env(seed, "env"), alg(seed, "algorithm"), ret(seed, "return");
  RLRun out;
  out.beta = algo.beta();
  out.beta_source = config.beta_source == BetaSource::Fixed ? "fixed" : "analytic";
  std::vector<std::vector<Policy>> policies;
  for (int k = 1; k <= K; ++k) {
    for (int h = 0; h < H; ++h)
      if (algo.datasets()[static_cast<std::size_t>(h)].size() != static_cast<std::size_t>(k - 1))
        throw InvariantViolation("layer dataset size differs from k - 1");
    Plan p = algo.plan();
    for (int h = 0; h < H; ++h) {
      const auto hs = static_cast<std::size_t>(h);
      // observations with zero emission mass under every state carry Q* = 0 and are skipped
      bool all = true;
      for (Eigen::Index x = 0; x < qstar[hs].rows(); ++x)
        for (Eigen::Index a = 0; a < qstar[hs].cols(); ++a) {
          ++out.queried_points;
          if (p.qbar[hs](x, a) >= qstar[hs](x, a) - config.alpha)
            ++out.optimism_points;
          else
            all = false;
        }
      if (all) ++out.optimism_pairs;
    }
    out.suboptimality.push_back(v_star - policy_value(*mdp, p.policy));
    policies.push_back(p.policy);
    algo.gather(p.policy, env, alg);
  }
  out.returned_k = 1 + static_cast<int>(ret.uniform_int(static_cast<std::uint64_t>(K)));
  out.returned = policies[static_cast<std::size_t>(out.returned_k - 1)];
  out.returned_suboptimality = out.suboptimality[static_cast<std::size_t>(out.returned_k - 1)];
  double sum = 0.0;
  for (double v : out.suboptimality) sum += v;
  out.mean_suboptimality = sum / K;
  return out;
}

}  // namespace cblab
