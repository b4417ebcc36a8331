#include "cblab/regrl.hpp"
#include "testing.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace cblab;

namespace {

std::shared_ptr<const BlockMDPInstance> tiny_mdp(std::uint64_t seed = 1) {
  BlockMDPOptions o;
  o.dense_rewards = true;
  return std::make_shared<const BlockMDPInstance>(gen_block_mdp({2}, 2, 2, {4}, 0.5, seed, o));
}

// sup over f in F, t in [0,1] of c + t (f - c) at (x, a) with t^2 ||f - c||_Z^2 <= beta^2.
double grid_star_ucb(const std::vector<Table>& fs, const Table& c, const Table& counts, int x, int a, double beta) {
  double best = c(x, a);
  for (const auto& f : fs) {
    const double d2 = (counts.array() * (f - c).array().square()).sum();
    for (int i = 0; i <= 10000; ++i) {
      const double t = i * 1e-4;
      if (t * t * d2 <= beta * beta) best = std::max(best, c(x, a) + t * (f(x, a) - c(x, a)));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("beta schedule last layer") {
  auto b = beta_schedule(2, 1, 2, std::log(16.0), 100, 1.0 / 200, std::vector<double>{1.0, 1.0});
  CHECK(b[1] * b[1] == doctest::Approx(1600.0 * std::log(640000.0)));
  CHECK(b[1] * b[1] == doctest::Approx(2.139e4).epsilon(1e-3));
}

TEST_CASE("beta schedule first layer by hand") {
  const double H = 2, A = 2, S = 1, K = 1, delta = 0.5, F = 16;
  const double e = std::numbers::e;
  const double last = 400 * H * H * std::log(F * H * K / delta);
  const double first = last / 2 + 12960000.0 * H * H * A * A * std::pow(std::log(H * K * e), 2) *
                                      std::log(2 * F * H * K / delta) +
                       700 * H * H * S * std::log(2 * e * K);
  auto b = beta_schedule(2, 1, 2, std::log(F), 1, delta, std::vector<double>{1.0, 1.0});
  CHECK(b[0] * b[0] == doctest::Approx(first));
  CHECK(b[1] * b[1] == doctest::Approx(last));
  for (double v : b) CHECK(v > 0.0);
}

TEST_CASE("lsvi fit") {
  SUBCASE("empty data returns the first element") {
    Rng rng(1, "t");
    RegressionOracle o(testing::random_finite_class(rng, 5, 3, 2));
    CHECK(*lsvi_fit(o, {}, nullptr, 2).index == 0);
  }
  SUBCASE("tabular class gives per-pair means") {
    auto mdp = tiny_mdp();
    RegressionOracle o(tabular_class(*mdp, 0));
    Eigen::VectorXd v = Eigen::VectorXd::Zero(4);
    v(2) = 0.5;
    std::vector<Transition> d{{0, 1, 1.0, 2}, {0, 1, 0.0, 3}, {3, 0, 1.0, 2}};
    Fit f = lsvi_fit(o, d, &v, 2);
    CHECK(f.values(0, 1) == doctest::Approx(0.75).epsilon(1e-6));
    CHECK(f.values(3, 0) == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(std::abs(f.values(1, 0)) < 1e-6);
  }
  SUBCASE("horizon one is bandit regression on rewards") {
    Rng rng(2, "t");
    auto cls = testing::random_finite_class(rng, 6, 2, 2);
    RegressionOracle o(cls);
    std::vector<Transition> d{{0, 0, 1.0, -1}, {1, 1, 0.0, -1}, {0, 0, 0.0, -1}};
    Fit f = lsvi_fit(o, d, nullptr, 1);
    std::vector<WeightedExample> ex{{1.0, 0, 0, 1.0}, {1.0, 1, 1, 0.0}, {1.0, 0, 0, 0.0}};
    CHECK(*f.index == *o.erm(ex).index);
  }
  SUBCASE("targets beyond 2H are rejected") {
    Rng rng(3, "t");
    RegressionOracle o(testing::random_finite_class(rng, 3, 2, 2));
    Eigen::VectorXd v = Eigen::VectorXd::Constant(2, 10.0);
    CHECK_THROWS_AS(lsvi_fit(o, {{0, 0, 1.0, 1}}, &v, 2), TargetOutOfRange);
  }
}

TEST_CASE("star ucb") {
  Rng rng(4, "t");
  SUBCASE("empty Z reaches every function") {
    auto cls = testing::random_finite_class(rng, 4, 2, 2);
    RegressionOracle o(cls);
    RegressionData z(2, 2);
    Fit c = o.fit(z);
    for (int x = 0; x < 2; ++x)
      for (int a = 0; a < 2; ++a) {
        double want = c.values(x, a);
        for (const auto& f : cls.functions()) want = std::max(want, f(x, a));
        CHECK(star_ucb(o, x, a, c, z, 0.3, 1e-3) == doctest::Approx(want));
      }
  }
  SUBCASE("singleton class") {
    Table f = Table::Constant(2, 2, 0.3);
    RegressionOracle o(FiniteFunctionClass({f}, 0));
    RegressionData z(2, 2);
    z.add(0, 0, 1.0);
    CHECK(star_ucb(o, 1, 1, o.fit(z), z, 0.5, 1e-3) == doctest::Approx(0.3));
  }
  SUBCASE("three-function class against a t-grid") {
    for (int rep = 0; rep < 30; ++rep) {
      auto cls = testing::random_finite_class(rng, 3, 3, 2);
      RegressionOracle o(cls);
      RegressionData z(3, 2);
      z.add(static_cast<int>(rng.uniform_int(3)), static_cast<int>(rng.uniform_int(2)), rng.uniform());
      z.add(static_cast<int>(rng.uniform_int(3)), static_cast<int>(rng.uniform_int(2)), rng.uniform());
      Fit c = o.fit(z);
      const double beta = 0.05 + rng.uniform() * 0.5;
      for (int x = 0; x < 3; ++x)
        for (int a = 0; a < 2; ++a) {
          const double grid = grid_star_ucb(cls.functions(), c.values, z.counts, x, a, beta);
          CHECK(std::abs(star_ucb(o, x, a, c, z, beta, 1e-4) - grid) <= 1e-4);
        }
    }
  }
  SUBCASE("tabular class matches the closed form") {
    auto mdp = tiny_mdp();
    RegressionOracle o(tabular_class(*mdp, 1));
    std::vector<Transition> d{{0, 0, 1.0, -1}, {0, 0, 0.0, -1}, {0, 0, 1.0, -1}, {2, 1, 1.0, -1}};
    Fit c = lsvi_fit(o, d, nullptr, 2);
    RegressionData z(4, 2);
    for (const auto& t : d) z.counts(t.x, t.a) += 1.0;
    CHECK(star_ucb(o, 0, 0, c, z, 0.6, 1e-4) == doctest::Approx(2.0 / 3 + 0.6 / std::sqrt(3.0)).epsilon(1e-3));
    CHECK(star_ucb(o, 2, 1, c, z, 0.6, 1e-4) == doctest::Approx(1.6).epsilon(1e-3));
    CHECK(std::isinf(star_ucb(o, 1, 0, c, z, 0.6, 1e-4)));
  }
}

TEST_CASE("first iteration is greedy on the empty-data bound") {
  auto mdp = tiny_mdp();
  RLConfig cfg;
  cfg.iterations = 1;
  cfg.beta = {1.0};
  RegRL algo(mdp, cfg);
  Plan p = algo.plan();
  for (const auto& pi : p.policy)
    for (Action a : pi.actions) CHECK(a == 0);
  for (const auto& v : p.vbar) CHECK(v.maxCoeff() == 2.0);
}

TEST_CASE("horizon one reduces to a bandit UCB step") {
  auto mdp = std::make_shared<const BlockMDPInstance>(gen_block_mdp({1}, 3, 1, {2}, 0.2, 5));
  RLConfig cfg;
  cfg.iterations = 40;
  cfg.beta = {0.5};
  RegRL algo(mdp, cfg);
  Rng env(1, "env"), alg(1, "algorithm");
  for (int k = 0; k < 40; ++k) algo.gather(algo.plan().policy, env, alg);
  Plan p = algo.plan();
  Table n = Table::Zero(2, 3), s = Table::Zero(2, 3);
  for (const auto& t : algo.datasets()[0]) n(t.x, t.a) += 1, s(t.x, t.a) += t.reward;
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 3; ++a) {
      if (n(x, a) == 0) {
        CHECK(std::isinf(p.qbar[0](x, a)));
        continue;
      }
      CHECK(p.qbar[0](x, a) == doctest::Approx(s(x, a) / n(x, a) + 0.5 / std::sqrt(n(x, a))).epsilon(1e-3));
    }
}

TEST_CASE("datasets grow by one per layer per iteration") {
  auto mdp = tiny_mdp();
  RLConfig cfg;
  cfg.iterations = 5;
  cfg.beta = {1.0, 1.0};
  RegRL algo(mdp, cfg);
  Rng env(2, "env"), alg(2, "algorithm");
  for (int k = 1; k <= 5; ++k) {
    for (const auto& d : algo.datasets()) CHECK(d.size() == static_cast<std::size_t>(k - 1));
    algo.gather(algo.plan().policy, env, alg);
  }
}

TEST_CASE("runs are deterministic and report consistent fields") {
  auto mdp = tiny_mdp();
  RLConfig cfg;
  cfg.iterations = 60;
  cfg.beta = {1.0};
  auto a = run_regrl(mdp, cfg, 9), b = run_regrl(mdp, cfg, 9);
  CHECK(a.suboptimality == b.suboptimality);
  CHECK(a.returned_k == b.returned_k);
  CHECK(a.returned_k >= 1);
  CHECK(a.returned_k <= 60);
  CHECK(a.returned_suboptimality == a.suboptimality[static_cast<std::size_t>(a.returned_k - 1)]);
  CHECK(a.queried_points == 60u * 2u * 8u);
  for (double v : a.suboptimality) CHECK(v >= -1e-12);
}

TEST_CASE("analytic schedule stays optimistic") {
  auto mdp = tiny_mdp(3);
  RLConfig cfg;
  cfg.iterations = 30;
  cfg.beta_source = BetaSource::Analytic;
  std::size_t good = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto r = run_regrl(mdp, cfg, seed);
    CHECK(r.beta_source == "analytic");
    good += r.optimism_pairs;
    total += 30 * 2;
  }
  CHECK(static_cast<double>(good) >= 0.95 * static_cast<double>(total));
  RegRL algo(mdp, cfg);
  // tabular class over 4 observations and 2 actions: per-state disagreement is |supp psi(s)| * A
  CHECK(algo.theta()[1] == doctest::Approx(8.0));
}

TEST_CASE("fixed beta must match the horizon") {
  auto mdp = tiny_mdp();
  RLConfig cfg;
  cfg.beta = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(RegRL(mdp, cfg), Error);
  cfg.beta = {0.0};
  CHECK_THROWS_AS(RegRL(mdp, cfg), Error);
}
