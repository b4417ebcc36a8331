#include "cblab/baselines.hpp"
#include "cblab/instances.hpp"
#include "testing.hpp"

#include <doctest.h>

using namespace cblab;

TEST_CASE("squarecb schedule and distribution") {
  SquareCBConfig cfg{.gamma0 = 10, .rho = 0.5};
  CHECK(squarecb_gamma(1, cfg) == 10.0);
  CHECK(squarecb_gamma(4, cfg) == 20.0);
  Eigen::RowVectorXd f(2);
  f << 0.8, 0.3;
  auto p = squarecb_distribution(1, f, cfg);
  CHECK(p(1) == doctest::Approx(1.0 / 7));
  Eigen::RowVectorXd flat = Eigen::RowVectorXd::Constant(4, 0.5);
  auto u = squarecb_distribution(9, flat, cfg);
  for (int a = 0; a < 4; ++a) CHECK(u(a) == doctest::Approx(0.25));
}

TEST_CASE("epsilon greedy distribution") {
  Eigen::RowVectorXd f(2);
  f << 0.8, 0.3;
  auto p = epsilon_greedy_distribution(0.1, f);
  CHECK(p(0) == doctest::Approx(0.95));
  CHECK(p(1) == doctest::Approx(0.05));
  auto u = epsilon_greedy_distribution(1.0, f);
  CHECK(u(0) == doctest::Approx(0.5));
  auto g = epsilon_greedy_distribution(0.0, f);
  CHECK(g(0) == 1.0);
}

namespace {

std::shared_ptr<const RegressionOracle> oracle_for(const FunctionClass& cls) {
  return std::make_shared<const RegressionOracle>(cls);
}

}  // namespace

TEST_CASE("ucb with no data is optimistic over the class") {
  Rng rng(1, "t");
  auto cls = testing::random_finite_class(rng, 6, 3, 3);
  UCB ucb(oracle_for(cls), {});
  Rng play(1, "algorithm");
  for (int x = 0; x < 3; ++x) {
    Eigen::RowVectorXd hi = Eigen::RowVectorXd::Zero(3);
    for (const auto& f : cls.functions()) hi = hi.cwiseMax(f.row(x));
    CHECK(ucb.step(x, play).action == greedy_action(hi));
  }
}

TEST_CASE("ucb on a singleton class follows f*") {
  Table f(2, 3);
  f << 0.1, 0.5, 0.2, 0.9, 0.3, 0.4;
  UCB ucb(oracle_for(FiniteFunctionClass({f}, 0)), {});
  Rng play(1, "algorithm");
  CHECK(ucb.step(0, play).action == 1);
  ucb.observe(0, 1, 1.0);
  CHECK(ucb.step(1, play).action == 0);
}

TEST_CASE("ucb matches an enumeration replay") {
  Rng rng(2, "t");
  for (int rep = 0; rep < 20; ++rep) {
    auto cls = testing::random_finite_class(rng, 6, 2, 3);
    const UCBConfig cfg{.c1 = 0.2, .delta = 0.5};
    UCB ucb(oracle_for(cls), cfg);
    const auto script = testing::random_history(rng, cls[0], 5);
    for (const auto& o : script) ucb.observe(o.context, o.action, o.reward);
    // Enumeration: center = least-squares member, ball of squared radius c1 log(|F|/delta).
    std::size_t c = 0;
    for (std::size_t i = 1; i < cls.size(); ++i)
      if (testing::history_loss(cls[i], script) < testing::history_loss(cls[c], script)) c = i;
    const double r2 = cfg.c1 * std::log(6 / cfg.delta);
    for (int x = 0; x < 2; ++x) {
      Eigen::RowVectorXd hi = Eigen::RowVectorXd::Constant(3, -1);
      for (const auto& f : cls.functions()) {
        double d2 = 0;
        for (const auto& o : script) d2 += std::pow(f(o.context, o.action) - cls[c](o.context, o.action), 2);
        if (d2 <= r2) hi = hi.cwiseMax(f.row(x));
      }
      Rng play(3, "algorithm");
      const auto r = ucb.step(x, play);
      CHECK(r.action == greedy_action(hi));
      const auto u = ucb.upper_bounds(x);
      CHECK(u(r.action) >= u.maxCoeff() - 2e-3);
    }
  }
}

TEST_CASE("baseline distributions are valid along a run") {
  auto inst = gen_mab({0.2, 0.5, 0.4});
  std::vector<std::unique_ptr<CBLearner>> learners;
  learners.push_back(std::make_unique<SquareCB>(oracle_for(inst.function_class), SquareCBConfig{}));
  learners.push_back(std::make_unique<EpsilonGreedy>(oracle_for(inst.function_class), 0.1));
  learners.push_back(std::make_unique<EpsilonGreedy>(oracle_for(inst.function_class), 0.0));
  learners.push_back(std::make_unique<UCB>(oracle_for(inst.function_class), UCBConfig{}));
  for (auto& l : learners) {
    Rng rng(4, "algorithm"), env(4, "rewards");
    for (int t = 0; t < 100; ++t) {
      auto r = l->step(0, rng);
      CHECK(std::abs(r.probs.sum() - 1.0) <= 1e-12);
      CHECK(r.probs.minCoeff() >= 0.0);
      l->observe(0, r.action, env.bernoulli(inst.mean(0, r.action)) ? 1.0 : 0.0);
    }
  }
}
