#include "testing.hpp"

#include <doctest.h>

using namespace cblab;

namespace {

Table row(std::initializer_list<double> v) {
  Table t(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) t(0, i++) = x;
  return t;
}

}  // namespace

TEST_CASE("induced policy picks the unique argmax") { CHECK(induced_policy(row({0.5, 0.9, 0.1}), 0) == 1); }

TEST_CASE("induced policy breaks ties to the lowest index") {
  CHECK(induced_policy(row({0.7, 0.7}), 0) == 0);
  CHECK(induced_policy(row({0.2, 0.7, 0.7}), 0) == 1);
}

TEST_CASE("lower-bound reward vector mu0 prefers action 0") {
  const double d = 0.1;
  CHECK(induced_policy(row({0.5 + d, 0.5, 0.5, 0.5}), 0) == 0);
}

TEST_CASE("uniform gap") {
  CHECK(uniform_gap(row({0.7, 0.5})) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(uniform_gap(row({0.4, 0.4, 0.4})) == 0.0);
  Table t(2, 3);
  t << 0.9, 0.5, 0.1, 0.2, 0.6, 0.55;
  CHECK(uniform_gap(t) == doctest::Approx(0.05));
}

TEST_CASE("policy regret on a bandit") {
  auto inst = make_instance(FiniteFunctionClass({row({0.7, 0.5})}, 0), Eigen::VectorXd::Ones(1));
  CHECK(expected_regret_of_policy(inst, Policy{{0}}) == 0.0);
  CHECK(expected_regret_of_policy(inst, Policy{{1}}) == doctest::Approx(0.2));
  CHECK(policy_value(inst, Policy{{1}}) == doctest::Approx(0.5));
}

TEST_CASE("policy regret matches a Monte-Carlo estimate") {
  Rng rng(7, "test");
  auto cls = testing::random_finite_class(rng, 3, 6, 3);
  auto inst = make_instance(cls, rng.simplex(6));
  Policy pi;
  for (int x = 0; x < 6; ++x) pi.actions.push_back(static_cast<int>(rng.uniform_int(3)));
  const double exact = expected_regret_of_policy(inst, pi);

  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const int x = rng.categorical(inst.context_dist);
    const Action best = induced_policy(inst.mean, x);
    // Realized reward difference between the optimal action and pi's action.
    const double r = (rng.bernoulli(inst.mean(x, best)) ? 1.0 : 0.0) - (rng.bernoulli(inst.mean(x, pi(x))) ? 1.0 : 0.0);
    sum += r;
    sum_sq += r * r;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sum_sq / n - mean * mean) / n);
  CHECK(std::abs(mean - exact) <= 3.0 * sd);
}

TEST_CASE("regret is nonnegative and zero exactly on pi* over the support") {
  Rng rng(11, "test");
  for (int rep = 0; rep < 200; ++rep) {
    auto cls = testing::random_grid_class(rng, 2, 4, 3, 5);
    Eigen::VectorXd d = rng.simplex(4);
    if (rep % 2) d(0) = 0.0, d /= d.sum();
    auto inst = make_instance(cls, d);
    Policy pi;
    for (int x = 0; x < 4; ++x) pi.actions.push_back(static_cast<int>(rng.uniform_int(3)));
    const double r = expected_regret_of_policy(inst, pi);
    CHECK(r >= 0.0);
    bool agrees = true;
    for (int x = 0; x < 4; ++x)
      if (d(x) > 0 && inst.mean(x, pi(x)) < inst.mean.row(x).maxCoeff()) agrees = false;
    CHECK((r == 0.0) == agrees);
  }
}

TEST_CASE("induced policy is deterministic") {
  Rng rng(3, "test");
  auto cls = testing::random_grid_class(rng, 5, 5, 4, 3);
  for (const auto& f : cls.functions()) CHECK(induced_policy(f) == induced_policy(f));
}

TEST_CASE("instance invariants are enforced") {
  CHECK_THROWS_AS(FiniteFunctionClass({row({0.5, 1.5})}), InvariantViolation);
  CHECK_THROWS_AS(FiniteFunctionClass({row({0.5, 0.5}), Table::Zero(2, 2)}), InvariantViolation);
  CHECK_THROWS_AS(FiniteFunctionClass({row({0.5, 0.5})}, 3), InvariantViolation);
  CHECK_THROWS_AS(make_instance(FiniteFunctionClass({row({0.5, 0.5})}, 0), Eigen::VectorXd::Constant(1, 0.9)),
                  InvariantViolation);
  CHECK_THROWS_AS(make_instance(FiniteFunctionClass({row({0.5, 0.5})}), Eigen::VectorXd::Ones(1)),
                  InvariantViolation);
}

TEST_CASE("product class materializes every choice") {
  std::vector<Eigen::VectorXd> base{Eigen::VectorXd::Constant(2, 0.1), Eigen::VectorXd::Constant(2, 0.9)};
  ProductFunctionClass p(3, base, std::vector<std::size_t>{1, 0, 1});
  auto f = p.materialize();
  CHECK(f.size() == 8);
  REQUIRE(f.star_index());
  CHECK(f[*f.star_index()](0, 0) == 0.9);
  CHECK(f[*f.star_index()](1, 1) == 0.1);
}

TEST_CASE("rng substreams are independent and reproducible") {
  Rng a(42, "env"), b(42, "env"), c(42, "rewards");
  const auto x = a.next();
  CHECK(x == b.next());
  CHECK(x != c.next());
  Rng u(1, "u");
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK((v >= 0.0 && v < 1.0));
  }
}
