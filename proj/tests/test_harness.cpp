#include "cblab/harness.hpp"
#include "testing.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace cblab;

namespace {

json mab_config(const std::string& algo_json, long rounds) {
  return {{"schema_version", 1},
          {"instance", {{"generator", "mab"}, {"means", {0.7, 0.5}}}},
          {"algorithm", json::parse(algo_json)},
          {"rounds", rounds}};
}

std::filesystem::path scratch() {
  auto p = std::filesystem::temp_directory_path() / "cblab_harness_test";
  std::filesystem::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(CBLAB_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("seed ranges") {
  CHECK(parse_seeds("3") == std::vector<std::uint64_t>{3});
  CHECK(parse_seeds("2:5") == std::vector<std::uint64_t>{2, 3, 4, 5});
  CHECK_THROWS_AS(parse_seeds("5:2"), ConfigError);
  CHECK_THROWS_AS(parse_seeds("x"), ConfigError);
  CHECK(seeds_from_json(json::parse("[1, 4]")) == std::vector<std::uint64_t>{1, 4});
  CHECK_THROWS_AS(seeds_from_json(json::array()), ConfigError);
}

TEST_CASE("doubles print with 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(std::stod(format_double(2.0 / 3.0)) == 2.0 / 3.0);
}

TEST_CASE("instances round-trip through JSON") {
  SUBCASE("finite") {
    auto inst = gen_disagreement_lb(2, 4000, 0.1, 0.25, 2);
    auto back = cb_instance_from_json(json::parse(to_json(inst).dump()));
    CHECK(back.mean == inst.mean);
    CHECK(back.context_dist == inst.context_dist);
    CHECK(std::get<FiniteFunctionClass>(back.function_class).functions() ==
          std::get<FiniteFunctionClass>(inst.function_class).functions());
    CHECK(back.metadata == inst.metadata);
  }
  SUBCASE("linear") {
    auto inst = gen_linear(3, 2, 4, 5, 7);
    auto back = cb_instance_from_json(json::parse(to_json(inst).dump()));
    const auto& a = std::get<LinearFunctionClass>(inst.function_class);
    const auto& b = std::get<LinearFunctionClass>(back.function_class);
    CHECK(a.features() == b.features());
    CHECK(*a.weights() == *b.weights());
    CHECK(back.mean == inst.mean);
  }
  SUBCASE("product") {
    std::vector<Eigen::VectorXd> base{Eigen::Vector2d(0.1, 0.9), Eigen::Vector2d(0.5, 0.4)};
    FunctionClass cls = ProductFunctionClass(3, base, std::vector<std::size_t>{0, 1, 1});
    auto back = function_class_from_json(json::parse(to_json(cls).dump()));
    CHECK(*star_table(back) == *star_table(cls));
  }
  SUBCASE("block mdp") {
    BlockMDPOptions o;
    o.dense_rewards = true;
    auto m = gen_block_mdp({2}, 2, 2, {4}, 0.5, 1, o);
    auto back = block_mdp_from_json(json::parse(to_json(m).dump()));
    CHECK(back.emission == m.emission);
    CHECK(back.reward == m.reward);
    CHECK(back.transition == m.transition);
    CHECK(latent_value_iteration(back).min_positive_gap == doctest::Approx(0.5));
  }
}

TEST_CASE("schema version is enforced") {
  CHECK_THROWS_AS(check_schema(json::parse(R"({"a": 1})")), ConfigError);
  CHECK_THROWS_AS(check_schema(json::parse(R"({"schema_version": 9})")), ConfigError);
  CHECK_NOTHROW(check_schema(json::parse(R"({"schema_version": 1})")));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(make_cb_instance(json::parse(R"({"generator": "nope"})")), ConfigError);
  CHECK_THROWS_AS(run_cb(mab_config(R"({"name": "nope"})", 10), {0}, 1), ConfigError);
  CHECK_THROWS_AS(run_cb(mab_config(R"({"name": "squarecb"})", 1), {0}, 1), ConfigError);
  CHECK_THROWS_AS(run_cb(mab_config(R"({"name": "squarecb"})", 10), {}, 1), ConfigError);
  CHECK_THROWS_AS(rl_config_from_json(json::parse(R"({"iterations": 5, "beta": "big"})")), ConfigError);
}

TEST_CASE("csv layout") {
  const std::string csv = run_cb(mab_config(R"({"name": "squarecb"})", 5), {4}, 1);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == kCBHeader);
  int rows = 0;
  double prev = 0.0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.rfind("4,", 0) == 0);
    const double cum = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(cum >= prev);
    prev = cum;
  }
  CHECK(rows == 5);
}

TEST_CASE("byte-for-byte determinism across thread counts") {
  const auto cfg = mab_config(R"({"name": "adacb"})", 300);
  const auto seeds = parse_seeds("0:7");
  const std::string a = run_cb(cfg, seeds, 1), b = run_cb(cfg, seeds, 4), c = run_cb(cfg, seeds, 8);
  CHECK(a == b);
  CHECK(a == c);
  json rl = {{"schema_version", 1},
             {"instance",
              {{"generator", "block_mdp"}, {"states", 2}, {"actions", 2}, {"horizon", 2}, {"obs", 4}, {"gap", 0.5},
               {"seed", 1}, {"dense_rewards", true}}},
             {"iterations", 30},
             {"beta", 1.0}};
  CHECK(run_rl(rl, {0, 1, 2}, 1) == run_rl(rl, {0, 1, 2}, 3));
}

TEST_CASE("epsilon-greedy regret grows at the uniform-exploration rate") {
  // slope eps (A - 1) / A * gap = 0.01 per round once greedy has settled
  const long T = 4000;
  double early = 0.0, late = 0.0;
  const int seeds = 50;
  auto inst = gen_mab({0.7, 0.5});
  for (int s = 0; s < seeds; ++s) {
    CBRunSummary sum;
    run_cb_seed(inst, json::parse(R"({"name": "egreedy", "epsilon": 0.1})"), T, static_cast<std::uint64_t>(s), &sum);
    early += sum.regret_curve[T / 2 - 1];
    late += sum.regret_curve[T - 1];
  }
  const double slope = (late - early) / seeds / (T / 2.0);
  CHECK(slope == doctest::Approx(0.01).epsilon(0.2));
}

TEST_CASE("AdaCB on a singleton class has zero regret after the first epoch") {
  auto inst = gen_mab({0.7, 0.5}, RewardLaw::Bernoulli, MabClass::StarOnly);
  CBRunSummary sum;
  run_cb_seed(inst, json::parse(R"({"name": "adacb"})"), 64, 3, &sum);
  CHECK(sum.regret_curve.back() == sum.regret_curve[1]);
  CHECK(sum.cum_regret == 0.0);
}

TEST_CASE("complexity report for the star separation class") {
  json cfg = {{"schema_version", 1}, {"instance", {{"generator", "star_separation"}, {"d", 4}}}, {"p_resolution", 2}};
  auto r = complexity(cfg);
  CHECK(r["policy_star_strong"]["value"].get<int>() >= 4);
  CHECK(r["value_star"]["value"].get<int>() <= 5);
  CHECK(r["value_star"]["exact"].get<bool>());
  CHECK(r["value_dis"].contains("lower_bound"));
}

TEST_CASE("oracle test passes on a small sweep") {
  auto r = oracle_test(json::parse(R"({"classes": 20, "max_functions": 30, "max_contexts": 4, "seed": 5})"));
  CHECK(r.pass);
  CHECK(r.detail["conf_bound_failures"] == 0);
}

TEST_CASE("gen emits loadable instances") {
  auto cb = gen(json::parse(R"({"instance": {"generator": "mab", "means": [0.2, 0.6, 0.4]}})"));
  CHECK(cb["type"] == "cb");
  CHECK(cb_instance_from_json(cb).mean(0, 1) == 0.6);
  auto mdp = gen(json::parse(
      R"({"instance": {"generator": "block_mdp", "states": 1, "actions": 2, "horizon": 1, "obs": 2, "gap": 0.2, "seed": 4}})"));
  CHECK(mdp["type"] == "block_mdp");
  CHECK(block_mdp_from_json(mdp).horizon == 1);
}

TEST_CASE("cli exit codes and replay") {
  const auto dir = scratch();
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  const auto good = write("cb.json", mab_config(R"({"name": "squarecb"})", 200).dump());
  const auto bad = write("bad.json", R"({"schema_version": 1, "instance": {"generator": "mab", "means": [1.7, 0.5]},
                                         "algorithm": {"name": "squarecb"}, "rounds": 10, "seeds": [0]})");
  const auto broken = write("broken.json", "{ not json");
  const auto a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  CHECK(run_cli("run-cb --config " + good + " --seed-range 0:3 --threads 2 --out " + a) == 0);
  CHECK(run_cli("run-cb --config " + good + " --seed-range 0:3 --threads 1 --out " + b) == 0);
  std::ifstream fa(a), fb(b);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().size() > 100);
  CHECK(run_cli("run-cb --config " + bad) == 1);
  CHECK(run_cli("run-cb --config " + broken) == 1);
  CHECK(run_cli("run-cb") == 1);
  CHECK(run_cli("oracle-test --config " +
                write("ot.json", R"({"schema_version": 1, "classes": 5, "max_functions": 10})")) == 0);
  // an instance file whose class does not contain its mean violates realizability
  json inst = to_json(gen_mab({0.7, 0.5}));
  inst["function_class"]["star_index"] = nullptr;
  const auto cfg = write("inv.json", json{{"schema_version", 1},
                                          {"instance", {{"file", write("inst.json", inst.dump())}}},
                                          {"algorithm", {{"name", "squarecb"}}},
                                          {"rounds", 10},
                                          {"seeds", {0}}}
                                         .dump());
  CHECK(run_cli("run-cb --config " + cfg) == 2);
}
