#include "cblab/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace cblab;

namespace {

enum Exit { kOk = 0, kConfig = 1, kInvariant = 2, kAcceptance = 3 };

struct Options {
  std::string config;
  std::string seed_range;
  std::string out;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
};

void add_common(CLI::App* sub, Options& o, bool config_required = true) {
  auto* c = sub->add_option("--config", o.config, "JSON config file");
  if (config_required) c->required();
  sub->add_option("--seed-range", o.seed_range, "seeds as a:b (inclusive) or a single seed; overrides the config");
  sub->add_option("--out", o.out, "output path (default: config \"output\" or stdout)");
  sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
}

void emit(const std::string& text, const Options& o, const json& config) {
  std::string path = o.out;
  if (path.empty() && config.contains("output")) path = config["output"].get<std::string>();
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

std::vector<std::uint64_t> seeds_for(const Options& o, const json& config) {
  if (!o.seed_range.empty()) return parse_seeds(o.seed_range);
  if (config.contains("seeds")) return seeds_from_json(config["seeds"]);
  throw ConfigError("no seeds given (config \"seeds\" or --seed-range)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cblab: contextual bandit and block-MDP laboratory"};
  app.require_subcommand(1);
  Options o;
  auto* cb = app.add_subcommand("run-cb", "run a contextual bandit experiment, CSV per round");
  auto* rl = app.add_subcommand("run-rl", "run RegRL on a block MDP, CSV per iteration");
  auto* cx = app.add_subcommand("complexity", "complexity report for a finite class, JSON");
  auto* ot = app.add_subcommand("oracle-test", "oracle reductions against enumeration, JSON; exit 3 on failure");
  auto* gn = app.add_subcommand("gen", "emit an instance as JSON");
  for (auto* s : {cb, rl, cx, gn}) add_common(s, o);
  add_common(ot, o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    json config = json::object();
    std::filesystem::path base;
    if (!o.config.empty()) {
      config = load_json(o.config);
      base = std::filesystem::path(o.config).parent_path();
    }
    if (cb->parsed()) {
      emit(run_cb(config, seeds_for(o, config), o.threads, base), o, config);
    } else if (rl->parsed()) {
      std::vector<json> summaries;
      emit(run_rl(config, seeds_for(o, config), o.threads, base, &summaries), o, config);
      (o.out.empty() && !config.contains("output") ? std::cerr : std::cout) << json(summaries).dump(2) << '\n';
    } else if (cx->parsed()) {
      emit(complexity(config, base).dump(2) + "\n", o, config);
    } else if (ot->parsed()) {
      if (!o.seed_range.empty()) config["seed"] = parse_seeds(o.seed_range).front();
      const auto report = oracle_test(config);
      emit(report.detail.dump(2) + "\n", o, config);
      return report.pass ? kOk : kAcceptance;
    } else if (gn->parsed()) {
      emit(gen(config, base).dump(2) + "\n", o, config);
    }
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kInvariant;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
  return kOk;
}
