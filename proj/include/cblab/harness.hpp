#pragma once

#include "cblab/adacb.hpp"
#include "cblab/baselines.hpp"
#include "cblab/complexity.hpp"
#include "cblab/instances.hpp"
#include "cblab/regrl.hpp"

#include <json.hpp>

#include <atomic>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

namespace cblab {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kCBHeader = "seed,round,epoch,context,action,reward,inst_regret,cum_regret";
inline constexpr const char* kRLHeader = "seed,k,suboptimality";

class ConfigError : public Error {
 public:
  using Error::Error;
};

// ---- serialization ----
json to_json(const FunctionClass& cls);
FunctionClass function_class_from_json(const json& j);
json to_json(const CBInstance& inst);
CBInstance cb_instance_from_json(const json& j);
json to_json(const BlockMDPInstance& mdp);
BlockMDPInstance block_mdp_from_json(const json& j);
json to_json(const ComplexityReport& r);

/// Reads a JSON file and checks its schema_version.
json load_json(const std::filesystem::path& path);
void check_schema(const json& j);

// ---- config resolution ----
/// Instance spec: {"file": path} or {"generator": name, ...}. Relative paths resolve against `base`.
CBInstance make_cb_instance(const json& spec, const std::filesystem::path& base = {});
BlockMDPInstance make_block_mdp(const json& spec, const std::filesystem::path& base = {});
std::unique_ptr<CBLearner> make_learner(const json& algorithm, std::shared_ptr<const RegressionOracle> oracle,
                                        long horizon);

/// "a:b" (inclusive), "a" or a JSON list.
std::vector<std::uint64_t> parse_seeds(const std::string& text);
std::vector<std::uint64_t> seeds_from_json(const json& j);

double draw_reward(RewardLaw law, double mean, Rng& rng);
/// %.17g
std::string format_double(double v);

/// Runs fn(i) for i in [0, n) on up to `threads` workers; rethrows the first failure.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1))));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---- experiments ----
struct CBRunSummary {
  std::uint64_t seed = 0;
  double cum_regret = 0.0;
  std::vector<double> regret_curve;  // cumulative expected regret after each round
};

/// One seed: CSV rows (no header). Substreams: "contexts", "rewards", "algorithm".
std::string run_cb_seed(const CBInstance& inst, const json& algorithm, long rounds, std::uint64_t seed,
                        CBRunSummary* summary = nullptr);
/// Full CSV with header, rows grouped by seed in the given order.
std::string run_cb(const json& config, const std::vector<std::uint64_t>& seeds, int threads,
                   const std::filesystem::path& base = {});

RLConfig rl_config_from_json(const json& config);
/// Full CSV with header; `summaries` receives one JSON object per seed.
std::string run_rl(const json& config, const std::vector<std::uint64_t>& seeds, int threads,
                   const std::filesystem::path& base = {}, std::vector<json>* summaries = nullptr);

json complexity(const json& config, const std::filesystem::path& base = {});

struct OracleTestReport {
  bool pass = true;
  json detail;
};
/// Confidence-bound reductions against direct version-space enumeration on random finite classes.
OracleTestReport oracle_test(const json& config);

/// Instance JSON for {"instance": spec} (contextual bandit or block MDP).
json gen(const json& config, const std::filesystem::path& base = {});

}  // namespace cblab
