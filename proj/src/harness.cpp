#include "cblab/harness.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace cblab {

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd json_matrix(const json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw ConfigError(std::string(what) + ": expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols) throw ConfigError(std::string(what) + ": ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

Eigen::VectorXd json_vector(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

RewardLaw law_of(const json& spec) {
  try {
    return reward_law_from_string(get_or<std::string>(spec, "law", "bernoulli"));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

// Finite view of a class for the complexity measures.
FiniteFunctionClass finite_view(const FunctionClass& cls) {
  if (const auto* f = std::get_if<FiniteFunctionClass>(&cls)) return *f;
  if (const auto* p = std::get_if<ProductFunctionClass>(&cls)) return p->materialize();
  const auto& l = std::get<LinearFunctionClass>(cls);
  if (l.unconstrained()) throw ConfigError("complexity measures need a finite class");
  return l.materialize();
}

}  // namespace

// ---- serialization ----

json to_json(const FunctionClass& cls) {
  json j;
  if (const auto* f = std::get_if<FiniteFunctionClass>(&cls)) {
    j["kind"] = "finite";
    j["functions"] = json::array();
    for (const auto& t : f->functions()) j["functions"].push_back(matrix_json(t));
    j["star_index"] = f->star_index() ? json(*f->star_index()) : json(nullptr);
  } else if (const auto* p = std::get_if<ProductFunctionClass>(&cls)) {
    j["kind"] = "product";
    j["n_actions"] = p->n_actions();
    j["base"] = json::array();
    for (const auto& g : p->base()) j["base"].push_back(vector_json(g));
    j["star_choice"] = p->star_choice() ? json(*p->star_choice()) : json(nullptr);
  } else {
    const auto& l = std::get<LinearFunctionClass>(cls);
    j["kind"] = "linear";
    j["n_contexts"] = l.n_contexts();
    j["n_actions"] = l.n_actions();
    j["features"] = matrix_json(l.features());
    j["weights"] = l.weights() ? matrix_json(*l.weights()) : json(nullptr);
    j["star_weight"] = l.star_weight() ? vector_json(*l.star_weight()) : json(nullptr);
  }
  return j;
}

FunctionClass function_class_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "finite") {
    std::vector<Table> fs;
    for (const auto& t : j.at("functions")) fs.push_back(json_matrix(t, "functions"));
    std::optional<std::size_t> star;
    if (j.contains("star_index") && !j["star_index"].is_null()) star = j["star_index"].get<std::size_t>();
    return FiniteFunctionClass(std::move(fs), star);
  }
  if (kind == "product") {
    std::vector<Eigen::VectorXd> base;
    for (const auto& g : j.at("base")) base.push_back(json_vector(g, "base"));
    std::optional<std::vector<std::size_t>> star;
    if (j.contains("star_choice") && !j["star_choice"].is_null()) star = j["star_choice"].get<std::vector<std::size_t>>();
    return ProductFunctionClass(j.at("n_actions").get<int>(), std::move(base), star);
  }
  if (kind == "linear") {
    std::optional<Eigen::MatrixXd> w;
    std::optional<Eigen::VectorXd> sw;
    if (j.contains("weights") && !j["weights"].is_null()) w = json_matrix(j["weights"], "weights");
    if (j.contains("star_weight") && !j["star_weight"].is_null()) sw = json_vector(j["star_weight"], "star_weight");
    return LinearFunctionClass(j.at("n_contexts").get<int>(), j.at("n_actions").get<int>(),
                               json_matrix(j.at("features"), "features"), w, sw);
  }
  throw ConfigError("unknown function class kind: " + kind);
}

json to_json(const CBInstance& inst) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["type"] = "cb";
  j["n_contexts"] = inst.n_contexts();
  j["n_actions"] = inst.n_actions();
  j["law"] = to_string(inst.law);
  j["context_dist"] = vector_json(inst.context_dist);
  j["function_class"] = to_json(inst.function_class);
  j["mean"] = matrix_json(inst.mean);
  j["metadata"] = inst.metadata;
  return j;
}

CBInstance cb_instance_from_json(const json& j) {
  check_schema(j);
  if (get_or<std::string>(j, "type", "cb") != "cb") throw ConfigError("expected a contextual bandit instance");
  CBInstance inst = make_instance(function_class_from_json(j.at("function_class")),
                                  json_vector(j.at("context_dist"), "context_dist"), law_of(j));
  if (j.contains("metadata")) inst.metadata = j["metadata"].get<std::map<std::string, double>>();
  return inst;
}

json to_json(const BlockMDPInstance& m) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["type"] = "block_mdp";
  j["horizon"] = m.horizon;
  j["n_actions"] = m.n_actions;
  j["n_states"] = m.n_states;
  j["n_obs"] = m.n_obs;
  j["decoder"] = m.decoder;
  j["emission"] = json::array();
  for (const auto& e : m.emission) j["emission"].push_back(matrix_json(e));
  j["initial"] = vector_json(m.initial);
  j["transition"] = json::array();
  for (const auto& layer : m.transition) {
    json l = json::array();
    for (const auto& t : layer) l.push_back(matrix_json(t));
    j["transition"].push_back(std::move(l));
  }
  j["reward"] = json::array();
  for (const auto& r : m.reward) j["reward"].push_back(matrix_json(r));
  j["metadata"] = m.metadata;
  return j;
}

BlockMDPInstance block_mdp_from_json(const json& j) {
  check_schema(j);
  if (get_or<std::string>(j, "type", "block_mdp") != "block_mdp") throw ConfigError("expected a block MDP instance");
  BlockMDPInstance m;
  m.horizon = j.at("horizon").get<int>();
  m.n_actions = j.at("n_actions").get<int>();
  m.n_states = j.at("n_states").get<std::vector<int>>();
  m.n_obs = j.at("n_obs").get<std::vector<int>>();
  m.decoder = j.at("decoder").get<std::vector<std::vector<int>>>();
  for (const auto& e : j.at("emission")) m.emission.push_back(json_matrix(e, "emission"));
  m.initial = json_vector(j.at("initial"), "initial");
  for (const auto& layer : j.at("transition")) {
    std::vector<Eigen::MatrixXd> l;
    for (const auto& t : layer) l.push_back(json_matrix(t, "transition"));
    m.transition.push_back(std::move(l));
  }
  for (const auto& r : j.at("reward")) m.reward.push_back(json_matrix(r, "reward"));
  if (j.contains("metadata")) m.metadata = j["metadata"].get<std::map<std::string, double>>();
  validate(m);
  return m;
}

namespace {
json search_json(const SearchResult& r) { return {{"value", r.value}, {"exact", r.exact}, {"checks", r.checks}}; }
}  // namespace

json to_json(const ComplexityReport& r) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["policy_dis"] = r.policy_dis;
  j["csc_dis"] = r.csc_dis;
  j["value_dis"] = {{"lower_bound", r.value_dis.value},
                    {"resolution", r.value_dis.resolution},
                    {"points", r.value_dis.points},
                    {"exhaustive_grid", r.value_dis.exhaustive}};
  j["value_dis_at_p"] = r.value_dis_at_p;
  j["policy_star_weak"] = search_json(r.policy_star_weak);
  j["policy_star_strong"] = search_json(r.policy_star_strong);
  j["value_star"] = search_json(r.value_star);
  j["value_eluder"] = search_json(r.value_eluder);
  j["policy_eluder"] = search_json(r.policy_eluder);
  j["rl_dis"] = r.rl_dis;
  j["params"] = {{"eps0", r.params.eps0},
                 {"delta0", r.params.delta0},
                 {"p_resolution", r.params.p_resolution},
                 {"search_cap", r.params.search_cap}};
  return j;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  check_schema(j);
  return j;
}

void check_schema(const json& j) {
  if (!j.is_object()) throw ConfigError("expected a JSON object");
  if (!j.contains("schema_version")) throw ConfigError("missing schema_version");
  if (j["schema_version"] != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + j["schema_version"].dump());
}

// ---- config resolution ----

CBInstance make_cb_instance(const json& spec, const std::filesystem::path& base) {
  if (spec.contains("file")) return cb_instance_from_json(load_json(resolve(base, spec["file"].get<std::string>())));
  if (spec.contains("function_class")) return cb_instance_from_json(spec);
  const std::string g = spec.at("generator").get<std::string>();
  const RewardLaw law = law_of(spec);
  if (g == "mab") {
    const std::string layout = get_or<std::string>(spec, "class", "orderings");
    if (layout != "orderings" && layout != "star_only") throw ConfigError("mab class must be orderings or star_only");
    return gen_mab(spec.at("means").get<std::vector<double>>(), law,
                   layout == "orderings" ? MabClass::Orderings : MabClass::StarOnly);
  }
  if (g == "disagreement_lb") {
    std::optional<std::vector<BlockChoice>> star;
    if (spec.contains("star")) {
      star.emplace();
      for (const auto& c : spec["star"]) star->push_back({c.at("l").get<int>(), c.at("b").get<int>()});
    }
    return gen_disagreement_lb(spec.at("actions").get<int>(), spec.at("f_cap").get<double>(), spec.at("gap").get<double>(),
                               spec.at("epsilon").get<double>(), spec.at("theta").get<double>(), star, law);
  }
  if (g == "linear")
    return gen_linear(spec.at("dim").get<int>(), spec.at("actions").get<int>(), spec.at("contexts").get<int>(),
                      spec.at("weights").get<int>(), spec.at("seed").get<std::uint64_t>(), law);
  if (g == "star_separation" || g == "eluder_separation") {
    const int d = spec.at("d").get<int>();
    FiniteFunctionClass cls = g == "star_separation" ? gen_star_separation(d, get_or<double>(spec, "gap", 0.5))
                                                     : gen_eluder_separation(d, spec.at("gap").get<double>());
    return make_instance(cls, Eigen::VectorXd::Constant(d, 1.0 / d), law);
  }
  throw ConfigError("unknown contextual bandit generator: " + g);
}

BlockMDPInstance make_block_mdp(const json& spec, const std::filesystem::path& base) {
  if (spec.contains("file")) return block_mdp_from_json(load_json(resolve(base, spec["file"].get<std::string>())));
  if (spec.contains("emission")) return block_mdp_from_json(spec);
  const std::string g = spec.at("generator").get<std::string>();
  if (g != "block_mdp") throw ConfigError("unknown block MDP generator: " + g);
  BlockMDPOptions o;
  o.dense_rewards = get_or<bool>(spec, "dense_rewards", false);
  o.max_attempts = get_or<int>(spec, "max_attempts", 10000);
  auto as_list = [&](const char* key) {
    const auto& v = spec.at(key);
    return v.is_array() ? v.get<std::vector<int>>() : std::vector<int>{v.get<int>()};
  };
  return gen_block_mdp(as_list("states"), spec.at("actions").get<int>(), spec.at("horizon").get<int>(), as_list("obs"),
                       spec.at("gap").get<double>(), spec.at("seed").get<std::uint64_t>(), o);
}

std::unique_ptr<CBLearner> make_learner(const json& a, std::shared_ptr<const RegressionOracle> oracle, long horizon) {
  const std::string name = a.at("name").get<std::string>();
  if (name == "adacb") {
    AdaCBConfig c;
    c.horizon = horizon;
    if (a.contains("delta")) c.delta = a["delta"].get<double>();
    if (a.contains("alpha")) c.alpha = a["alpha"].get<double>();
    c.c = get_or<double>(a, "c", 1.0);
    c.beta_scale = get_or<double>(a, "beta_scale", 1.0);
    const std::string opt = get_or<std::string>(a, "option", "I");
    if (opt != "I" && opt != "II") throw ConfigError("adacb option must be I or II");
    c.option = opt == "I" ? ExplorationOption::I : ExplorationOption::II;
    return std::make_unique<AdaCB>(std::move(oracle), c);
  }
  if (name == "squarecb") {
    SquareCBConfig c;
    c.gamma0 = get_or<double>(a, "gamma0", c.gamma0);
    c.rho = get_or<double>(a, "rho", c.rho);
    return std::make_unique<SquareCB>(std::move(oracle), c);
  }
  if (name == "egreedy") return std::make_unique<EpsilonGreedy>(std::move(oracle), a.at("epsilon").get<double>());
  if (name == "ucb") {
    UCBConfig c;
    c.c1 = get_or<double>(a, "c1", c.c1);
    c.delta = get_or<double>(a, "delta", c.delta);
    c.alpha = get_or<double>(a, "alpha", c.alpha);
    c.horizon = horizon;
    return std::make_unique<UCB>(std::move(oracle), c);
  }
  throw ConfigError("unknown algorithm: " + name);
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  try {
    std::size_t used = 0;
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
      const auto v = std::stoull(text, &used);
      if (used != text.size()) throw ConfigError("bad seed: " + text);
      return {v};
    }
    const auto a = std::stoull(text.substr(0, colon));
    const auto b = std::stoull(text.substr(colon + 1));
    if (b < a) throw ConfigError("empty seed range: " + text);
    std::vector<std::uint64_t> out;
    for (auto s = a; s <= b; ++s) out.push_back(s);
    return out;
  } catch (const std::logic_error&) {
    throw ConfigError("bad seed range: " + text);
  }
}

std::vector<std::uint64_t> seeds_from_json(const json& j) {
  if (j.is_string()) return parse_seeds(j.get<std::string>());
  if (j.is_number_unsigned() || j.is_number_integer()) return {j.get<std::uint64_t>()};
  if (!j.is_array() || j.empty()) throw ConfigError("seeds must be a nonempty list or a range string");
  return j.get<std::vector<std::uint64_t>>();
}

double draw_reward(RewardLaw law, double mean, Rng& rng) {
  // Gaussian rewards use unit-free noise sd 0.1
  return law == RewardLaw::Bernoulli ? (rng.bernoulli(mean) ? 1.0 : 0.0) : mean + 0.1 * rng.normal();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- experiments ----

std::string run_cb_seed(const CBInstance& inst, const json& algorithm, long rounds, std::uint64_t seed,
                        CBRunSummary* summary) {
  auto oracle = std::make_shared<const RegressionOracle>(inst.function_class);
  auto learner = make_learner(algorithm, oracle, rounds);
  Rng ctx_rng(seed, "contexts"), reward_rng(seed, "rewards"), alg_rng(seed, "algorithm");
  ContextStream contexts(inst.context_dist);
  std::string out;
  double cum = 0.0;
  if (summary) {
    summary->seed = seed;
    summary->regret_curve.clear();
    summary->regret_curve.reserve(static_cast<std::size_t>(rounds));
  }
  for (long t = 1; t <= rounds; ++t) {
    const Context x = contexts.next(ctx_rng);
    const StepResult s = learner->step(x, alg_rng);
    const double r = draw_reward(inst.law, inst.mean(x, s.action), reward_rng);
    learner->observe(x, s.action, r);
    const double inst_regret = instantaneous_regret(inst.mean, x, s.probs);
    if (inst_regret < -1e-12) throw InvariantViolation("negative expected regret");
    cum += inst_regret;
    if (summary) summary->regret_curve.push_back(cum);
    out += std::to_string(seed) + ',' + std::to_string(t) + ',' + std::to_string(s.epoch) + ',' + std::to_string(x) +
           ',' + std::to_string(s.action) + ',' + format_double(r) + ',' + format_double(inst_regret) + ',' +
           format_double(cum) + '\n';
  }
  if (summary) summary->cum_regret = cum;
  return out;
}

std::string run_cb(const json& config, const std::vector<std::uint64_t>& seeds, int threads,
                   const std::filesystem::path& base) {
  const long rounds = config.at("rounds").get<long>();
  if (rounds < 2) throw ConfigError("rounds must be at least 2");
  if (seeds.empty()) throw ConfigError("need at least one seed");
  const CBInstance inst = make_cb_instance(config.at("instance"), base);
  validate(inst);
  const json& algorithm = config.at("algorithm");
  std::vector<std::string> parts(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t i) { parts[i] = run_cb_seed(inst, algorithm, rounds, seeds[i]); });
  std::string out = std::string(kCBHeader) + '\n';
  for (const auto& p : parts) out += p;
  return out;
}

RLConfig rl_config_from_json(const json& config) {
  RLConfig c;
  c.iterations = config.at("iterations").get<int>();
  if (c.iterations < 1) throw ConfigError("iterations must be at least 1");
  if (config.contains("delta")) c.delta = config["delta"].get<double>();
  c.alpha = get_or<double>(config, "alpha", c.alpha);
  if (config.contains("log_f_max")) c.log_f_max = config["log_f_max"].get<double>();
  const json& b = config.at("beta");
  if (b.is_string()) {
    if (b.get<std::string>() != "analytic") throw ConfigError("beta must be \"analytic\" or numbers");
    c.beta_source = BetaSource::Analytic;
  } else {
    c.beta_source = BetaSource::Fixed;
    c.beta = b.is_array() ? b.get<std::vector<double>>() : std::vector<double>{b.get<double>()};
  }
  return c;
}

std::string run_rl(const json& config, const std::vector<std::uint64_t>& seeds, int threads,
                   const std::filesystem::path& base, std::vector<json>* summaries) {
  if (seeds.empty()) throw ConfigError("need at least one seed");
  auto mdp = std::make_shared<const BlockMDPInstance>(make_block_mdp(config.at("instance"), base));
  const RLConfig rc = rl_config_from_json(config);
  std::vector<RLRun> runs(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t i) { runs[i] = run_regrl(mdp, rc, seeds[i]); });
  std::string out = std::string(kRLHeader) + '\n';
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& r = runs[i];
    for (std::size_t k = 0; k < r.suboptimality.size(); ++k)
      out += std::to_string(seeds[i]) + ',' + std::to_string(k + 1) + ',' + format_double(r.suboptimality[k]) + '\n';
    if (summaries)
      summaries->push_back({{"seed", seeds[i]},
                            {"beta", r.beta},
                            {"beta_source", r.beta_source},
                            {"returned_k", r.returned_k},
                            {"returned_suboptimality", r.returned_suboptimality},
                            {"mean_suboptimality", r.mean_suboptimality},
                            {"optimism_pairs", r.optimism_pairs},
                            {"optimism_points", r.optimism_points},
                            {"queried_points", r.queried_points}});
  }
  return out;
}

json complexity(const json& config, const std::filesystem::path& base) {
  const CBInstance inst = make_cb_instance(config.at("instance"), base);
  const FiniteFunctionClass cls = finite_view(inst.function_class);
  Eigen::VectorXd dist = config.contains("distribution") ? json_vector(config["distribution"], "distribution")
                                                         : inst.context_dist;
  ComplexityParams p;
  p.eps0 = get_or<double>(config, "eps0", p.eps0);
  p.delta0 = get_or<double>(config, "delta0", p.delta0);
  p.p_resolution = get_or<int>(config, "p_resolution", p.p_resolution);
  p.search_cap = get_or<std::uint64_t>(config, "search_cap", p.search_cap);
  if (config.contains("p")) p.p = json_matrix(config["p"], "p");
  std::vector<Eigen::VectorXd> emissions;
  if (config.contains("emissions"))
    for (const auto& e : config["emissions"]) emissions.push_back(json_vector(e, "emissions"));
  return to_json(complexity_report(cls, dist, p, emissions));
}

OracleTestReport oracle_test(const json& config) {
  const int classes = get_or<int>(config, "classes", 200);
  const int max_f = get_or<int>(config, "max_functions", 100);
  const int max_x = get_or<int>(config, "max_contexts", 10);
  const int max_a = get_or<int>(config, "max_actions", 4);
  const int rounds = get_or<int>(config, "rounds", 30);
  const double alpha = get_or<double>(config, "alpha", 1e-3);
  const std::uint64_t seed = get_or<std::uint64_t>(config, "seed", 0);
  if (classes < 1 || max_f < 1 || max_x < 1 || max_a < 2 || rounds < 0 || !(alpha > 0))
    throw ConfigError("oracle-test sizes must be positive (at least two actions)");

  Rng rng(seed, "oracle-test");
  std::size_t bound_fail = 0, diff_fail = 0, cs_fail = 0, width_fail = 0, checks = 0;
  for (int c = 0; c < classes; ++c) {
    const int nf = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(max_f)));
    const int nx = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(max_x)));
    const int na = 2 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(max_a - 1)));
    std::vector<Table> fs;
    for (int i = 0; i < nf; ++i) {
      Table t(nx, na);
      for (Eigen::Index k = 0; k < t.size(); ++k) t(k) = rng.uniform();
      fs.push_back(t);
    }
    const auto star = static_cast<std::size_t>(rng.uniform_int(static_cast<std::uint64_t>(nf)));
    FiniteFunctionClass cls(fs, star);
    History h;
    for (int t = 0; t < rounds; ++t) {
      const int x = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(nx)));
      const int a = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(na)));
      h.push_back({x, a, rng.bernoulli(fs[star](x, a)) ? 1.0 : 0.0});
    }
    const double beta = rng.uniform(0.1, 4.0);

    // direct enumeration of the version space
    std::vector<double> loss;
    double best = 1e300;
    for (const auto& f : fs) {
      double l = 0;
      for (const auto& o : h) l += std::pow(f(o.context, o.action) - o.reward, 2);
      loss.push_back(l);
      best = std::min(best, l);
    }
    std::vector<std::size_t> vs;
    for (std::size_t i = 0; i < fs.size(); ++i)
      if (loss[i] <= best + beta + 1e-9) vs.push_back(i);

    RegressionOracle o(cls);
    for (int x = 0; x < nx; ++x) {
      std::set<Action> exact;
      for (auto i : vs) exact.insert(induced_policy(fs[i], x));
      for (int a = 0; a < na; ++a) {
        double hi = -1e300, lo = 1e300;
        for (auto i : vs) hi = std::max(hi, fs[i](x, a)), lo = std::min(lo, fs[i](x, a));
        ++checks;
        if (std::abs(o.conf_bound(Bound::High, x, a, h, beta, alpha) - hi) > alpha ||
            std::abs(o.conf_bound(Bound::Low, x, a, h, beta, alpha) - lo) > alpha)
          ++bound_fail;
        for (int b = 0; b < na; ++b) {
          double d = 1e300;
          for (auto i : vs) d = std::min(d, fs[i](x, a) - fs[i](x, b));
          if (a == b) d = 0.0;
          if (std::abs(o.conf_bound_diff(x, a, b, h, beta, alpha) - d) > 2 * alpha) ++diff_fail;
        }
      }
      const auto cs = o.candidate_set(x, h, beta, alpha);
      const std::set<Action> got(cs.begin(), cs.end());
      const bool contains = std::includes(got.begin(), got.end(), exact.begin(), exact.end());
      const bool singleton = exact.size() != 1 || got == exact;
      const bool multiplicity = (got.size() > 1) == (exact.size() > 1);
      if (!(contains && singleton && multiplicity)) ++cs_fail;
      double w = 0.0;
      if (exact.size() > 1)
        for (int a = 0; a < na; ++a)
          for (auto i : vs)
            for (auto j : vs) w = std::max(w, std::abs(fs[i](x, a) - fs[j](x, a)));
      if (std::abs(o.conf_width(x, h, beta, alpha) - w) > 2 * alpha) ++width_fail;
    }
  }
  OracleTestReport r;
  r.pass = bound_fail + diff_fail + cs_fail + width_fail == 0;
  r.detail = {{"classes", classes},          {"checks", checks},         {"conf_bound_failures", bound_fail},
              {"conf_bound_diff_failures", diff_fail}, {"candidate_set_failures", cs_fail},
              {"conf_width_failures", width_fail},     {"alpha", alpha},           {"pass", r.pass}};
  return r;
}

json gen(const json& config, const std::filesystem::path& base) {
  const json& spec = config.at("instance");
  const bool mdp = spec.contains("generator") ? spec["generator"] == "block_mdp"
                                              : get_or<std::string>(spec, "type", "cb") == "block_mdp";
  if (mdp) return to_json(make_block_mdp(spec, base));
  return to_json(make_cb_instance(spec, base));
}

}  // namespace cblab
