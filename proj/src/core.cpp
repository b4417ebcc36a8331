#include "cblab/core.hpp"

#include <cmath>
#include <limits>

namespace cblab {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw InvariantViolation(what);
}

}  // namespace

FiniteFunctionClass::FiniteFunctionClass(std::vector<Table> functions,
                                         std::optional<std::size_t> star_index)
    : functions_(std::move(functions)), star_index_(star_index) {
  require(!functions_.empty(), "function class is empty");
  n_contexts_ = static_cast<int>(functions_.front().rows());
  n_actions_ = static_cast<int>(functions_.front().cols());
  require(n_contexts_ > 0 && n_actions_ > 0, "function tables must be non-empty");
  for (const auto& f : functions_) {
    require(f.rows() == n_contexts_ && f.cols() == n_actions_,
            "function tables must share one (context, action) index set");
    require(f.allFinite() && f.minCoeff() >= 0.0 && f.maxCoeff() <= 1.0,
            "function values must lie in [0, 1]");
  }
  if (star_index_) require(*star_index_ < functions_.size(), "star index out of range");
}

ProductFunctionClass::ProductFunctionClass(int n_actions, std::vector<Eigen::VectorXd> base,
                                           std::optional<std::vector<std::size_t>> star_choice)
    : n_actions_(n_actions), base_(std::move(base)), star_choice_(std::move(star_choice)) {
  require(n_actions_ > 0, "product class needs at least one action");
  require(!base_.empty(), "product base class is empty");
  n_contexts_ = static_cast<int>(base_.front().size());
  for (const auto& g : base_) {
    require(g.size() == n_contexts_, "base functions must share one context set");
    require(g.allFinite() && g.minCoeff() >= 0.0 && g.maxCoeff() <= 1.0,
            "function values must lie in [0, 1]");
  }
  if (star_choice_) {
    require(star_choice_->size() == static_cast<std::size_t>(n_actions_),
            "star choice needs one base index per action");
    for (auto i : *star_choice_) require(i < base_.size(), "star choice out of range");
  }
}

Table ProductFunctionClass::table(const std::vector<std::size_t>& choice) const {
  Table t(n_contexts_, n_actions_);
  for (int a = 0; a < n_actions_; ++a) t.col(a) = base_[choice[static_cast<std::size_t>(a)]];
  return t;
}

FiniteFunctionClass ProductFunctionClass::materialize() const {
  const std::size_t g = base_.size();
  std::size_t total = 1;
  for (int a = 0; a < n_actions_; ++a) total *= g;
  std::vector<Table> tables;
  tables.reserve(total);
  std::optional<std::size_t> star;
  std::vector<std::size_t> choice(static_cast<std::size_t>(n_actions_), 0);
  for (std::size_t k = 0; k < total; ++k) {
    // Mixed-radix decode with action 0 as the most significant digit.
    std::size_t rest = k;
    for (int a = n_actions_ - 1; a >= 0; --a) {
      choice[static_cast<std::size_t>(a)] = rest % g;
      rest /= g;
    }
    if (star_choice_ && choice == *star_choice_) star = k;
    tables.push_back(table(choice));
  }
  return FiniteFunctionClass(std::move(tables), star);
}

LinearFunctionClass::LinearFunctionClass(int n_contexts, int n_actions, Eigen::MatrixXd features,
                                         std::optional<Eigen::MatrixXd> weights,
                                         std::optional<Eigen::VectorXd> star_weight)
    : n_contexts_(n_contexts),
      n_actions_(n_actions),
      features_(std::move(features)),
      weights_(std::move(weights)),
      star_weight_(std::move(star_weight)) {
  require(n_contexts_ > 0 && n_actions_ > 0, "linear class needs contexts and actions");
  require(features_.rows() == static_cast<Eigen::Index>(n_contexts_) * n_actions_,
          "feature table needs one row per (context, action)");
  require(features_.cols() > 0, "feature dimension must be positive");
  require(features_.allFinite(), "features must be finite");
  if (weights_) {
    require(weights_->rows() > 0, "finite weight list is empty");
    require(weights_->cols() == features_.cols(), "weight vectors must have length dim");
  }
  if (star_weight_) require(star_weight_->size() == features_.cols(), "star weight has wrong length");
}

Table LinearFunctionClass::table(const Eigen::Ref<const Eigen::VectorXd>& w) const {
  const Eigen::VectorXd flat = features_ * w;
  // Rows of `features_` are (x, a) in row-major order.
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      flat.data(), n_contexts_, n_actions_);
}

FiniteFunctionClass LinearFunctionClass::materialize() const {
  if (!weights_) throw Error("cannot enumerate an unconstrained linear class");
  std::vector<Table> tables;
  std::optional<std::size_t> star;
  for (Eigen::Index i = 0; i < weights_->rows(); ++i) {
    const Eigen::VectorXd w = weights_->row(i).transpose();
    if (star_weight_ && !star && (w - *star_weight_).norm() == 0.0) star = static_cast<std::size_t>(i);
    tables.push_back(table(w));
  }
  return FiniteFunctionClass(std::move(tables), star);
}

int n_contexts(const FunctionClass& cls) {
  return std::visit([](const auto& c) { return c.n_contexts(); }, cls);
}

int n_actions(const FunctionClass& cls) {
  return std::visit([](const auto& c) { return c.n_actions(); }, cls);
}

std::optional<Table> star_table(const FunctionClass& cls) {
  if (const auto* f = std::get_if<FiniteFunctionClass>(&cls)) {
    if (f->star_index()) return (*f)[*f->star_index()];
    return std::nullopt;
  }
  if (const auto* p = std::get_if<ProductFunctionClass>(&cls)) {
    if (p->star_choice()) return p->table(*p->star_choice());
    return std::nullopt;
  }
  const auto& l = std::get<LinearFunctionClass>(cls);
  if (l.star_weight()) return l.table(*l.star_weight());
  return std::nullopt;
}

double log_class_size(const FunctionClass& cls, int horizon) {
  if (const auto* f = std::get_if<FiniteFunctionClass>(&cls)) return std::log(static_cast<double>(f->size()));
  if (const auto* p = std::get_if<ProductFunctionClass>(&cls))
    return std::log(static_cast<double>(p->base().size()) * p->n_actions());
  const auto& l = std::get<LinearFunctionClass>(cls);
  if (l.weights()) return std::log(static_cast<double>(l.weights()->rows()));
  return l.dim() * std::log(static_cast<double>(std::max(horizon, 2)));
}

std::string to_string(RewardLaw law) {
  return law == RewardLaw::Bernoulli ? "bernoulli" : "gaussian";
}

RewardLaw reward_law_from_string(const std::string& s) {
  if (s == "bernoulli") return RewardLaw::Bernoulli;
  if (s == "gaussian") return RewardLaw::Gaussian;
  throw Error("unknown reward law: " + s);
}

CBInstance make_instance(FunctionClass cls, Eigen::VectorXd context_dist, RewardLaw law) {
  auto mean = star_table(cls);
  if (!mean) throw InvariantViolation("instance needs a realizable f* in its class");
  CBInstance inst{std::move(cls), std::move(context_dist), law, std::move(*mean), {}};
  validate(inst);
  return inst;
}

void validate(const CBInstance& instance) {
  const auto& d = instance.context_dist;
  require(d.size() == n_contexts(instance.function_class), "context distribution has wrong size");
  require(d.allFinite() && d.minCoeff() >= 0.0, "context probabilities must be nonnegative");
  require(std::abs(d.sum() - 1.0) <= 1e-12, "context distribution must sum to 1");
  require(instance.mean.rows() == d.size() && instance.mean.cols() == n_actions(instance.function_class),
          "mean table has wrong shape");
  require(instance.mean.allFinite(), "mean table must be finite");
  if (instance.law == RewardLaw::Bernoulli)
    require(instance.mean.minCoeff() >= 0.0 && instance.mean.maxCoeff() <= 1.0,
            "Bernoulli rewards need means in [0, 1]");
}

Action greedy_action(const Eigen::Ref<const Eigen::RowVectorXd>& values) {
  Action best = 0;
  for (Eigen::Index a = 1; a < values.size(); ++a)
    if (values(a) > values(best)) best = static_cast<Action>(a);
  return best;
}

Action induced_policy(const Table& f, Context x) { return greedy_action(f.row(x)); }

Policy induced_policy(const Table& f) {
  Policy pi;
  pi.actions.resize(static_cast<std::size_t>(f.rows()));
  for (Eigen::Index x = 0; x < f.rows(); ++x) pi.actions[static_cast<std::size_t>(x)] = greedy_action(f.row(x));
  return pi;
}

double uniform_gap(const Table& mean) {
  if (mean.cols() < 2) return 0.0;
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index x = 0; x < mean.rows(); ++x) {
    const Action best = greedy_action(mean.row(x));
    double runner_up = -std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < mean.cols(); ++a)
      if (a != best) runner_up = std::max(runner_up, mean(x, a));
    gap = std::min(gap, mean(x, best) - runner_up);
  }
  return std::max(gap, 0.0);
}

double uniform_gap(const CBInstance& instance) { return uniform_gap(instance.mean); }

double policy_value(const CBInstance& instance, const Policy& pi) {
  double v = 0.0;
  for (Eigen::Index x = 0; x < instance.mean.rows(); ++x)
    v += instance.context_dist(x) * instance.mean(x, pi(static_cast<Context>(x)));
  return v;
}

double expected_regret_of_policy(const CBInstance& instance, const Policy& pi) {
  double r = 0.0;
  for (Eigen::Index x = 0; x < instance.mean.rows(); ++x)
    r += instance.context_dist(x) * (instance.mean.row(x).maxCoeff() - instance.mean(x, pi(static_cast<Context>(x))));
  return r;
}

double instantaneous_regret(const Table& mean, Context x, const Eigen::Ref<const Eigen::VectorXd>& p) {
  return mean.row(x).maxCoeff() - mean.row(x).dot(p.transpose());
}

}  // namespace cblab
