#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace cblab {

// Value tables are indexed (context, action). Contexts and actions are dense
// integer ids; names only exist in the I/O layer.
using Table = Eigen::MatrixXd;
using Context = int;
using Action = int;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a constructed object breaks one of its documented invariants.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

struct Observation {
  Context context = 0;
  Action action = 0;
  double reward = 0.0;
};

using History = std::vector<Observation>;

struct WeightedExample {
  double weight = 1.0;
  Context context = 0;
  Action action = 0;
  double target = 0.0;
};

/// An explicit table of candidate reward functions over a finite domain.
class FiniteFunctionClass {
 public:
  FiniteFunctionClass() = default;
  FiniteFunctionClass(std::vector<Table> functions,
                      std::optional<std::size_t> star_index = std::nullopt);

  int n_contexts() const { return n_contexts_; }
  int n_actions() const { return n_actions_; }
  std::size_t size() const { return functions_.size(); }
  const Table& operator[](std::size_t i) const { return functions_[i]; }
  const std::vector<Table>& functions() const { return functions_; }
  std::optional<std::size_t> star_index() const { return star_index_; }

 private:
  int n_contexts_ = 0;
  int n_actions_ = 0;
  std::vector<Table> functions_;
  std::optional<std::size_t> star_index_;
};

/// A product class G^A: each action independently picks a member of the base
/// class G, so f(x, a) = g_{choice[a]}(x).
class ProductFunctionClass {
 public:
  ProductFunctionClass() = default;
  ProductFunctionClass(int n_actions, std::vector<Eigen::VectorXd> base,
                       std::optional<std::vector<std::size_t>> star_choice = std::nullopt);

  int n_contexts() const { return n_contexts_; }
  int n_actions() const { return n_actions_; }
  const std::vector<Eigen::VectorXd>& base() const { return base_; }
  const std::optional<std::vector<std::size_t>>& star_choice() const { return star_choice_; }

  Table table(const std::vector<std::size_t>& choice) const;
  /// Expands every member. Only sensible for small |G|^A.
  FiniteFunctionClass materialize() const;

 private:
  int n_contexts_ = 0;
  int n_actions_ = 0;
  std::vector<Eigen::VectorXd> base_;
  std::optional<std::vector<std::size_t>> star_choice_;
};

/// f_w(x, a) = <w, phi(x, a)>. The weight domain is either all of R^d or an
/// explicit finite list of weights (one per row of `weights`).
class LinearFunctionClass {
 public:
  LinearFunctionClass() = default;
  /// `features` has one row per (context, action), row index x * A + a.
  LinearFunctionClass(int n_contexts, int n_actions, Eigen::MatrixXd features,
                      std::optional<Eigen::MatrixXd> weights = std::nullopt,
                      std::optional<Eigen::VectorXd> star_weight = std::nullopt);

  int n_contexts() const { return n_contexts_; }
  int n_actions() const { return n_actions_; }
  int dim() const { return static_cast<int>(features_.cols()); }
  bool unconstrained() const { return !weights_.has_value(); }
  const Eigen::MatrixXd& features() const { return features_; }
  Eigen::VectorXd feature(Context x, Action a) const {
    return features_.row(static_cast<Eigen::Index>(x) * n_actions_ + a).transpose();
  }
  const std::optional<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::optional<Eigen::VectorXd>& star_weight() const { return star_weight_; }

  Table table(const Eigen::Ref<const Eigen::VectorXd>& w) const;
  /// Requires a finite weight list.
  FiniteFunctionClass materialize() const;

 private:
  int n_contexts_ = 0;
  int n_actions_ = 0;
  Eigen::MatrixXd features_;
  std::optional<Eigen::MatrixXd> weights_;
  std::optional<Eigen::VectorXd> star_weight_;
};

using FunctionClass = std::variant<FiniteFunctionClass, ProductFunctionClass, LinearFunctionClass>;

int n_contexts(const FunctionClass& cls);
int n_actions(const FunctionClass& cls);
/// The realizable f*, when the class designates one.
std::optional<Table> star_table(const FunctionClass& cls);
/// log |F|, with d log T substituted for unconstrained linear classes.
double log_class_size(const FunctionClass& cls, int horizon);

enum class RewardLaw { Bernoulli, Gaussian };

std::string to_string(RewardLaw law);
RewardLaw reward_law_from_string(const std::string& s);

/// A contextual bandit instance: context law D plus reward law with mean f*.
struct CBInstance {
  FunctionClass function_class;
  Eigen::VectorXd context_dist;
  RewardLaw law = RewardLaw::Bernoulli;
  Table mean;
  std::map<std::string, double> metadata;

  int n_contexts() const { return static_cast<int>(mean.rows()); }
  int n_actions() const { return static_cast<int>(mean.cols()); }
};

/// Builds an instance whose mean table is the class's designated f*.
/// Throws InvariantViolation if the class has no f* or D is not a distribution.
CBInstance make_instance(FunctionClass cls, Eigen::VectorXd context_dist,
                         RewardLaw law = RewardLaw::Bernoulli);
/// Re-checks every instance invariant; throws InvariantViolation on failure.
void validate(const CBInstance& instance);

struct Policy {
  std::vector<Action> actions;  // indexed by context

  Action operator()(Context x) const { return actions[static_cast<std::size_t>(x)]; }
  bool operator==(const Policy&) const = default;
};

/// argmax_a f(x, a), ties to the lowest action index.
Action induced_policy(const Table& f, Context x);
Action greedy_action(const Eigen::Ref<const Eigen::RowVectorXd>& values);
Policy induced_policy(const Table& f);

/// min_x f(x, pi*(x)) - max_{a != pi*(x)} f(x, a); zero if any context ties.
double uniform_gap(const Table& mean);
double uniform_gap(const CBInstance& instance);

double policy_value(const CBInstance& instance, const Policy& pi);
double expected_regret_of_policy(const CBInstance& instance, const Policy& pi);
/// Conditional expected regret at x of playing the action distribution p.
double instantaneous_regret(const Table& mean, Context x, const Eigen::Ref<const Eigen::VectorXd>& p);

}  // namespace cblab
