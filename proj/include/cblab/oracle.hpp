#pragma once

#include "cblab/core.hpp"

#include <memory>
#include <span>

namespace cblab {

class EmptyClass : public Error {
 public:
  EmptyClass() : Error("function class is empty") {}
};

class RangeViolation : public Error {
 public:
  using Error::Error;
};

class PrecisionUnreachable : public Error {
 public:
  using Error::Error;
};

/// Weighted squared-loss data reduced to per-(x, a) sufficient statistics:
///   loss(f) = sum_{x,a} counts(x,a) f(x,a)^2 - 2 sums(x,a) f(x,a) + sum_sq.
struct RegressionData {
  Table counts;
  Table sums;
  double sum_sq = 0.0;

  RegressionData() = default;
  RegressionData(int n_contexts, int n_actions)
      : counts(Table::Zero(n_contexts, n_actions)), sums(Table::Zero(n_contexts, n_actions)) {}

  void add(Context x, Action a, double target, double weight = 1.0) {
    counts(x, a) += weight;
    sums(x, a) += weight * target;
    sum_sq += weight * target * target;
  }

  static RegressionData from_history(std::span<const Observation> history, int n_contexts, int n_actions);
  static RegressionData from_examples(std::span<const WeightedExample> examples, int n_contexts,
                                      int n_actions);

  double loss(const Table& f) const {
    return (counts.array() * f.array().square() - 2.0 * sums.array() * f.array()).sum() + sum_sq;
  }
  double total_weight() const { return counts.sum(); }
};

/// Result of a regression call. `values` is always populated; the other
/// fields identify the minimizer within its class when that makes sense.
struct Fit {
  Table values;
  double loss = 0.0;
  std::optional<std::size_t> index;               // finite classes
  std::optional<std::vector<std::size_t>> choice;  // product classes, one base index per action
  std::optional<Eigen::VectorXd> weights;          // linear classes
  std::optional<double> star_t;                    // star-hull fits: values = center + t (f - center)
};

struct OracleOptions {
  /// Largest |weight| and |target| accepted by erm().
  double range_bound = 1.0;
  /// Below this many function evaluations, confidence bounds enumerate the version space.
  std::size_t enumeration_cap = 10000;
  /// Ridge term for unconstrained linear classes (numerical stability only).
  double ridge = 1e-8;
};

enum class Bound { High, Low };

enum class BoundMethod {
  Auto,       // enumeration when cheap and possible, otherwise search
  Enumerate,  // exact version-space enumeration (finite and product classes)
  Search,     // bisection over regularized oracle calls
};

class VersionSpace;

/// Weighted least-squares regression oracle over a fixed function class.
/// Stateless after construction; safe to share across threads.
class RegressionOracle {
 public:
  explicit RegressionOracle(std::shared_ptr<const FunctionClass> cls, OracleOptions options = {});
  explicit RegressionOracle(FunctionClass cls, OracleOptions options = {})
      : RegressionOracle(std::make_shared<const FunctionClass>(std::move(cls)), options) {}

  const FunctionClass& function_class() const { return *cls_; }
  const OracleOptions& options() const { return options_; }
  int n_contexts() const { return cblab::n_contexts(*cls_); }
  int n_actions() const { return cblab::n_actions(*cls_); }
  bool is_product() const { return std::holds_alternative<ProductFunctionClass>(*cls_); }
  /// True for classes where the Lagrangian search is exact (unconstrained linear).
  bool is_convex() const;
  /// Number of function evaluations one enumeration pass costs.
  std::size_t enumeration_cost() const;

  /// argmin_f sum w (f(x,a) - y)^2 with range checks. Ties go to the lowest index.
  Fit erm(std::span<const WeightedExample> examples) const;
  /// Same minimizer on pre-aggregated data; no range checks.
  Fit fit(const RegressionData& data) const;

  /// Indices {f : loss(f) <= min loss + beta}. Finite classes only.
  std::vector<std::size_t> version_space(const RegressionData& data, double beta) const;
  std::vector<std::size_t> version_space(std::span<const Observation> history, double beta) const;

  VersionSpace make_version_space(RegressionData data, double beta, double alpha,
                                  BoundMethod method = BoundMethod::Auto) const;

  double conf_bound(Bound kind, Context x, Action a, std::span<const Observation> history, double beta,
                    double alpha) const;
  double conf_bound_diff(Context x, Action a1, Action a2, std::span<const Observation> history, double beta,
                         double alpha) const;
  std::vector<Action> candidate_set(Context x, std::span<const Observation> history, double beta,
                                    double alpha) const;
  double conf_width(Context x, std::span<const Observation> history, double beta, double alpha) const;

  /// Approximate minimizer over star(F, center) = {center + t (f - center)}.
  /// Each point of a t-grid is solved with one rescaled oracle call.
  Fit star_hull_erm(const Table& center, std::span<const WeightedExample> examples, double alpha) const;

  /// sup f(x, a) over {f in F (or star(F, center)) : ||f - center||_Z <= radius},
  /// where ||g||_Z^2 = sum counts(x,a) g(x,a)^2. Enumeration for finite classes;
  /// unconstrained linear classes reduce to a High confidence bound.
  double ball_upper_bound(Context x, Action a, const Fit& center, const RegressionData& data,
                          double radius, bool star_hull, double alpha) const;

 private:
  friend class VersionSpace;
  std::shared_ptr<const FunctionClass> cls_;
  OracleOptions options_;
  std::shared_ptr<const FiniteFunctionClass> enumerable_;  // finite view, null for R^d and product classes
};

/// The confidence set {f : loss(f) <= min loss + beta} on fixed data, with the
/// confidence-bound queries of the oracle reductions. Enumerated members are
/// cached at construction; search queries run per call.
class VersionSpace {
 public:
  VersionSpace(const RegressionOracle& oracle, RegressionData data, double beta, double alpha,
               BoundMethod method = BoundMethod::Auto);

  const Fit& center() const { return center_; }
  double beta() const { return beta_; }
  double alpha() const { return alpha_; }
  bool enumerated() const { return enumerated_; }
  /// Member indices (finite classes, enumeration mode).
  const std::vector<std::size_t>& members() const { return members_; }
  /// Per-action member indices into the base class (product classes).
  const std::vector<std::vector<std::size_t>>& product_members() const { return product_members_; }

  double bound(Bound kind, Context x, Action a) const;
  /// Within 2 alpha of inf_f (f(x,a1) - f(x,a2)); exactly 0 when a1 == a2.
  double bound_diff(Context x, Action a1, Action a2) const;
  std::vector<Action> candidate_set(Context x) const;
  /// 1{|candidate set| > 1} * max_a |High(x,a) - Low(x,a)|.
  double width(Context x) const;

  std::size_t search_calls() const { return search_calls_; }

 private:
  double search_bound(Bound kind, Context x, Action a) const;
  double search_diff(Context x, Action a1, Action a2) const;
  bool feasible(const Fit& f) const { return data_.loss(f.values) <= threshold_; }

  const RegressionOracle* oracle_;
  RegressionData data_;
  double beta_;
  double alpha_;
  bool enumerated_ = false;
  Fit center_;
  double threshold_ = 0.0;
  std::vector<std::size_t> members_;
  std::vector<std::vector<std::size_t>> product_members_;
  Table upper_;
  Table lower_;
  mutable std::size_t search_calls_ = 0;
};

}  // namespace cblab
