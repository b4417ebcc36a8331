#include "cblab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cblab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Slack on the feasibility test so that members sitting exactly on the
// boundary are not lost to rounding in the aggregated loss.
double loss_slack(double loss) { return 1e-9 * std::max(1.0, std::abs(loss)); }

int bisection_cap(double span, double alpha) {
  return static_cast<int>(std::ceil(std::log2(std::max(span / alpha, 1.0)))) + 8;
}

// Per-action squared loss of a base function, dropping the constant term.
double action_loss(const RegressionData& data, Action a, const Eigen::VectorXd& g) {
  return (data.counts.col(a).array() * g.array().square() - 2.0 * data.sums.col(a).array() * g.array()).sum();
}

}  // namespace

RegressionData RegressionData::from_history(std::span<const Observation> history, int n_contexts,
                                            int n_actions) {
  RegressionData d(n_contexts, n_actions);
  for (const auto& o : history) d.add(o.context, o.action, o.reward);
  return d;
}

RegressionData RegressionData::from_examples(std::span<const WeightedExample> examples, int n_contexts,
                                             int n_actions) {
  RegressionData d(n_contexts, n_actions);
  for (const auto& e : examples) d.add(e.context, e.action, e.target, e.weight);
  return d;
}

RegressionOracle::RegressionOracle(std::shared_ptr<const FunctionClass> cls, OracleOptions options)
    : cls_(std::move(cls)), options_(options) {
  if (!cls_) throw EmptyClass();
  if (const auto* f = std::get_if<FiniteFunctionClass>(cls_.get())) {
    if (f->size() == 0) throw EmptyClass();
    enumerable_ = std::shared_ptr<const FiniteFunctionClass>(cls_, f);
  } else if (const auto* l = std::get_if<LinearFunctionClass>(cls_.get())) {
    if (l->weights()) enumerable_ = std::make_shared<const FiniteFunctionClass>(l->materialize());
  } else if (std::get<ProductFunctionClass>(*cls_).base().empty()) {
    throw EmptyClass();
  }
}

bool RegressionOracle::is_convex() const {
  const auto* l = std::get_if<LinearFunctionClass>(cls_.get());
  return l && l->unconstrained();
}

std::size_t RegressionOracle::enumeration_cost() const {
  const auto cells = static_cast<std::size_t>(n_contexts()) * static_cast<std::size_t>(n_actions());
  if (enumerable_) return enumerable_->size() * cells;
  if (const auto* p = std::get_if<ProductFunctionClass>(cls_.get())) return p->base().size() * cells;
  return std::numeric_limits<std::size_t>::max();
}

Fit RegressionOracle::erm(std::span<const WeightedExample> examples) const {
  const double b = options_.range_bound;
  for (const auto& e : examples) {
    if (!(std::abs(e.weight) <= b) || !(std::abs(e.target) <= b) || e.weight < 0.0)
      throw RangeViolation("example weight or target outside [-b, b] (or negative weight)");
    if (e.context < 0 || e.context >= n_contexts() || e.action < 0 || e.action >= n_actions())
      throw RangeViolation("example (context, action) outside the class domain");
  }
  return fit(RegressionData::from_examples(examples, n_contexts(), n_actions()));
}

Fit RegressionOracle::fit(const RegressionData& data) const {
  Fit out;
  if (enumerable_) {
    const auto& cls = *enumerable_;
    double best = kInf;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < cls.size(); ++i) {
      const double l = data.loss(cls[i]);
      if (l < best) {
        best = l;
        arg = i;
      }
    }
    out.values = cls[arg];
    out.loss = best;
    out.index = arg;
    if (const auto* l = std::get_if<LinearFunctionClass>(cls_.get()))
      out.weights = l->weights()->row(static_cast<Eigen::Index>(arg)).transpose();
    return out;
  }
  if (const auto* p = std::get_if<ProductFunctionClass>(cls_.get())) {
    std::vector<std::size_t> choice(static_cast<std::size_t>(p->n_actions()), 0);
    for (int a = 0; a < p->n_actions(); ++a) {
      double best = kInf;
      for (std::size_t g = 0; g < p->base().size(); ++g) {
        const double l = action_loss(data, a, p->base()[g]);
        if (l < best) {
          best = l;
          choice[static_cast<std::size_t>(a)] = g;
        }
      }
    }
    out.values = p->table(choice);
    out.loss = data.loss(out.values);
    out.choice = std::move(choice);
    return out;
  }
  // Unconstrained linear: ridge-stabilized normal equations.
  const auto& lin = std::get<LinearFunctionClass>(*cls_);
  const int d = lin.dim();
  Eigen::MatrixXd gram = options_.ridge * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  for (int x = 0; x < lin.n_contexts(); ++x)
    for (int a = 0; a < lin.n_actions(); ++a) {
      const double n = data.counts(x, a);
      if (n == 0.0 && data.sums(x, a) == 0.0) continue;
      const auto phi = lin.features().row(static_cast<Eigen::Index>(x) * lin.n_actions() + a);
      gram.noalias() += n * phi.transpose() * phi;
      rhs.noalias() += data.sums(x, a) * phi.transpose();
    }
  Eigen::VectorXd w = gram.ldlt().solve(rhs);
  out.values = lin.table(w);
  out.loss = data.loss(out.values);
  out.weights = std::move(w);
  return out;
}

std::vector<std::size_t> RegressionOracle::version_space(const RegressionData& data, double beta) const {
  if (!enumerable_) throw Error("version_space() enumerates finite classes only");
  const auto& cls = *enumerable_;
  std::vector<double> losses(cls.size());
  double best = kInf;
  for (std::size_t i = 0; i < cls.size(); ++i) {
    losses[i] = data.loss(cls[i]);
    best = std::min(best, losses[i]);
  }
  const double threshold = best + beta + loss_slack(best);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < cls.size(); ++i)
    if (losses[i] <= threshold) members.push_back(i);
  return members;
}

std::vector<std::size_t> RegressionOracle::version_space(std::span<const Observation> history,
                                                         double beta) const {
  return version_space(RegressionData::from_history(history, n_contexts(), n_actions()), beta);
}

VersionSpace RegressionOracle::make_version_space(RegressionData data, double beta, double alpha,
                                                  BoundMethod method) const {
  return VersionSpace(*this, std::move(data), beta, alpha, method);
}

double RegressionOracle::conf_bound(Bound kind, Context x, Action a, std::span<const Observation> history,
                                    double beta, double alpha) const {
  return make_version_space(RegressionData::from_history(history, n_contexts(), n_actions()), beta, alpha)
      .bound(kind, x, a);
}

double RegressionOracle::conf_bound_diff(Context x, Action a1, Action a2, std::span<const Observation> history,
                                         double beta, double alpha) const {
  if (a1 == a2) return 0.0;
  return make_version_space(RegressionData::from_history(history, n_contexts(), n_actions()), beta, alpha)
      .bound_diff(x, a1, a2);
}

std::vector<Action> RegressionOracle::candidate_set(Context x, std::span<const Observation> history,
                                                    double beta, double alpha) const {
  return make_version_space(RegressionData::from_history(history, n_contexts(), n_actions()), beta, alpha)
      .candidate_set(x);
}

double RegressionOracle::conf_width(Context x, std::span<const Observation> history, double beta,
                                    double alpha) const {
  return make_version_space(RegressionData::from_history(history, n_contexts(), n_actions()), beta, alpha)
      .width(x);
}

Fit RegressionOracle::star_hull_erm(const Table& center, std::span<const WeightedExample> examples,
                                    double alpha) const {
  const RegressionData data = RegressionData::from_examples(examples, n_contexts(), n_actions());
  if (is_convex()) {
    // R^d already contains every segment through the center.
    Fit f = fit(data);
    f.star_t = 1.0;
    return f;
  }

  // Largest |f - center| over the class bounds the curvature of t -> loss.
  double spread = 0.0;
  if (enumerable_) {
    for (const auto& f : enumerable_->functions()) spread = std::max(spread, (f - center).cwiseAbs().maxCoeff());
  } else {
    const auto& p = std::get<ProductFunctionClass>(*cls_);
    for (int a = 0; a < p.n_actions(); ++a)
      for (const auto& g : p.base()) spread = std::max(spread, (g - center.col(a)).cwiseAbs().maxCoeff());
  }
  const double total = data.total_weight();

  Fit best;
  best.values = center;
  best.loss = data.loss(center);
  best.star_t = 0.0;
  if (spread == 0.0 || total == 0.0) return best;

  // For each f the loss along t is a quadratic with curvature <= total * spread^2,
  // so the nearest grid point to its minimizer costs at most that times step^2 / 4.
  const double step = 2.0 * std::sqrt(alpha / (total * spread * spread));
  const double n_points = std::ceil(1.0 / step);
  if (n_points > 1e7) throw PrecisionUnreachable("star-hull grid would exceed 1e7 points");
  const int n = static_cast<int>(n_points);

  const Table weighted_center = data.counts.cwiseProduct(center);
  for (int k = 1; k <= n; ++k) {
    const double t = static_cast<double>(k) / n;
    // Weights w t^2, targets (y - (1 - t) center) / t.
    RegressionData scaled;
    scaled.counts = data.counts * (t * t);
    scaled.sums = t * (data.sums - (1.0 - t) * weighted_center);
    Fit f = fit(scaled);
    Table values = center + t * (f.values - center);
    const double l = data.loss(values);
    if (l < best.loss) {
      best = std::move(f);
      best.values = std::move(values);
      best.loss = l;
      best.star_t = t;
    }
  }
  return best;
}

double RegressionOracle::ball_upper_bound(Context x, Action a, const Fit& center, const RegressionData& data,
                                          double radius, bool star_hull, double alpha) const {
  const Table& c = center.values;
  const double r2 = radius * radius;
  auto value_at = [&](double dist2, double delta) {
    if (!star_hull) return dist2 <= r2 * (1.0 + 1e-12) + 1e-15 ? c(x, a) + delta : -kInf;
    const double t = dist2 <= r2 ? 1.0 : radius / std::sqrt(dist2);
    return c(x, a) + t * delta;
  };

  if (enumerable_) {
    double best = c(x, a);
    for (const auto& f : enumerable_->functions()) {
      const double dist2 = (data.counts.array() * (f - c).array().square()).sum();
      best = std::max(best, value_at(dist2, f(x, a) - c(x, a)));
    }
    return best;
  }
  if (const auto* p = std::get_if<ProductFunctionClass>(cls_.get())) {
    // Other actions contribute independently; take their closest members.
    auto dist_a = [&](int b, const Eigen::VectorXd& g) {
      return (data.counts.col(b).array() * (g - c.col(b)).array().square()).sum();
    };
    double others = 0.0;
    for (int b = 0; b < p->n_actions(); ++b) {
      if (b == a) continue;
      double m = kInf;
      for (const auto& g : p->base()) m = std::min(m, dist_a(b, g));
      others += m;
    }
    double best = c(x, a);
    for (const auto& g : p->base()) best = std::max(best, value_at(others + dist_a(a, g), g(x) - c(x, a)));
    return best;
  }
  // Convex class: the ball is the version space of data whose minimizer is the center.
  RegressionData centered;
  centered.counts = data.counts;
  centered.sums = data.counts.cwiseProduct(c);
  centered.sum_sq = (data.counts.array() * c.array().square()).sum();
  return VersionSpace(*this, std::move(centered), r2, alpha, BoundMethod::Search).bound(Bound::High, x, a);
}

VersionSpace::VersionSpace(const RegressionOracle& oracle, RegressionData data, double beta, double alpha,
                           BoundMethod method)
    : oracle_(&oracle), data_(std::move(data)), beta_(beta), alpha_(alpha) {
  if (!(alpha > 0.0)) throw Error("precision alpha must be positive");
  if (!(beta >= 0.0)) throw Error("radius beta must be nonnegative");
  center_ = oracle.fit(data_);
  threshold_ = center_.loss + beta_ + loss_slack(center_.loss);

  const bool can_enumerate = oracle.enumerable_ || oracle.is_product();
  if (method == BoundMethod::Enumerate && !can_enumerate)
    throw Error("enumeration requested for an unconstrained linear class");
  enumerated_ = method == BoundMethod::Enumerate ||
                (method == BoundMethod::Auto &&
                 (oracle.is_product() || (oracle.enumerable_ && oracle.enumeration_cost() <= oracle.options().enumeration_cap)));
  if (!enumerated_) return;

  const int nx = oracle.n_contexts();
  const int na = oracle.n_actions();
  upper_ = Table::Constant(nx, na, -kInf);
  lower_ = Table::Constant(nx, na, kInf);
  if (oracle.enumerable_) {
    members_ = oracle.version_space(data_, beta_);
    for (auto i : members_) {
      upper_ = upper_.cwiseMax((*oracle.enumerable_)[i]);
      lower_ = lower_.cwiseMin((*oracle.enumerable_)[i]);
    }
    return;
  }
  const auto& p = std::get<ProductFunctionClass>(oracle.function_class());
  product_members_.resize(static_cast<std::size_t>(na));
  for (int a = 0; a < na; ++a) {
    std::vector<double> losses;
    double best = kInf;
    for (const auto& g : p.base()) {
      losses.push_back(action_loss(data_, a, g));
      best = std::min(best, losses.back());
    }
    const double threshold = best + beta_ + loss_slack(best);
    for (std::size_t g = 0; g < losses.size(); ++g) {
      if (losses[g] > threshold) continue;
      product_members_[static_cast<std::size_t>(a)].push_back(g);
      upper_.col(a) = upper_.col(a).cwiseMax(p.base()[g]);
      lower_.col(a) = lower_.col(a).cwiseMin(p.base()[g]);
    }
  }
}

double VersionSpace::bound(Bound kind, Context x, Action a) const {
  if (enumerated_) return kind == Bound::High ? upper_(x, a) : lower_(x, a);
  return search_bound(kind, x, a);
}

double VersionSpace::bound_diff(Context x, Action a1, Action a2) const {
  if (a1 == a2) return 0.0;
  if (!enumerated_) return search_diff(x, a1, a2);
  if (oracle_->is_product()) return lower_(x, a1) - upper_(x, a2);
  double best = kInf;
  for (auto i : members_) {
    const auto& f = (*oracle_->enumerable_)[i];
    best = std::min(best, f(x, a1) - f(x, a2));
  }
  return best;
}

std::vector<Action> VersionSpace::candidate_set(Context x) const {
  const int na = oracle_->n_actions();
  std::vector<Action> out;
  if (oracle_->is_product()) {
    double floor = -kInf;
    for (int a = 0; a < na; ++a) floor = std::max(floor, bound(Bound::Low, x, a));
    for (int a = 0; a < na; ++a)
      if (bound(Bound::High, x, a) >= floor) out.push_back(a);
    return out;
  }
  Action top = 0;
  double top_value = -kInf;
  for (int a = 0; a < na; ++a) {
    const double h = bound(Bound::High, x, a);
    if (h > top_value) {
      top_value = h;
      top = a;
    }
  }
  for (int a = 0; a < na; ++a)
    if (bound_diff(x, top, a) <= 0.0) out.push_back(a);
  return out;
}

double VersionSpace::width(Context x) const {
  if (candidate_set(x).size() <= 1) return 0.0;
  double w = 0.0;
  for (int a = 0; a < oracle_->n_actions(); ++a)
    w = std::max(w, std::abs(bound(Bound::High, x, a) - bound(Bound::Low, x, a)));
  return w;
}

// Level bisection: one heavily weighted example pins f(x, a) near a target
// level; the oracle then returns the best fit at that level, and we keep the
// most extreme value among feasible fits.
double VersionSpace::search_bound(Bound kind, Context x, Action a) const {
  const double sign = kind == Bound::High ? 1.0 : -1.0;
  const double v0 = center_.values(x, a);
  double best = v0;
  const double heavy = std::max(1.0, data_.total_weight()) / (alpha_ * alpha_);

  auto probe = [&](double level) {
    RegressionData pinned = data_;
    pinned.add(x, a, level, heavy);
    ++search_calls_;
    const Fit f = oracle_->fit(pinned);
    if (!feasible(f)) return false;
    best = sign > 0 ? std::max(best, f.values(x, a)) : std::min(best, f.values(x, a));
    return true;
  };

  double lo = v0;  // feasible level
  double hi;
  if (oracle_->is_convex()) {
    double step = 1.0;
    int doublings = 0;
    while (probe(v0 + sign * step)) {
      lo = v0 + sign * step;
      step *= 2.0;
      if (++doublings > 64) throw PrecisionUnreachable("confidence bound is unbounded");
    }
    hi = v0 + sign * step;
  } else {
    // Finite and product values lie in [0, 1].
    hi = sign > 0 ? 1.0 : 0.0;
    if (probe(hi)) return best;
  }
  const int cap = bisection_cap(std::abs(hi - lo), alpha_);
  for (int it = 0; std::abs(hi - lo) > alpha_; ++it) {
    if (it >= cap) throw PrecisionUnreachable("bound bisection exceeded its iteration cap");
    const double mid = 0.5 * (lo + hi);
    (probe(mid) ? lo : hi) = mid;
  }
  return best;
}

// Lagrangian search for inf f(x,a1) - f(x,a2): add the penalty
// (alpha/2)(f(a1) + 1/alpha)^2 + (alpha/2)(f(a2) - 1/alpha)^2 with weight omega
// and grow omega until the fit leaves the version space.
double VersionSpace::search_diff(Context x, Action a1, Action a2) const {
  double best = center_.values(x, a1) - center_.values(x, a2);
  auto penalty = [&](const Table& f) {
    const double u = f(x, a1) + 1.0 / alpha_;
    const double v = f(x, a2) - 1.0 / alpha_;
    return 0.5 * alpha_ * (u * u + v * v);
  };
  double last_penalty = penalty(center_.values);
  auto probe = [&](double omega, double& pen) {
    RegressionData d = data_;
    d.add(x, a1, -1.0 / alpha_, omega * alpha_ / 2.0);
    d.add(x, a2, 1.0 / alpha_, omega * alpha_ / 2.0);
    ++search_calls_;
    const Fit f = oracle_->fit(d);
    pen = penalty(f.values);
    if (!feasible(f)) return false;
    best = std::min(best, f.values(x, a1) - f.values(x, a2));
    return true;
  };

  double lo = 0.0, hi = 1.0, pen_lo = last_penalty, pen_hi = 0.0;
  int doublings = 0;
  while (probe(hi, pen_hi)) {
    lo = hi;
    pen_lo = pen_hi;
    hi *= 2.0;
    // Still feasible with an overwhelming penalty: the infimum is attained.
    if (++doublings > 64) return best;
  }
  const int cap = bisection_cap(std::abs(pen_lo - pen_hi), alpha_) + 64;
  for (int it = 0; pen_lo - pen_hi > alpha_; ++it) {
    if (it >= cap) throw PrecisionUnreachable("difference bisection exceeded its iteration cap");
    const double mid = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
    double pen_mid = 0.0;
    if (probe(mid, pen_mid)) {
      lo = mid;
      pen_lo = pen_mid;
    } else {
      hi = mid;
      pen_hi = pen_mid;
    }
  }
  return best;
}

}  // namespace cblab
