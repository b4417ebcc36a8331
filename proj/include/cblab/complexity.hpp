#pragma once

#include "cblab/core.hpp"

#include <cstdint>

namespace cblab {

/// Feasibility checks allowed per combinatorial measure.
inline constexpr std::uint64_t kSearchCap = 10'000'000;

class SearchCapExceeded : public Error {
 public:
  SearchCapExceeded(int lower_bound)
      : Error("search cap exceeded; best lower bound " + std::to_string(lower_bound)), lower_bound(lower_bound) {}
  int lower_bound;
};

/// Result of a combinatorial search. When `exact` is false the value is the
/// best witness found before the cap, hence a lower bound.
struct SearchResult {
  int value = 0;
  bool exact = true;
  std::uint64_t checks = 0;

  int require_exact() const {
    if (!exact) throw SearchCapExceeded(value);
    return value;
  }
};

/// Distinct induced policies of a list of value tables, in first-seen order.
std::vector<Policy> induced_policies(const std::vector<Table>& functions);

/// sup_{eps >= eps0} P_D(exists pi in Pi_eps : pi(x) != pi*(x)) / eps,
/// Pi_eps = {pi : P_D(pi != pi*) <= eps}.
double policy_disagreement(const std::vector<Policy>& policies, const Policy& star,
                           const Eigen::VectorXd& dist, double eps0);
/// Same with Pi_eps = {pi : R(pi*) - R(pi) <= eps} under mean rewards `mean`.
double csc_disagreement(const std::vector<Policy>& policies, const Policy& star, const Table& mean,
                        const Eigen::VectorXd& dist, double eps0);

/// Action distribution per context: rows sum to one.
using ActionLaw = Eigen::MatrixXd;

/// sup_{Delta > delta0, eps > eps0} (Delta/eps)^2 P_{D,p}(exists f : |f - f*| > Delta, ||f - f*||_{D,p} <= eps).
double value_disagreement_at_p(const std::vector<Table>& functions, const Table& star, const Eigen::VectorXd& dist,
                               const ActionLaw& p, double delta0, double eps0);

struct GridBound {
  double value = 0.0;     // lower bound on the sup over p
  int resolution = 0;     // simplex grid step 1/resolution per context
  std::size_t points = 0; // action laws evaluated
  bool exhaustive = true; // false when the product grid was subsampled
};

/// Lower bound on sup_p of the fixed-p coefficient over a per-context simplex
/// grid. Product grids above `max_points` are subsampled with a fixed seed.
GridBound value_disagreement(const std::vector<Table>& functions, const Table& star, const Eigen::VectorXd& dist,
                             double delta0, double eps0, int resolution, std::size_t max_points = 200000);

SearchResult policy_star_weak(const std::vector<Policy>& policies, const Policy& star, int n_actions,
                              std::uint64_t cap = kSearchCap);
SearchResult policy_star_strong(const std::vector<Policy>& policies, const Policy& star, int n_actions,
                                std::uint64_t cap = kSearchCap);
SearchResult policy_eluder(const std::vector<Policy>& policies, const Policy& star, int n_actions,
                           std::uint64_t cap = kSearchCap);

/// sup over Delta > delta0 of the star number / eluder dimension at scale Delta.
SearchResult value_star(const std::vector<Table>& functions, const Table& star, double delta0,
                        std::uint64_t cap = kSearchCap);
SearchResult value_eluder(const std::vector<Table>& functions, const Table& star, double delta0,
                          std::uint64_t cap = kSearchCap);

/// max(1, sup_{f* in F} sup_{eps > eps0} E_{x ~ psi, a ~ unif} sup{|f - f*|^2 : f in star(F, f*),
/// ||f - f*||_psi <= eps} / eps^2) for a finite class over one layer's observations.
double rl_disagreement(const std::vector<Table>& functions, const Eigen::VectorXd& emission, double eps0);
/// Unconstrained linear classes: the ratio equals E[phi' Sigma^+ phi] = rank(Sigma), floored at 1.
double rl_disagreement_linear(const Eigen::MatrixXd& features, int n_actions, const Eigen::VectorXd& emission);

struct ComplexityParams {
  double eps0 = 0.01;
  double delta0 = 0.0;
  int p_resolution = 4;
  std::optional<ActionLaw> p;  // fixed action law for value_dis_at_p; uniform if absent
  std::uint64_t search_cap = kSearchCap;
};

struct ComplexityReport {
  double policy_dis = 0.0;
  double csc_dis = 0.0;
  GridBound value_dis;
  double value_dis_at_p = 0.0;
  SearchResult policy_star_weak;
  SearchResult policy_star_strong;
  SearchResult value_star;
  SearchResult value_eluder;
  SearchResult policy_eluder;
  std::vector<double> rl_dis;  // per latent state, when emissions are supplied
  ComplexityParams params;
};

ComplexityReport complexity_report(const FiniteFunctionClass& cls, const Eigen::VectorXd& dist,
                                   const ComplexityParams& params,
                                   const std::vector<Eigen::VectorXd>& emissions = {});

}  // namespace cblab
