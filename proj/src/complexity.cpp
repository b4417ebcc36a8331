#include "cblab/complexity.hpp"

#include "cblab/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <functional>
#include <unordered_set>

namespace cblab {

namespace {

constexpr double kTol = 1e-12;

void check_dist(const Eigen::VectorXd& dist, int n_contexts) {
  if (dist.size() != n_contexts) throw Error("context distribution has the wrong length");
}

void check_eps(double eps0) {
  if (!(eps0 >= 0.0)) throw Error("eps0 must be nonnegative");
}

double mass(const Policy& a, const Policy& b, const Eigen::VectorXd& dist) {
  double m = 0.0;
  for (std::size_t x = 0; x < a.actions.size(); ++x)
    if (a.actions[x] != b.actions[x]) m += dist(static_cast<Eigen::Index>(x));
  return m;
}

// Shared sweep for both policy coefficients: `radius[i]` places policy i in
// Pi_eps once eps >= radius[i].
double disagreement_sweep(const std::vector<Policy>& policies, const Policy& star, const Eigen::VectorXd& dist,
                          const std::vector<double>& radius, double eps0) {
  std::vector<double> eps;
  if (eps0 > 0.0) eps.push_back(eps0);
  for (double r : radius)
    if (r > eps0) eps.push_back(r);
  double best = 0.0;
  for (double e : eps) {
    double dis = 0.0;
    for (Eigen::Index x = 0; x < dist.size(); ++x) {
      for (std::size_t i = 0; i < policies.size(); ++i) {
        if (radius[i] <= e && policies[i](static_cast<Context>(x)) != star(static_cast<Context>(x))) {
          dis += dist(x);
          break;
        }
      }
    }
    best = std::max(best, dis / e);
  }
  return best;
}

// Witness with a per-element cost row; a witness for element i is valid on a
// set S when the summed cost over S (excluding i) stays within budget.
using CostRow = std::vector<double>;

struct Problem {
  int n = 0;
  std::vector<std::vector<CostRow>> witnesses;  // per element
  double budget = 0.0;
  bool strict = false;

  bool ok(double v) const { return strict ? v < budget - kTol : v <= budget + kTol; }
};

// Drop duplicate and dominated witnesses; neither changes any feasibility answer.
void prune(Problem& p) {
  for (auto& ws : p.witnesses) {
    std::sort(ws.begin(), ws.end());
    ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
    std::vector<CostRow> kept;
    for (std::size_t i = 0; i < ws.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < ws.size() && !dominated; ++j) {
        if (i == j) continue;
        bool le = true;
        for (int k = 0; k < p.n && le; ++k) le = ws[j][k] <= ws[i][k];
        // equal rows were removed, so le means strictly better somewhere
        dominated = le;
      }
      if (!dominated) kept.push_back(ws[i]);
    }
    ws = std::move(kept);
  }
}

// Largest subset S where every member keeps a valid witness (hereditary).
SearchResult star_search(Problem p, std::uint64_t cap) {
  prune(p);
  std::vector<int> elems;
  for (int i = 0; i < p.n; ++i)
    if (!p.witnesses[i].empty()) elems.push_back(i);

  SearchResult res;
  struct Member {
    int e;
    std::vector<double> acc;  // accumulated cost per witness, negative when dead
  };
  std::vector<Member> members;
  bool capped = false;

  std::function<void(std::size_t)> dfs = [&](std::size_t idx) {
    if (capped) return;
    res.value = std::max(res.value, static_cast<int>(members.size()));
    if (members.size() + (elems.size() - idx) <= static_cast<std::size_t>(res.value)) return;
    if (idx == elems.size()) return;
    const int e = elems[idx];
    if (++res.checks > cap) {
      capped = true;
      return;
    }
    // try adding e
    std::vector<Member> saved = members;
    bool valid = true;
    for (auto& m : members) {
      bool alive = false;
      const auto& ws = p.witnesses[m.e];
      for (std::size_t w = 0; w < ws.size(); ++w) {
        if (m.acc[w] < 0) continue;
        m.acc[w] += ws[w][e];
        if (p.ok(m.acc[w]))
          alive = true;
        else
          m.acc[w] = -1;
      }
      if (!alive) {
        valid = false;
        break;
      }
    }
    if (valid) {
      Member me{e, {}};
      bool alive = false;
      for (const auto& w : p.witnesses[e]) {
        double s = 0.0;
        for (const auto& m : saved) s += w[m.e];
        me.acc.push_back(p.ok(s) ? s : -1.0);
        alive = alive || p.ok(s);
      }
      if (alive) {
        members.push_back(std::move(me));
        dfs(idx + 1);
      }
    }
    members = std::move(saved);
    dfs(idx + 1);
  };
  dfs(0);
  res.exact = !capped;
  return res;
}

struct Mask {
  std::uint64_t lo = 0, hi = 0;
  void set(int i) { (i < 64 ? lo : hi) |= std::uint64_t{1} << (i % 64); }
  bool test(int i) const { return ((i < 64 ? lo : hi) >> (i % 64)) & 1U; }
  bool operator==(const Mask&) const = default;
};

struct MaskHash {
  std::size_t operator()(const Mask& m) const { return std::hash<std::uint64_t>{}(m.lo * 0x9E3779B97F4A7C15ULL ^ m.hi); }
};

// Longest sequence where each element has a witness against the set of its
// predecessors. Feasibility depends only on that set, so states are memoized.
SearchResult eluder_search(Problem p, std::uint64_t cap) {
  prune(p);
  if (p.n > 128) throw Error("eluder search supports at most 128 elements");
  SearchResult res;
  std::unordered_set<Mask, MaskHash> seen;
  bool capped = false;

  auto feasible = [&](int e, const Mask& s) {
    for (const auto& w : p.witnesses[e]) {
      double c = 0.0;
      for (int j = 0; j < p.n; ++j)
        if (s.test(j)) c += w[j];
      if (p.ok(c)) return true;
    }
    return false;
  };

  std::function<void(const Mask&, int)> dfs = [&](const Mask& s, int size) {
    if (capped) return;
    res.value = std::max(res.value, size);
    if (!seen.insert(s).second) return;
    std::vector<int> next;
    for (int e = 0; e < p.n; ++e) {
      if (s.test(e) || p.witnesses[e].empty()) continue;
      if (++res.checks > cap) {
        capped = true;
        return;
      }
      if (feasible(e, s)) next.push_back(e);
    }
    if (size + static_cast<int>(next.size()) <= res.value) return;
    for (int e : next) {
      Mask t = s;
      t.set(e);
      dfs(t, size + 1);
      if (capped) return;
    }
  };
  dfs(Mask{}, 0);
  res.exact = !capped;
  return res;
}

struct Pair {
  Context x;
  Action a;
};

std::vector<Pair> off_star_pairs(const Policy& star, int n_actions) {
  std::vector<Pair> out;
  for (std::size_t x = 0; x < star.actions.size(); ++x)
    for (int a = 0; a < n_actions; ++a)
      if (a != star.actions[x]) out.push_back({static_cast<Context>(x), a});
  return out;
}

Problem policy_pair_problem(const std::vector<Policy>& policies, const Policy& star, int n_actions) {
  const auto pairs = off_star_pairs(star, n_actions);
  Problem p;
  p.n = static_cast<int>(pairs.size());
  p.witnesses.resize(pairs.size());
  for (int i = 0; i < p.n; ++i) {
    for (const auto& pi : policies) {
      if (pi(pairs[i].x) != pairs[i].a) continue;
      CostRow row(pairs.size());
      for (int j = 0; j < p.n; ++j)
        row[j] = (pairs[j].x != pairs[i].x && pi(pairs[j].x) != star(pairs[j].x)) ? 1.0 : 0.0;
      p.witnesses[i].push_back(std::move(row));
    }
  }
  return p;
}

SearchResult combine(const SearchResult& a, const SearchResult& b) {
  return {std::max(a.value, b.value), a.exact && b.exact, a.checks + b.checks};
}

// Distinct deviation levels above delta0; the sup over Delta in the open
// interval below each level d is reached as Delta -> d from below.
std::vector<double> deviation_levels(const std::vector<Table>& functions, const Table& star, double delta0) {
  std::vector<double> levels;
  for (const auto& f : functions)
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      double d = std::abs(f(i) - star(i));
      if (d > delta0) levels.push_back(d);
    }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  return levels;
}

Problem value_problem(const std::vector<Table>& functions, const Table& star, double level) {
  Problem p;
  p.n = static_cast<int>(star.size());
  p.witnesses.resize(star.size());
  p.budget = level * level;
  p.strict = true;
  for (const auto& f : functions) {
    Eigen::ArrayXXd dev = (f - star).array().abs();
    for (Eigen::Index i = 0; i < dev.size(); ++i) {
      if (dev(i) < level) continue;
      CostRow row(star.size());
      for (Eigen::Index j = 0; j < dev.size(); ++j) row[j] = j == i ? 0.0 : dev(j) * dev(j);
      p.witnesses[i].push_back(std::move(row));
    }
  }
  return p;
}

SearchResult value_measure(const std::vector<Table>& functions, const Table& star, double delta0, std::uint64_t cap,
                           bool eluder) {
  SearchResult total;
  for (double level : deviation_levels(functions, star, delta0)) {
    const std::uint64_t left = total.checks >= cap ? 0 : cap - total.checks;
    auto r = eluder ? eluder_search(value_problem(functions, star, level), left)
                    : star_search(value_problem(functions, star, level), left);
    total = combine(total, r);
    if (!total.exact) break;
  }
  return total;
}

void simplex_grid(int n, int resolution, std::vector<int>& cur, std::vector<Eigen::RowVectorXd>& out) {
  if (static_cast<int>(cur.size()) == n - 1) {
    int used = 0;
    for (int c : cur) used += c;
    Eigen::RowVectorXd row(n);
    for (int i = 0; i < n - 1; ++i) row(i) = static_cast<double>(cur[i]) / resolution;
    row(n - 1) = static_cast<double>(resolution - used) / resolution;
    out.push_back(row);
    return;
  }
  int used = 0;
  for (int c : cur) used += c;
  for (int c = 0; c <= resolution - used; ++c) {
    cur.push_back(c);
    simplex_grid(n, resolution, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<Policy> induced_policies(const std::vector<Table>& functions) {
  std::vector<Policy> out;
  for (const auto& f : functions) {
    Policy pi = induced_policy(f);
    if (std::find(out.begin(), out.end(), pi) == out.end()) out.push_back(std::move(pi));
  }
  return out;
}

double policy_disagreement(const std::vector<Policy>& policies, const Policy& star, const Eigen::VectorXd& dist,
                           double eps0) {
  check_eps(eps0);
  check_dist(dist, static_cast<int>(star.actions.size()));
  std::vector<double> radius;
  for (const auto& pi : policies) radius.push_back(mass(pi, star, dist));
  return disagreement_sweep(policies, star, dist, radius, eps0);
}

double csc_disagreement(const std::vector<Policy>& policies, const Policy& star, const Table& mean,
                        const Eigen::VectorXd& dist, double eps0) {
  check_eps(eps0);
  check_dist(dist, static_cast<int>(star.actions.size()));
  std::vector<double> radius;
  for (const auto& pi : policies) {
    double r = 0.0;
    for (Eigen::Index x = 0; x < dist.size(); ++x)
      r += dist(x) * (mean(x, star(static_cast<Context>(x))) - mean(x, pi(static_cast<Context>(x))));
    radius.push_back(r);
  }
  return disagreement_sweep(policies, star, dist, radius, eps0);
}

double value_disagreement_at_p(const std::vector<Table>& functions, const Table& star, const Eigen::VectorXd& dist,
                               const ActionLaw& p, double delta0, double eps0) {
  check_eps(eps0);
  check_dist(dist, static_cast<int>(star.rows()));
  if (p.rows() != star.rows() || p.cols() != star.cols()) throw Error("action law has the wrong shape");
  const Eigen::ArrayXXd w = p.array().colwise() * dist.array();

  std::vector<double> norm;
  std::vector<Eigen::ArrayXXd> dev;
  for (const auto& f : functions) {
    dev.push_back((f - star).array().abs());
    norm.push_back(std::sqrt((w * dev.back().square()).sum()));
  }
  std::vector<double> eps;
  if (eps0 > 0.0) eps.push_back(eps0);
  for (double n : norm)
    if (n > eps0) eps.push_back(n);

  double best = 0.0;
  for (double e : eps) {
    Eigen::ArrayXXd env = Eigen::ArrayXXd::Zero(star.rows(), star.cols());
    for (std::size_t i = 0; i < functions.size(); ++i)
      if (norm[i] <= e) env = env.max(dev[i]);
    std::vector<std::pair<double, double>> pts;  // (level, mass)
    for (Eigen::Index i = 0; i < env.size(); ++i)
      if (env(i) > delta0 && w(i) > 0.0) pts.emplace_back(env(i), w(i));
    std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.first > b.first; });
    double tail = 0.0;
    for (const auto& [level, m] : pts) {
      tail += m;  // P(env >= level), pairs sorted descending
      best = std::max(best, level * level * tail / (e * e));
    }
  }
  return best;
}

GridBound value_disagreement(const std::vector<Table>& functions, const Table& star, const Eigen::VectorXd& dist,
                             double delta0, double eps0, int resolution, std::size_t max_points) {
  if (resolution < 1) throw Error("grid resolution must be positive");
  const int nx = static_cast<int>(star.rows());
  const int na = static_cast<int>(star.cols());
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<int> cur;
  simplex_grid(na, resolution, cur, rows);

  GridBound out;
  out.resolution = resolution;
  double total = 1.0;
  for (int x = 0; x < nx; ++x) total *= static_cast<double>(rows.size());
  out.exhaustive = total <= static_cast<double>(max_points);

  ActionLaw p(nx, na);
  auto eval = [&] {
    out.value = std::max(out.value, value_disagreement_at_p(functions, star, dist, p, delta0, eps0));
    ++out.points;
  };
  if (out.exhaustive) {
    std::vector<std::size_t> digit(static_cast<std::size_t>(nx), 0);
    while (true) {
      for (int x = 0; x < nx; ++x) p.row(x) = rows[digit[x]];
      eval();
      int x = 0;
      while (x < nx && ++digit[x] == rows.size()) digit[x++] = 0;
      if (x == nx) break;
    }
  } else {
    Rng rng(0, "p-grid");
    for (std::size_t k = 0; k < max_points; ++k) {
      for (int x = 0; x < nx; ++x) p.row(x) = rows[rng.uniform_int(rows.size())];
      eval();
    }
  }
  return out;
}

SearchResult policy_star_weak(const std::vector<Policy>& policies, const Policy& star, int n_actions,
                              std::uint64_t cap) {
  (void)n_actions;
  const int nx = static_cast<int>(star.actions.size());
  Problem p;
  p.n = nx;
  p.witnesses.resize(static_cast<std::size_t>(nx));
  for (const auto& pi : policies) {
    CostRow row(static_cast<std::size_t>(nx));
    for (int x = 0; x < nx; ++x) row[x] = pi(x) != star(x) ? 1.0 : 0.0;
    for (int x = 0; x < nx; ++x) {
      if (row[x] == 0.0) continue;
      CostRow r = row;
      r[x] = 0.0;
      p.witnesses[x].push_back(std::move(r));
    }
  }
  return star_search(std::move(p), cap);
}

SearchResult policy_star_strong(const std::vector<Policy>& policies, const Policy& star, int n_actions,
                                std::uint64_t cap) {
  return star_search(policy_pair_problem(policies, star, n_actions), cap);
}

SearchResult policy_eluder(const std::vector<Policy>& policies, const Policy& star, int n_actions,
                           std::uint64_t cap) {
  return eluder_search(policy_pair_problem(policies, star, n_actions), cap);
}

SearchResult value_star(const std::vector<Table>& functions, const Table& star, double delta0, std::uint64_t cap) {
  return value_measure(functions, star, delta0, cap, false);
}

SearchResult value_eluder(const std::vector<Table>& functions, const Table& star, double delta0,
                          std::uint64_t cap) {
  return value_measure(functions, star, delta0, cap, true);
}

double rl_disagreement(const std::vector<Table>& functions, const Eigen::VectorXd& emission, double eps0) {
  if (!(eps0 > 0.0)) throw Error("eps0 must be positive");
  if (functions.empty()) throw Error("function class is empty");
  check_dist(emission, static_cast<int>(functions.front().rows()));
  const Eigen::Index na = functions.front().cols();
  const Eigen::ArrayXXd w = Eigen::ArrayXXd::Ones(emission.size(), na).colwise() * emission.array() /
                            static_cast<double>(na);
  double best = 1.0;
  // Each ray's contribution min(1/eps^2, 1/||f - f*||^2) |f - f*|^2 is
  // nonincreasing in eps, so the sup sits at eps0.
  for (const auto& star : functions) {
    Eigen::ArrayXXd env = Eigen::ArrayXXd::Zero(emission.size(), na);
    for (const auto& f : functions) {
      Eigen::ArrayXXd d2 = (f - star).array().square();
      double n2 = (w * d2).sum();
      if (n2 <= 0.0) continue;
      env = env.max(d2 * std::min(1.0 / (eps0 * eps0), 1.0 / n2));
    }
    best = std::max(best, (w * env).sum());
  }
  return best;
}

double rl_disagreement_linear(const Eigen::MatrixXd& features, int n_actions, const Eigen::VectorXd& emission) {
  const Eigen::Index nx = emission.size();
  if (features.rows() != nx * n_actions) throw Error("feature rows must equal contexts times actions");
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(features.cols(), features.cols());
  for (Eigen::Index x = 0; x < nx; ++x)
    for (int a = 0; a < n_actions; ++a) {
      auto phi = features.row(x * n_actions + a);
      sigma.noalias() += emission(x) / n_actions * phi.transpose() * phi;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  double rank = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > 1e-10 * std::max(top, 1e-300)) rank += 1.0;
  return std::max(1.0, rank);
}

ComplexityReport complexity_report(const FiniteFunctionClass& cls, const Eigen::VectorXd& dist,
                                   const ComplexityParams& params, const std::vector<Eigen::VectorXd>& emissions) {
  if (!cls.star_index()) throw Error("complexity measures need a designated f*");
  const auto& fs = cls.functions();
  const Table& star = fs[*cls.star_index()];
  const Policy pi_star = induced_policy(star);
  const auto policies = induced_policies(fs);
  const int na = cls.n_actions();

  ComplexityReport r;
  r.params = params;
  r.policy_dis = policy_disagreement(policies, pi_star, dist, params.eps0);
  r.csc_dis = csc_disagreement(policies, pi_star, star, dist, params.eps0);
  r.value_dis = value_disagreement(fs, star, dist, params.delta0, params.eps0, params.p_resolution);
  const ActionLaw p = params.p ? *params.p : ActionLaw::Constant(cls.n_contexts(), na, 1.0 / na);
  r.value_dis_at_p = value_disagreement_at_p(fs, star, dist, p, params.delta0, params.eps0);
  r.policy_star_weak = policy_star_weak(policies, pi_star, na, params.search_cap);
  r.policy_star_strong = policy_star_strong(policies, pi_star, na, params.search_cap);
  r.value_star = value_star(fs, star, params.delta0, params.search_cap);
  r.value_eluder = value_eluder(fs, star, params.delta0, params.search_cap);
  r.policy_eluder = policy_eluder(policies, pi_star, na, params.search_cap);
  for (const auto& e : emissions) r.rl_dis.push_back(rl_disagreement(fs, e, std::max(params.eps0, 1e-12)));
  return r;
}

}  // namespace cblab
