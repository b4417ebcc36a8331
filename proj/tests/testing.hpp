#pragma once

#include "cblab/core.hpp"
#include "cblab/rng.hpp"

#include <vector>

namespace cblab::testing {

inline FiniteFunctionClass random_finite_class(Rng& rng, int n_functions, int n_contexts, int n_actions,
                                               bool with_star = true) {
  std::vector<Table> fs;
  for (int i = 0; i < n_functions; ++i) {
    Table t(n_contexts, n_actions);
    for (int x = 0; x < n_contexts; ++x)
      for (int a = 0; a < n_actions; ++a) t(x, a) = rng.uniform();
    fs.push_back(t);
  }
  std::optional<std::size_t> star;
  if (with_star) star = rng.uniform_int(static_cast<std::uint64_t>(n_functions));
  return FiniteFunctionClass(std::move(fs), star);
}

// Coarse-valued classes make ties and exact boundary cases common.
inline FiniteFunctionClass random_grid_class(Rng& rng, int n_functions, int n_contexts, int n_actions, int levels) {
  std::vector<Table> fs;
  for (int i = 0; i < n_functions; ++i) {
    Table t(n_contexts, n_actions);
    for (int x = 0; x < n_contexts; ++x)
      for (int a = 0; a < n_actions; ++a)
        t(x, a) = static_cast<double>(rng.uniform_int(static_cast<std::uint64_t>(levels))) / (levels - 1);
    fs.push_back(t);
  }
  return FiniteFunctionClass(std::move(fs), 0);
}

inline History random_history(Rng& rng, const Table& mean, int rounds) {
  History h;
  for (int t = 0; t < rounds; ++t) {
    const int x = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(mean.rows())));
    const int a = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(mean.cols())));
    h.push_back({x, a, rng.bernoulli(mean(x, a)) ? 1.0 : 0.0});
  }
  return h;
}

inline double history_loss(const Table& f, const History& h) {
  double l = 0.0;
  for (const auto& o : h) l += (f(o.context, o.action) - o.reward) * (f(o.context, o.action) - o.reward);
  return l;
}

// Direct enumeration of {f : loss(f) <= min + beta}, written independently of the library.
inline std::vector<std::size_t> brute_version_space(const FiniteFunctionClass& cls, const History& h, double beta) {
  std::vector<double> l;
  double best = 1e300;
  for (const auto& f : cls.functions()) {
    l.push_back(history_loss(f, h));
    best = std::min(best, l.back());
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < l.size(); ++i)
    if (l[i] <= best + beta + 1e-9) out.push_back(i);
  return out;
}

}  // namespace cblab::testing
