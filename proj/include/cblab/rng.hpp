#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace cblab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// FNV-1a; stable stream ids for named substreams.
constexpr std::uint64_t stream_id(std::string_view name) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

/// 64-bit seeded generator. Each (seed, stream) pair yields an independent
/// sequence, so drawing from one substream never perturbs another.
/// Sampling helpers avoid std:: distributions so that draws are identical
/// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::string_view stream = "default") {
    std::uint64_t s = seed ^ stream_id(stream);
    engine_.seed(splitmix64(s));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform on {0, ..., n-1}, unbiased via rejection.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Index drawn from a probability vector (inverse CDF; zero entries never drawn).
  int categorical(const Eigen::Ref<const Eigen::VectorXd>& p) {
    const double u = uniform() * p.sum();
    double acc = 0.0;
    int last = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (p(i) <= 0.0) continue;
      acc += p(i);
      last = static_cast<int>(i);
      if (u < acc) return last;
    }
    return last;
  }

  /// Dirichlet(1, ..., 1) via normalized exponentials.
  Eigen::VectorXd simplex(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double u;
      do {
        u = uniform();
      } while (u <= 0.0);
      v(i) = -std::log(u);
    }
    return v / v.sum();
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cblab
