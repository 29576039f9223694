#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace robustreg {

/// 64-bit mixing finalizer (splitmix64). Used to derive independent
/// sub-stream seeds from a master seed and a list of integer tags.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Hash a string tag (estimator ids etc.) into a 64-bit value, FNV-1a.
std::uint64_t hash_tag(std::string_view s) noexcept;

/// Derive a sub-stream seed: fold each tag into the state with mix64.
/// derive_seed(s, {a,b}) != derive_seed(s, {b,a}) by construction.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) noexcept;

/// Random draws with a fixed, implementation-independent mapping from the
/// underlying mt19937_64 output to floating-point variates.  The standard
/// <random> distributions are implementation-defined, which would break
/// byte-identical reproducibility of reports; everything here is pinned.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  /// uniform on [0,1), 53-bit resolution
  double uniform() { return static_cast<double>(gen_() >> 11) * kInv53; }

  /// uniform on (0,1] — safe as a log/pow argument
  double uniform_pos() { return (static_cast<double>(gen_() >> 11) + 1.0) * kInv53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// standard normal via Box-Muller; consumes exactly two uniforms
  double gaussian();

  /// Student-t with nu > 0 degrees of freedom (polar method, exact for
  /// any real nu); consumes exactly two uniforms
  double student_t(double nu);

  /// index j with probability probs[j] (probs sums to 1); inverse-CDF walk
  int categorical(const Eigen::VectorXd& probs);

  /// true with probability p
  bool bernoulli(double p) { return uniform() < p; }

 private:
  static constexpr double kInv53 = 1.0 / 9007199254740992.0;  // 2^-53
  std::mt19937_64 gen_;
};

}  // namespace robustreg
