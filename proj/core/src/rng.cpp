#include "robustreg/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace robustreg {

std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t hash_tag(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t state = mix64(master);
  for (std::uint64_t t : tags) state = mix64(state ^ t);
  return state;
}

double Rng::gaussian() {
  const double u = uniform_pos();
  const double v = uniform();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

double Rng::student_t(double nu) {
  // Polar representation: with U uniform on (0,1] and an independent uniform
  // angle, sqrt(nu*(U^(-2/nu)-1)) * cos(angle) has the t(nu) law.  Reduces to
  // Box-Muller as nu -> infinity; works for non-integer nu.
  const double u = uniform_pos();
  const double v = uniform();
  const double r2 = nu * (std::pow(u, -2.0 / nu) - 1.0);
  return std::sqrt(r2) * std::cos(2.0 * std::numbers::pi * v);
}

int Rng::categorical(const Eigen::VectorXd& probs) {
  const double u = uniform();
  double acc = 0.0;
  const Eigen::Index k = probs.size();
  for (Eigen::Index j = 0; j < k; ++j) {
    acc += probs[j];
    if (u < acc) return static_cast<int>(j);
  }
  return static_cast<int>(k - 1);  // guard against rounding in the prefix sums
}

}  // namespace robustreg
