#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace mqc {

// SplitMix64 finalizer, used for seed derivation only.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace detail {
inline std::uint64_t mix_one(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ (splitmix64(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}
}  // namespace detail

// Derives a child seed from a master seed and a stream path, e.g.
// child_seed(master, kStreamCircuit, realization). Distinct paths give
// independent streams; realization k never shares randomness with k+1.
template <typename... Ids>
std::uint64_t child_seed(std::uint64_t master, Ids... path) {
  std::uint64_t h = splitmix64(master);
  ((h = detail::mix_one(h, static_cast<std::uint64_t>(path))), ...);
  return h;
}

inline constexpr std::uint64_t kStreamCircuit = 0x11;
inline constexpr std::uint64_t kStreamObservable = 0x22;

// mt19937_64 plus explicit uniform/normal/bounded draws. The draw code lives
// here rather than in <random> distributions so that the stream is identical
// across standard libraries; dataset reproducibility depends on it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * kPi * uniform();
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;
    if (rem == 0) return engine_() % n;
    const std::uint64_t threshold = 0ULL - rem;
    std::uint64_t v = engine_();
    while (v >= threshold) v = engine_();
    return v % n;
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mqc
