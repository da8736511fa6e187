#pragma once

#include <cmath>
#include <cstdint>

namespace kronfit {

// Counter-based generator (splitmix64): the state advances by a fixed
// increment and each output is a pure mix of the counter, so per-replication
// streams are cheap to derive and identical under any parallel schedule.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // burn one output so that nearby seeds decorrelate immediately
    next_u64();
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Marsaglia's polar method; avoids trig for platform
  // stability and caches the spare deviate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  // Student-t with integer df, standardized to unit variance (df > 2).
  double student_t_standardized(int df) {
    const double z = normal();
    double chi2 = 0.0;
    for (int i = 0; i < df; ++i) {
      const double g = normal();
      chi2 += g * g;
    }
    const double t = z / std::sqrt(chi2 / df);
    return t * std::sqrt((df - 2.0) / df);
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace kronfit
