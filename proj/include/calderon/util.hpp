#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace calderon {

using cplx = std::complex<double>;

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define CALDERON_ERROR(Name)                                        \
  struct Name : Error {                                             \
    explicit Name(const std::string& s) : Error(#Name ": " + s) {}  \
  }

CALDERON_ERROR(CollarExceeded);
CALDERON_ERROR(CollarTooThin);
CALDERON_ERROR(MarginViolation);
CALDERON_ERROR(FrequencyOverflow);
CALDERON_ERROR(EllipticityViolation);
CALDERON_ERROR(NoConvergence);
CALDERON_ERROR(InvalidConstants);
CALDERON_ERROR(NeumannDivergence);
CALDERON_ERROR(ContractionFailure);
CALDERON_ERROR(SingularOperator);
CALDERON_ERROR(OutsideChart);
CALDERON_ERROR(UnknownExperiment);
CALDERON_ERROR(DegenerateSweep);
CALDERON_ERROR(ResonantDenominator);
CALDERON_ERROR(ConfigError);

#undef CALDERON_ERROR

// Deterministic RNG: splitmix64 stream + Box-Muller. Identical sequences on
// every platform, unlike the std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 1e-300) u1 = next_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  cplx normal_cplx() { return cplx(normal(), normal()); }

  // Independent substream k of a base seed; used so that probe #k does not
  // depend on how many probes were drawn before it.
  static Rng substream(std::uint64_t seed, std::uint64_t k) {
    return Rng(seed ^ (0x9e3779b97f4a7c15ull * (k + 1)));
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// C-infinity ramp built from exp(-1/t): 0 for t<=0, 1 for t>=1.
inline double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double a = std::exp(-1.0 / t);
  double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

// Plateau profile: 1 on [lo,hi], smooth ramps of the given widths, 0 outside
// [lo-ramp_lo, hi+ramp_hi].
struct BumpProfile {
  double lo = 0.0, hi = 0.0, ramp_lo = 1.0, ramp_hi = 1.0;

  double operator()(double t) const {
    if (t < lo) return smooth_step((t - (lo - ramp_lo)) / ramp_lo);
    if (t > hi) return smooth_step(((hi + ramp_hi) - t) / ramp_hi);
    return 1.0;
  }
  double support_lo() const { return lo - ramp_lo; }
  double support_hi() const { return hi + ramp_hi; }
};

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Chunked parallel loop over [0,n). Work items must be independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

int hardware_threads();

}  // namespace calderon
