#pragma once

#include <optional>
#include <vector>

#include "calderon/grid.hpp"
#include "calderon/util.hpp"

namespace calderon {

enum class MultiplierDirection { full, transversal };

struct NormSpec {
  enum class Kind { lr, sobolev, mixed } kind = Kind::lr;
  double r = 2.0;
  double k = 0.0;  // transversal order (mixed only)
  double l = 0.0;  // full order
  double h = 1.0;
};

// Quadrature is trapezoidal on the uniform periodic grid: each node carries
// weight prod(spacings). r = infinity (any r >= 1e9) returns the max.
double lr_norm(const ComplexField& u, double r,
               const std::vector<std::uint8_t>* mask = nullptr);

constexpr double kInfNorm = 1e18;

// < hD >^k (full) or < hD' >^k (transversal) as an exact Fourier multiplier.
ComplexField bessel_multiplier(const ComplexField& u, double k, double h,
                               MultiplierDirection dir);

double sobolev_norm(const ComplexField& u, double k, double r, double h,
                    const std::vector<std::uint8_t>* mask = nullptr);

// || <hD'>^k <hD>^l u ||_{L^r}
double mixed_norm(const ComplexField& u, double k, double l, double r, double h,
                  const std::vector<std::uint8_t>* mask = nullptr);

double norm(const ComplexField& u, const NormSpec& spec,
            const std::vector<std::uint8_t>* mask = nullptr);

// Apply a spectral multiplier m(xi) given per flat spectral index.
ComplexField spectral_multiplier(const ComplexField& u,
                                 const std::function<cplx(const std::vector<int>&)>& m);

ComplexField white_noise(const Grid& g, Rng& rng);

// Random field with spectral profile exp(-|xi|^2 len^2 / 2), unit L2 norm.
ComplexField smooth_random(const Grid& g, Rng& rng, double corr_len);

// Fraction of squared mass at nodes whose y1 lies outside [lo, hi].
double margin_mass_fraction(const ComplexField& u, double lo, double hi);

ComplexField pointwise(const ComplexField& a, const ComplexField& b);

}  // namespace calderon
