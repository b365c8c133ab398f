#include "calderon/opnorm.hpp"

#include <cmath>

namespace calderon {

namespace {

void mask_into(ComplexField& u, const std::vector<std::uint8_t>* mask) {
  if (!mask) return;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!(*mask)[i]) u[i] = 0.0;
}

// dual-signed power |v|^(s-2) v, with s = exponent of the norm being dualized
ComplexField signed_power(const ComplexField& v, double s) {
  ComplexField w(*v.grid);
  if (s >= kInfNorm * 0.5) {
    // L^inf dual: point mass at the maximizing node
    std::size_t best = 0;
    double m = -1;
    for (std::size_t i = 0; i < v.size(); ++i) {
      double a = std::abs(v[i]);
      if (a > m) {
        m = a;
        best = i;
      }
    }
    if (m > 0) w[best] = v[best] / m;
    return w;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    double a = std::abs(v[i]);
    w[i] = a < 1e-300 ? cplx(0.0) : std::pow(a, s - 2.0) * v[i];
  }
  return w;
}

}  // namespace

NormEstimate estimate_opnorm(const LinearMap& T, const Grid& g, double p_in,
                             double p_out, int trials, std::uint64_t seed,
                             const OpNormOptions& opts) {
  NormEstimate est;
  est.operator_label = T.label;
  est.p_in = p_in;
  est.p_out = p_out;
  est.trials = trials;

  auto ratio = [&](const ComplexField& u) -> double {
    double nu = lr_norm(u, p_in, opts.mask_in);
    if (nu <= 0) return 0.0;
    ComplexField y = T.apply(u);
    mask_into(y, opts.mask_out);
    return lr_norm(y, p_out) / nu;
  };

  ComplexField best;
  double best_ratio = -1.0;
  for (int k = 0; k < trials; ++k) {
    Rng rng = Rng::substream(seed, k);
    ComplexField u = smooth_random(g, rng, opts.corr_len);
    mask_into(u, opts.mask_in);
    double r = ratio(u);
    if (r > best_ratio) {
      best_ratio = r;
      best = u;
    }
  }

  if (T.has_adjoint() && best_ratio > 0 && p_in < kInfNorm * 0.5) {
    double p_dual = p_in / (p_in - 1.0);
    ComplexField u = best;
    for (int it = 0; it < opts.ascent_iters; ++it) {
      ComplexField y = T.apply(u);
      mask_into(y, opts.mask_out);
      ComplexField z = signed_power(y, p_out);
      ComplexField w = T.apply_adjoint(z);
      mask_into(w, opts.mask_in);
      // dual map back to the input sphere: |w|^(p'-2) w
      ComplexField un = signed_power(w, p_dual);
      double nn = lr_norm(un, p_in, opts.mask_in);
      if (nn <= 0) break;
      un *= 1.0 / nn;
      double r = ratio(un);
      est.ascent_iterations = it + 1;
      if (r > best_ratio) {
        best_ratio = r;
        best = un;
      }
      u = un;
    }
  }

  est.lower_bound = std::max(best_ratio, 0.0);
  est.witness = best;
  return est;
}

}  // namespace calderon
