#pragma once

#include "calderon/linear_map.hpp"

namespace calderon {

struct OpNormOptions {
  double corr_len = 0.25;  // spectral correlation length of probe fields
  int ascent_iters = 8;
  const std::vector<std::uint8_t>* mask_in = nullptr;
  const std::vector<std::uint8_t>* mask_out = nullptr;
};

struct NormEstimate {
  std::string operator_label;
  double p_in = 2.0, p_out = 2.0;
  double lower_bound = 0.0;  // best probe found; a lower estimate by design
  int trials = 0;
  int ascent_iterations = 0;
  ComplexField witness;
};

// Lower estimate of ||T||_{L^{p_in} -> L^{p_out}} by random smooth probes
// plus exponent-duality fixed-point ascent (needs the adjoint). Deterministic
// under a fixed seed; never decreases when trials increase with the same
// seed prefix.
NormEstimate estimate_opnorm(const LinearMap& T, const Grid& g, double p_in,
                             double p_out, int trials, std::uint64_t seed,
                             const OpNormOptions& opts = {});

}  // namespace calderon
