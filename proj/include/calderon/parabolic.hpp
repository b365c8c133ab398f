#pragma once

#include <optional>

#include "calderon/causal.hpp"
#include "calderon/quantize.hpp"

namespace calderon {

// Parabolic flow j = h d/dx1 + B(x',hD') with elliptic Re B ~ <xi'>, plus an
// optional order-zero correction B0 entering J = j + h B0(x',hD').
struct ParabolicSpec {
  Symbol B;
  std::optional<Symbol> B0;
  double h = 0.1;
  double c_ell = 0.0;  // measured ellipticity constants
  double C_ell = 0.0;
};

ParabolicSpec make_parabolic_spec(Symbol B, std::optional<Symbol> B0, double h,
                                  const Grid& g);

// Exact-pair discretization: jinv_map is the causal exponential-integrator
// recurrence, j_map its exact bidiagonal inverse. Both read strictly
// backward in x1, so M+ support is preserved bit-exactly.
LinearMap jinv_map(const ParabolicSpec& spec, const Grid& g);
LinearMap j_map(const ParabolicSpec& spec, const Grid& g);

ComplexField apply_jinv(const ComplexField& u, const ParabolicSpec& spec);

struct JinvDetail {
  ComplexField field;
  int iterations = 0;
  double residual = 0.0;
};

// J^{-1} realized as a Neumann iteration on the residual; every iterate is
// causal, so support preservation stays exact.
JinvDetail apply_Jinv_detail(const ComplexField& u, const ParabolicSpec& spec,
                             double tol = 1e-10, int cap = 50);
ComplexField apply_Jinv(const ComplexField& u, const ParabolicSpec& spec);
LinearMap Jinv_map(const ParabolicSpec& spec, const Grid& g,
                   double tol = 1e-10, int cap = 50);

struct DecaySweep {
  std::vector<double> h_list;
  std::vector<double> values;
  double slope = 0.0;
  double halfwidth = 0.0;
};

// || J^{-1} 1_{M-} f ||_{W^{1,r}({x1 >= eps})} / ||f||_r across the h sweep
DecaySweep disjoint_support_decay(
    const std::function<ParabolicSpec(double)>& spec_of_h, double eps,
    const std::vector<double>& h_list, double r, const Grid& g,
    std::uint64_t seed, int probes = 4);

// shared slope fitting (least squares in log-log, standard-error halfwidth)
std::pair<double, double> loglog_slope(const std::vector<double>& h_list,
                                       const std::vector<double>& values);

}  // namespace calderon
