#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>

#include "calderon/geometry.hpp"
#include "calderon/linear_map.hpp"

namespace calderon {

// Symbol a(x', xi) or a(x', xi'); x1-independent by construction. xi[0] is
// the xi1 covariable (full arity only), xi[1], xi[2] the transversal ones.
struct Symbol {
  enum class Arity { full, transversal };
  enum class ClassTag { S1, S0, smoothing };

  std::string label = "a";
  Arity arity = Arity::transversal;
  ClassTag class_tag = ClassTag::S1;
  std::function<cplx(const TransPoint&, const std::array<double, 3>&)> eval;
  double order_trans = 0.0;
  double order_full = 0.0;
  int tdim = 2;
  std::vector<int> depends_axes;  // transversal x'-axes the symbol uses
  std::optional<double> seminorm_bound;

  cplx operator()(const TransPoint& x, double xi1,
                  const std::array<double, 2>& xip) const {
    return eval(x, {xi1, xip[0], xip[1]});
  }
};

Symbol constant_symbol(cplx value, int tdim);
Symbol multiplier_symbol(std::function<cplx(double xi1, const std::array<double, 2>&)> f,
                         Symbol::Arity arity, int tdim, std::string label = "m");
Symbol x_symbol(std::function<cplx(const TransPoint&)> f, int tdim,
                std::vector<int> depends, std::string label = "V");

// Midpoint-rule Weyl quantization on the periodic grid. x'-independent
// symbols reduce to exact Fourier multipliers; x'-dependent transversal
// symbols get dense per-slice kernels (dense only along the axes the symbol
// actually uses).
LinearMap weyl_quantize(const Symbol& a, double h, const Grid& g);

// Quantization of a polynomial-in-xi1 full symbol sum_k xi1^k c_k(x',xi'),
// realized exactly as sum (hD1)^k Op(c_k).
LinearMap weyl_quantize_poly1(const std::vector<Symbol>& coeffs, double h,
                              const Grid& g);

// Dense midpoint kernel of a transversal symbol along its dependence axis,
// at a fixed Fourier mode of the other transversal axis. Symbols depending
// on no axis return the diagonal multiplier matrix.
Eigen::MatrixXcd transversal_mode_kernel(const Symbol& a, double h,
                                         const Grid& g, int ke_mode);

// sup_{samples} |d^alpha_x d^beta_xi a| <xi>^{|beta|}
double symbol_seminorm(const Symbol& a, double h, const Grid& g,
                       const std::vector<int>& alpha,
                       const std::vector<int>& beta);

// Sum of seminorms over |alpha|,|beta| <= k(n), the Calderon-Vaillancourt
// bound side. k(n) = ceil(n/2)+1.
int cv_derivative_count(int n);
double cv_seminorm_sum(const Symbol& a, double h, const Grid& g, int kn);

struct CvCheckResult {
  double measured_norm = 0.0;
  double bound = 0.0;
  double seminorm_sum = 0.0;
  int kn = 0;
};

CvCheckResult cv_check(const Symbol& a, double r, double h, const Grid& g,
                       int trials, std::uint64_t seed, double slack_const);

struct ComposeCheckResult {
  std::vector<double> h_list;
  std::vector<double> residuals;
  double slope = 0.0;       // 99 marks residuals at roundoff floor
  bool at_floor = false;
};

ComposeCheckResult compose_check(const Symbol& a, const Symbol& b,
                                 const std::vector<double>& h_list,
                                 const Grid& g, std::uint64_t seed);

// Coarse S1-class sanity: worst ratio of sampled first xi-derivatives against
// the declared order decay over the resolved band.
double symbol_class_ratio(const Symbol& a, double h, const Grid& g);

}  // namespace calderon
