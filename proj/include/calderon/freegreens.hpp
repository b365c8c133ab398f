#pragma once

#include "calderon/geometry.hpp"
#include "calderon/linear_map.hpp"

namespace calderon {

// Smooth cell cutoffs chi, chi_tilde of y1 with chi_tilde = 1 on supp(chi),
// both equal to 1 on the working interval; built from exp(-1/t) ramps.
struct CutoffPair {
  BumpProfile chi;
  BumpProfile chi_tilde;
};

// chi flat on [lo,hi] widened by pad, chi_tilde flat on supp(chi); ramps of
// the given width. Throws if chi_tilde support leaves the cell interior.
CutoffPair make_cutoff_pair(const Grid& g, double lo, double hi, double pad,
                            double ramp);

// Fourier-series Green's function of the conjugated Laplacian on the
// periodic surrogate cell. Mode multipliers are
//   1 / (h^2 xi1^2 -+ 2 i h xi1 - 1 + h^2 lambda_l).
class FreeGreens {
 public:
  FreeGreens(const Grid& g, int sign, double h);

  double h() const { return h_; }
  int sign() const { return sign_; }
  double min_abs_denominator() const { return min_denom_; }

  cplx denominator(const std::vector<int>& k) const;

  // raw G^M with a margin-safety check on the input
  ComplexField apply(const ComplexField& f, double safe_lo, double safe_hi,
                     double threshold = 1e-8) const;

  LinearMap as_map() const;                 // no margin check (composition use)
  LinearMap conjugated_laplacian_map() const;  // exact spectral inverse

 private:
  const Grid* grid_;
  int sign_;
  double h_;
  double min_denom_;
};

ComplexField apply_free_greens(const ComplexField& f, int sign, double h,
                               double safe_lo, double safe_hi);

// chi_tilde G^M (chi f)
ComplexField apply_cut_greens(const ComplexField& f, const CutoffPair& cut,
                              int sign, double h);
LinearMap cut_greens_map(const Grid& g, const CutoffPair& cut, int sign,
                         double h);

// h^2 Delta_pm as an exact spectral multiplier; with a graph, the
// pushed-forward operator realized by exact shear conjugation.
ComplexField conjugated_laplacian(const ComplexField& u, int sign, double h,
                                  const GraphBoundary* f_graph = nullptr);
LinearMap conj_laplacian_map(const Grid& g, int sign, double h);
LinearMap flat_conj_laplacian_map(const Grid& g, const GraphBoundary& f,
                                  int sign, double h);

// Coefficient form of the pushed-forward operator, derived from the change
// of variables; used to cross-check the shear route and the symbol tables.
ComplexField flat_conj_laplacian_coeffs(const ComplexField& u,
                                        const GraphBoundary& f, int sign,
                                        double h);

}  // namespace calderon
