#pragma once

#include <functional>
#include <string>
#include <utility>

#include "calderon/fields.hpp"
#include "calderon/grid.hpp"

namespace calderon {

// Abstract "apply" contract. Maps carry their adjoint (w.r.t. the discrete
// L2 pairing sum conj(a)*b) so norm estimation can run duality ascent.
struct LinearMap {
  std::string label;
  std::function<ComplexField(const ComplexField&)> apply;
  std::function<ComplexField(const ComplexField&)> apply_adjoint;

  bool has_adjoint() const { return static_cast<bool>(apply_adjoint); }
  ComplexField operator()(const ComplexField& u) const { return apply(u); }
};

LinearMap identity_map();

// a after b
LinearMap compose(LinearMap a, LinearMap b);
LinearMap map_sum(LinearMap a, LinearMap b);
LinearMap map_diff(LinearMap a, LinearMap b);
LinearMap scaled_map(cplx s, LinearMap a);

// pointwise multiplication by a stored field
LinearMap pointwise_map(ComplexField V, std::string label = "mult");

// multiplication by a real 0/1 mask
LinearMap mask_map(std::vector<std::uint8_t> mask, std::string label = "mask");

// exact Fourier multiplier m(k-indices)
LinearMap multiplier_map(const Grid& g,
                         std::function<cplx(const std::vector<int>&)> m,
                         std::string label = "multiplier");

// multiplication by a function of y1 only (tail guards, cell cutoffs)
LinearMap profile1_map(const Grid& g, const std::function<double(double)>& prof,
                       std::string label = "profile");

// indicator of {x1 > 0} (strictly positive grid nodes)
LinearMap mplus_mask(const Grid& g);

}  // namespace calderon
