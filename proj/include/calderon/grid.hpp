#pragma once

#include <array>
#include <cassert>
#include <memory>
#include <vector>

#include "calderon/util.hpp"

namespace calderon {

// Uniform periodic grid on the computational cell [y1_min, y1_min+L1) x M0.
// Axis 0 is y1; the remaining axes are the transversal circles. Storage is
// row-major with the last axis fastest. All point counts are powers of two.
//
// The y1 coordinate of node j is (j - origin1)*spacing so that y1 = 0 is an
// exact grid value when origin1 is in range.
class Grid {
 public:
  Grid(std::vector<int> dims, std::vector<double> lengths, int origin1);
  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  int rank() const { return static_cast<int>(dims_.size()); }
  int dim(int a) const { return dims_[a]; }
  const std::vector<int>& dims() const { return dims_; }
  std::size_t size() const { return size_; }
  double length(int a) const { return lengths_[a]; }
  double spacing(int a) const { return lengths_[a] / dims_[a]; }
  double max_spacing() const;
  double cell_volume() const;
  int origin1() const { return origin1_; }
  double y1_min() const { return coord(0, 0); }
  double y1_max() const { return coord(0, dims_[0] - 1); }

  double coord(int a, int j) const {
    return a == 0 ? (j - origin1_) * spacing(0) : j * spacing(a);
  }
  int signed_index(int a, int k) const {
    return k <= (dims_[a] - 1) / 2 ? k : k - dims_[a];
  }
  double freq(int a, int k) const {
    return 2.0 * M_PI * signed_index(a, k) / lengths_[a];
  }
  double max_freq(int a) const { return M_PI * dims_[a] / lengths_[a]; }

  std::size_t stride(int a) const { return strides_[a]; }
  std::size_t index2(int j0, int j1) const { return j0 * strides_[0] + j1; }
  std::size_t index3(int j0, int j1, int j2) const {
    return j0 * strides_[0] + j1 * strides_[1] + j2;
  }

  // Unnormalized forward DFT (sign -1) and normalized inverse, over all axes
  // or a single axis. in and out may alias.
  void fft_all(const cplx* in, cplx* out) const;
  void ifft_all(const cplx* in, cplx* out) const;
  void fft_axis(int axis, const cplx* in, cplx* out) const;
  void ifft_axis(int axis, const cplx* in, cplx* out) const;

 private:
  std::vector<int> dims_;
  std::vector<double> lengths_;
  std::vector<std::size_t> strides_;
  std::size_t size_;
  int origin1_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
};

struct ComplexField {
  const Grid* grid = nullptr;
  std::vector<cplx> v;

  ComplexField() = default;
  explicit ComplexField(const Grid& g) : grid(&g), v(g.size()) {}

  std::size_t size() const { return v.size(); }
  cplx& operator[](std::size_t i) { return v[i]; }
  const cplx& operator[](std::size_t i) const { return v[i]; }

  ComplexField& operator+=(const ComplexField& o);
  ComplexField& operator-=(const ComplexField& o);
  ComplexField& operator*=(cplx a);
  bool all_finite() const;
};

ComplexField operator+(ComplexField a, const ComplexField& b);
ComplexField operator-(ComplexField a, const ComplexField& b);
ComplexField operator*(cplx a, ComplexField u);

cplx dot(const ComplexField& a, const ComplexField& b);  // sum conj(a)*b
double max_abs(const ComplexField& u);

void require_finite(const ComplexField& u, const char* where);

}  // namespace calderon
