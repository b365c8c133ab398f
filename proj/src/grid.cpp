#include "calderon/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace calderon {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct Grid::Plans {
  fftw_plan fwd_all = nullptr;
  fftw_plan bwd_all = nullptr;
  std::vector<fftw_plan> fwd_axis;
  std::vector<fftw_plan> bwd_axis;

  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd_all) fftw_destroy_plan(fwd_all);
    if (bwd_all) fftw_destroy_plan(bwd_all);
    for (auto p : fwd_axis)
      if (p) fftw_destroy_plan(p);
    for (auto p : bwd_axis)
      if (p) fftw_destroy_plan(p);
  }
};

Grid::Grid(std::vector<int> dims, std::vector<double> lengths, int origin1)
    : dims_(std::move(dims)), lengths_(std::move(lengths)), origin1_(origin1) {
  if (dims_.empty() || dims_.size() != lengths_.size())
    throw ConfigError("grid dims/lengths mismatch");
  size_ = 1;
  for (int n : dims_) {
    if (n < 2 || (n & (n - 1)) != 0)
      throw ConfigError("grid point counts must be powers of two");
    size_ *= static_cast<std::size_t>(n);
  }
  for (double l : lengths_)
    if (!(l > 0)) throw ConfigError("grid lengths must be positive");
  strides_.resize(dims_.size());
  std::size_t s = 1;
  for (int a = rank() - 1; a >= 0; --a) {
    strides_[a] = s;
    s *= dims_[a];
  }

  plans_ = std::make_unique<Plans>();
  std::vector<cplx> scratch_in(size_), scratch_out(size_);
  auto* in = reinterpret_cast<fftw_complex*>(scratch_in.data());
  auto* out = reinterpret_cast<fftw_complex*>(scratch_out.data());
  unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;

  std::lock_guard<std::mutex> lock(planner_mutex());
  plans_->fwd_all =
      fftw_plan_dft(rank(), dims_.data(), in, out, FFTW_FORWARD, flags);
  plans_->bwd_all =
      fftw_plan_dft(rank(), dims_.data(), in, out, FFTW_BACKWARD, flags);

  plans_->fwd_axis.resize(rank());
  plans_->bwd_axis.resize(rank());
  for (int a = 0; a < rank(); ++a) {
    fftw_iodim tdim;
    tdim.n = dims_[a];
    tdim.is = static_cast<int>(strides_[a]);
    tdim.os = tdim.is;
    std::vector<fftw_iodim> loops;
    for (int b = 0; b < rank(); ++b) {
      if (b == a) continue;
      fftw_iodim d;
      d.n = dims_[b];
      d.is = static_cast<int>(strides_[b]);
      d.os = d.is;
      loops.push_back(d);
    }
    plans_->fwd_axis[a] = fftw_plan_guru_dft(
        1, &tdim, static_cast<int>(loops.size()), loops.data(), in, out,
        FFTW_FORWARD, flags);
    plans_->bwd_axis[a] = fftw_plan_guru_dft(
        1, &tdim, static_cast<int>(loops.size()), loops.data(), in, out,
        FFTW_BACKWARD, flags);
  }
}

Grid::~Grid() = default;

double Grid::max_spacing() const {
  double m = 0;
  for (int a = 0; a < rank(); ++a) m = std::max(m, spacing(a));
  return m;
}

double Grid::cell_volume() const {
  double v = 1;
  for (double l : lengths_) v *= l;
  return v;
}

void Grid::fft_all(const cplx* in, cplx* out) const {
  fftw_execute_dft(plans_->fwd_all,
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void Grid::ifft_all(const cplx* in, cplx* out) const {
  fftw_execute_dft(plans_->bwd_all,
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  double inv = 1.0 / static_cast<double>(size_);
  for (std::size_t i = 0; i < size_; ++i) out[i] *= inv;
}

void Grid::fft_axis(int axis, const cplx* in, cplx* out) const {
  fftw_execute_dft(plans_->fwd_axis[axis],
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void Grid::ifft_axis(int axis, const cplx* in, cplx* out) const {
  fftw_execute_dft(plans_->bwd_axis[axis],
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  double inv = 1.0 / dims_[axis];
  for (std::size_t i = 0; i < size_; ++i) out[i] *= inv;
}

ComplexField& ComplexField::operator+=(const ComplexField& o) {
  assert(v.size() == o.v.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
  return *this;
}

ComplexField& ComplexField::operator-=(const ComplexField& o) {
  assert(v.size() == o.v.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
  return *this;
}

ComplexField& ComplexField::operator*=(cplx a) {
  for (auto& x : v) x *= a;
  return *this;
}

bool ComplexField::all_finite() const {
  for (const auto& x : v)
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
  return true;
}

ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }
ComplexField operator*(cplx a, ComplexField u) { return u *= a; }

cplx dot(const ComplexField& a, const ComplexField& b) {
  assert(a.size() == b.size());
  cplx s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double max_abs(const ComplexField& u) {
  double m = 0;
  for (const auto& x : u.v) m = std::max(m, std::abs(x));
  return m;
}

void require_finite(const ComplexField& u, const char* where) {
  if (!u.all_finite()) throw Error(std::string("non-finite field in ") + where);
}

}  // namespace calderon
