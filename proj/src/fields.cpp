#include "calderon/fields.hpp"

#include <cmath>

namespace calderon {

double lr_norm(const ComplexField& u, double r,
               const std::vector<std::uint8_t>* mask) {
  const Grid& g = *u.grid;
  if (r >= kInfNorm * 0.5 || std::isinf(r)) {
    double m = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (mask && !(*mask)[i]) continue;
      m = std::max(m, std::abs(u[i]));
    }
    return m;
  }
  double w = g.cell_volume() / static_cast<double>(g.size());
  double s = 0;
  if (r == 2.0) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (mask && !(*mask)[i]) continue;
      s += std::norm(u[i]);
    }
    return std::sqrt(s * w);
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    s += std::pow(std::abs(u[i]), r);
  }
  return std::pow(s * w, 1.0 / r);
}

ComplexField spectral_multiplier(
    const ComplexField& u,
    const std::function<cplx(const std::vector<int>&)>& m) {
  const Grid& g = *u.grid;
  ComplexField hat(g);
  g.fft_all(u.v.data(), hat.v.data());
  std::vector<int> k(g.rank());
  std::size_t i = 0;
  if (g.rank() == 2) {
    for (k[0] = 0; k[0] < g.dim(0); ++k[0])
      for (k[1] = 0; k[1] < g.dim(1); ++k[1]) hat[i++] *= m(k);
  } else {
    for (k[0] = 0; k[0] < g.dim(0); ++k[0])
      for (k[1] = 0; k[1] < g.dim(1); ++k[1])
        for (k[2] = 0; k[2] < g.dim(2); ++k[2]) hat[i++] *= m(k);
  }
  ComplexField out(g);
  g.ifft_all(hat.v.data(), out.v.data());
  return out;
}

ComplexField bessel_multiplier(const ComplexField& u, double k, double h,
                               MultiplierDirection dir) {
  if (k == 0.0) return u;
  const Grid& g = *u.grid;
  int first_axis = dir == MultiplierDirection::full ? 0 : 1;
  return spectral_multiplier(u, [&](const std::vector<int>& idx) {
    double s = 1.0;
    for (int a = first_axis; a < g.rank(); ++a) {
      double xi = h * g.freq(a, idx[a]);
      s += xi * xi;
    }
    return cplx(std::pow(s, 0.5 * k), 0.0);
  });
}

double sobolev_norm(const ComplexField& u, double k, double r, double h,
                    const std::vector<std::uint8_t>* mask) {
  return lr_norm(bessel_multiplier(u, k, h, MultiplierDirection::full), r, mask);
}

double mixed_norm(const ComplexField& u, double k, double l, double r, double h,
                  const std::vector<std::uint8_t>* mask) {
  ComplexField w = bessel_multiplier(u, l, h, MultiplierDirection::full);
  w = bessel_multiplier(w, k, h, MultiplierDirection::transversal);
  return lr_norm(w, r, mask);
}

double norm(const ComplexField& u, const NormSpec& spec,
            const std::vector<std::uint8_t>* mask) {
  switch (spec.kind) {
    case NormSpec::Kind::lr:
      return lr_norm(u, spec.r, mask);
    case NormSpec::Kind::sobolev:
      return sobolev_norm(u, spec.l, spec.r, spec.h, mask);
    case NormSpec::Kind::mixed:
      return mixed_norm(u, spec.k, spec.l, spec.r, spec.h, mask);
  }
  return 0;
}

ComplexField white_noise(const Grid& g, Rng& rng) {
  ComplexField u(g);
  for (auto& x : u.v) x = rng.normal_cplx();
  return u;
}

ComplexField smooth_random(const Grid& g, Rng& rng, double corr_len) {
  ComplexField hat(g);
  std::vector<int> k(g.rank());
  std::size_t i = 0;
  auto fill = [&](auto&& self, int axis) -> void {
    if (axis == g.rank()) {
      double s = 0;
      for (int a = 0; a < g.rank(); ++a) {
        double xi = g.freq(a, k[a]);
        s += xi * xi;
      }
      hat[i++] = rng.normal_cplx() * std::exp(-0.5 * s * corr_len * corr_len);
      return;
    }
    for (k[axis] = 0; k[axis] < g.dim(axis); ++k[axis]) self(self, axis + 1);
  };
  fill(fill, 0);
  ComplexField u(g);
  g.ifft_all(hat.v.data(), u.v.data());
  double n2 = lr_norm(u, 2.0);
  if (n2 > 0) u *= 1.0 / n2;
  return u;
}

double margin_mass_fraction(const ComplexField& u, double lo, double hi) {
  const Grid& g = *u.grid;
  std::size_t cols = g.size() / g.dim(0);
  double total = 0, outside = 0;
  for (int j = 0; j < g.dim(0); ++j) {
    double y1 = g.coord(0, j);
    double s = 0;
    for (std::size_t c = 0; c < cols; ++c) s += std::norm(u[j * cols + c]);
    total += s;
    if (y1 < lo || y1 > hi) outside += s;
  }
  return total == 0 ? 0.0 : outside / total;
}

ComplexField pointwise(const ComplexField& a, const ComplexField& b) {
  ComplexField out(*a.grid);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

}  // namespace calderon
