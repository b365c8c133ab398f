#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>

#include "calderon/causal.hpp"
#include "calderon/fields.hpp"
#include "calderon/freegreens.hpp"
#include "calderon/parabolic.hpp"

using namespace calderon;

namespace {
std::unique_ptr<Grid> torus16() {
  return std::make_unique<Grid>(std::vector<int>{16, 16, 16},
                                std::vector<double>{3.2, 2 * M_PI, 2 * M_PI},
                                6);
}
std::unique_ptr<Grid> smoke64() {
  return std::make_unique<Grid>(std::vector<int>{64, 16},
                                std::vector<double>{3.2, 2 * M_PI}, 24);
}

ComplexField pure_mode(const Grid& g, int k0, int k1, int k2) {
  ComplexField u(g);
  std::size_t i = 0;
  for (int j0 = 0; j0 < g.dim(0); ++j0)
    for (int j1 = 0; j1 < g.dim(1); ++j1)
      for (int j2 = 0; j2 < (g.rank() == 3 ? g.dim(2) : 1); ++j2) {
        double ph = g.freq(0, k0) * g.coord(0, j0) +
                    g.freq(1, k1) * g.coord(1, j1);
        if (g.rank() == 3) ph += g.freq(2, k2) * g.coord(2, j2);
        u[i++] = cplx(std::cos(ph), std::sin(ph));
      }
  return u;
}

ComplexField bump_field(const Grid& g, double center, double width, Rng& rng) {
  ComplexField u = smooth_random(g, rng, 0.3);
  std::size_t cols = g.size() / g.dim(0);
  for (int j = 0; j < g.dim(0); ++j) {
    double t = (g.coord(0, j) - center) / width;
    double w = std::exp(-4.0 * t * t) * smooth_step(2.0 - std::abs(t));
    for (std::size_t c = 0; c < cols; ++c) u[j * cols + c] *= w;
  }
  return u;
}
}  // namespace

TEST_CASE("free greens multiplier exactness on pure modes") {
  auto g = torus16();
  double h = 0.21;
  FreeGreens G(*g, +1, h);
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    int k0 = static_cast<int>(rng.next_u64() % g->dim(0));
    int k1 = static_cast<int>(rng.next_u64() % g->dim(1));
    int k2 = static_cast<int>(rng.next_u64() % g->dim(2));
    ComplexField mode = pure_mode(*g, k0, k1, k2);
    ComplexField v = G.as_map().apply(mode);
    cplx expect = 1.0 / G.denominator({k0, k1, k2});
    double err = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
      err = std::max(err, std::abs(v[i] - expect * mode[i]));
    CHECK(err <= 1e-12 * std::abs(expect) * 2.0 + 1e-14);
  }

  // constant field: multiplier 1/(-1)
  ComplexField one(*g);
  for (auto& x : one.v) x = 1.0;
  ComplexField v = G.as_map().apply(one);
  for (std::size_t i = 0; i < v.size(); i += 97)
    CHECK(std::abs(v[i] + 1.0) < 1e-12);
}

TEST_CASE("free greens resolvent identity and linearity") {
  auto g = torus16();
  double h = 0.21;
  FreeGreens G(*g, +1, h);
  LinearMap lap = conj_laplacian_map(*g, +1, h);
  for (int t = 0; t < 20; ++t) {
    Rng rng = Rng::substream(5, t);
    ComplexField f = bump_field(*g, 0.3, 0.4, rng);
    ComplexField back = lap.apply(G.apply(f, -0.7, 1.4));
    double rel = lr_norm(back - f, 2.0) / lr_norm(f, 2.0);
    CHECK(rel <= 1e-8);
  }
  // linearity
  Rng rng(9);
  ComplexField a = bump_field(*g, 0.2, 0.3, rng);
  ComplexField b = bump_field(*g, 0.5, 0.3, rng);
  cplx al(0.3, -1.1), be(2.0, 0.4);
  ComplexField lhs = G.as_map().apply(al * a + be * b);
  ComplexField rhs = al * G.as_map().apply(a) + be * G.as_map().apply(b);
  CHECK(lr_norm(lhs - rhs, 2.0) <= 1e-12 * lr_norm(rhs, 2.0));
}

TEST_CASE("margin violation raises") {
  auto g = torus16();
  FreeGreens G(*g, +1, 0.21);
  ComplexField f(*g);
  for (auto& x : f.v) x = 1.0;  // constant field has mass at the seam
  CHECK_THROWS_AS(G.apply(f, -0.2, 0.2), MarginViolation);
}

TEST_CASE("resonant denominator aborts") {
  auto g = torus16();
  // h = 0.2 on the 2pi-torus: lambda = 25 = 3^2+4^2 gives h^2 lambda = 1 at
  // xi1 = 0, an exact zero of the + symbol
  CHECK_THROWS_AS(FreeGreens(*g, +1, 0.2), ResonantDenominator);
  CHECK_NOTHROW(FreeGreens(*g, +1, 0.205));
}

TEST_CASE("cut greens agrees with free greens on supported input") {
  auto g = torus16();
  double h = 0.23;
  CutoffPair cut = make_cutoff_pair(*g, -0.15, 0.85, 0.0, 0.25);
  Rng rng(31);
  ComplexField f = bump_field(*g, 0.35, 0.2, rng);
  ComplexField a = apply_cut_greens(f, cut, +1, h);
  FreeGreens G(*g, +1, h);
  ComplexField b = G.as_map().apply(f);
  // chi = 1 on supp f, so only the chi~ post-cutoff differs; compare where
  // chi~ = 1
  std::vector<std::uint8_t> mask(g->size(), 0);
  std::size_t cols = g->size() / g->dim(0);
  for (int j = 0; j < g->dim(0); ++j) {
    double y = g->coord(0, j);
    if (y > cut.chi_tilde.lo && y < cut.chi_tilde.hi)
      std::fill_n(mask.begin() + j * cols, cols, std::uint8_t{1});
  }
  double err = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (mask[i]) err = std::max(err, std::abs(a[i] - b[i]));
  CHECK(err <= 1e-10 * max_abs(b));

  ComplexField zero(*g);
  ComplexField z = apply_cut_greens(zero, cut, +1, h);
  CHECK(lr_norm(z, 2.0) == 0.0);
}

TEST_CASE("conjugated laplacian sign flip via reflection") {
  auto g = torus16();
  double h = 0.17;
  Rng rng(3);
  ComplexField u = white_noise(*g, rng);
  {
    // drop the unpaired y1 Nyquist plane; reflection has no partner for it
    ComplexField hat(*g);
    g->fft_all(u.v.data(), hat.v.data());
    std::size_t cols = g->size() / g->dim(0);
    int kn = g->dim(0) / 2;
    for (std::size_t c = 0; c < cols; ++c) hat[kn * cols + c] = 0.0;
    g->ifft_all(hat.v.data(), u.v.data());
  }
  int n1 = g->dim(0);
  int o = g->origin1();
  std::size_t cols = g->size() / n1;
  auto reflect = [&](const ComplexField& w) {
    ComplexField r(*g);
    for (int j = 0; j < n1; ++j) {
      int jr = ((2 * o - j) % n1 + n1) % n1;
      for (std::size_t c = 0; c < cols; ++c)
        r[jr * cols + c] = w[j * cols + c];
    }
    return r;
  };
  ComplexField lhs = conjugated_laplacian(u, -1, h);
  ComplexField rhs = reflect(conjugated_laplacian(reflect(u), +1, h));
  CHECK(lr_norm(lhs - rhs, 2.0) <= 1e-11 * lr_norm(lhs, 2.0));
}

TEST_CASE("flattened conjugated laplacian") {
  auto g = torus16();
  double h = 0.19;
  GraphBoundary flat0 = GraphBoundary::flat(0.0, 2);
  Rng rng(8);
  ComplexField u = white_noise(*g, rng);
  ComplexField a = conjugated_laplacian(u, +1, h, &flat0);
  ComplexField b = conjugated_laplacian(u, +1, h);
  CHECK(lr_norm(a - b, 2.0) <= 1e-11 * lr_norm(b, 2.0));

  // shear route vs analytic coefficient route on a bandlimited field
  GraphBoundary f = GraphBoundary::cosine(0.1, 0.0, 0, 2);
  ComplexField smooth(*g);
  std::size_t i = 0;
  for (int j0 = 0; j0 < g->dim(0); ++j0)
    for (int j1 = 0; j1 < g->dim(1); ++j1)
      for (int j2 = 0; j2 < g->dim(2); ++j2) {
        double ph = 2.0 * g->freq(0, 1) * g->coord(0, j0) +
                    0.5 * std::cos(g->coord(1, j1));
        smooth[i++] = std::exp(cplx(0.0, ph));
      }
  ComplexField via_shear = conjugated_laplacian(smooth, +1, h, &f);
  ComplexField via_coeff = flat_conj_laplacian_coeffs(smooth, f, +1, h);
  double rel = lr_norm(via_shear - via_coeff, 2.0) / lr_norm(via_shear, 2.0);
  CHECK(rel <= 1e-8);
}

TEST_CASE("causal weights invert exactly") {
  CausalWeights w = causal_weights(cplx(1.1, 0.4), 0.05, 0.13);
  int n = 40;
  std::vector<cplx> u(n), v(n), back(n);
  Rng rng(77);
  for (auto& x : u) x = rng.normal_cplx();
  causal_inv(w, u.data(), v.data(), n, 1);
  causal_fwd(w, v.data(), back.data(), n, 1);
  double err = 0;
  for (int i = 0; i < n; ++i) err = std::max(err, std::abs(back[i] - u[i]));
  CHECK(err < 1e-12);

  // adjoint identities
  std::vector<cplx> y(n), x1(n), x2(n);
  for (auto& t : y) t = rng.normal_cplx();
  causal_inv_adjoint(w, y.data(), x1.data(), n, 1);
  cplx ip1 = 0, ip2 = 0;
  for (int i = 0; i < n; ++i) ip1 += std::conj(y[i]) * v[i];
  for (int i = 0; i < n; ++i) ip2 += std::conj(x1[i]) * u[i];
  CHECK(std::abs(ip1 - ip2) < 1e-12 * std::abs(ip1));
  causal_fwd_adjoint(w, y.data(), x2.data(), n, 1);
  std::vector<cplx> u2(n);
  causal_fwd(w, u.data(), u2.data(), n, 1);
  cplx ip3 = 0, ip4 = 0;
  for (int i = 0; i < n; ++i) ip3 += std::conj(y[i]) * u2[i];
  for (int i = 0; i < n; ++i) ip4 += std::conj(x2[i]) * u[i];
  CHECK(std::abs(ip3 - ip4) < 1e-12 * std::abs(ip3));
}

TEST_CASE("two pole column matches dense kernel and stays causal") {
  int n = 48;
  double h = 0.15, dx = 0.05;
  cplx ap(0.3, 0.9), am(-0.2, 0.6);
  std::vector<cplx> u(n, 0.0), v(n);
  Rng rng(5);
  for (int i = n / 3; i < n; ++i) u[i] = rng.normal_cplx();
  two_pole_column(ap, am, h, dx, u.data(), v.data(), n, 1, false);
  for (int i = 0; i < n / 3 - 1; ++i) CHECK(std::abs(v[i]) == 0.0);

  // dense evaluation of the same piecewise-linear quadrature model
  auto kernel = [&](double t) {
    return cplx(0, 1) / h *
           (std::exp(cplx(0, 1) * ap * t / h) -
            std::exp(cplx(0, 1) * am * t / h)) /
           (ap - am);
  };
  for (int i = 0; i < n; ++i) {
    cplx acc = 0;
    const int sub = 400;
    for (int j = 0; j <= i; ++j) {
      // integrate kernel against the linear interpolant on [x_{j-1}, x_j]
      if (j == 0) continue;
      for (int s2 = 0; s2 < sub; ++s2) {
        double tau = (s2 + 0.5) / sub;
        double y = (j - 1 + tau) * dx;
        cplx uy = u[j - 1] * (1 - tau) + u[j] * tau;
        acc += kernel(i * dx - y) * uy * (dx / sub);
      }
    }
    CHECK(std::abs(v[i] - acc) < 5e-4 * (1.0 + std::abs(acc)));
  }

  // confluent continuity
  std::vector<cplx> v1(n), v2(n);
  two_pole_column(ap, ap + cplx(2e-9, 0), h, dx, u.data(), v1.data(), n, 1,
                  false);
  two_pole_column(ap, ap + cplx(2e-7, 0), h, dx, u.data(), v2.data(), n, 1,
                  false);
  double scale = 0;
  for (auto& t : v2) scale = std::max(scale, std::abs(t));
  for (int i = 0; i < n; ++i) CHECK(std::abs(v1[i] - v2[i]) < 2e-5 * scale);

  // adjoint identity
  std::vector<cplx> y(n), x(n);
  for (auto& t : y) t = rng.normal_cplx();
  two_pole_column(ap, am, h, dx, y.data(), x.data(), n, 1, true);
  cplx ip1 = 0, ip2 = 0;
  for (int i = 0; i < n; ++i) ip1 += std::conj(y[i]) * v[i];
  for (int i = 0; i < n; ++i) ip2 += std::conj(x[i]) * u[i];
  CHECK(std::abs(ip1 - ip2) < 1e-11 * std::abs(ip1));
}

namespace {
Symbol elliptic_B(double scale, int tdim) {
  Symbol B;
  B.label = "B";
  B.tdim = tdim;
  B.order_trans = 1;
  B.eval = [scale](const TransPoint&, const std::array<double, 3>& xi) {
    return cplx(scale * std::sqrt(1.0 + xi[1] * xi[1] + xi[2] * xi[2]), 0.0);
  };
  return B;
}
}  // namespace

TEST_CASE("parabolic scalar flow: ODE example, support, inverse pair") {
  auto g = smoke64();
  double h = 0.4;
  ParabolicSpec spec = make_parabolic_spec(elliptic_B(1.0, 1), {}, h, *g);
  CHECK(spec.c_ell > 0.9);

  // indicator of {x1 >= 0}: mode xi' = 0 solves h v' + v = u
  ComplexField u(*g);
  std::size_t cols = g->size() / g->dim(0);
  for (int j = 0; j < g->dim(0); ++j)
    if (g->coord(0, j) >= 0)
      for (std::size_t c = 0; c < cols; ++c) u[j * cols + c] = 1.0;
  ComplexField v = apply_jinv(u, spec);
  double dx = g->spacing(0);
  double tol = 0.7 * dx / h;
  for (int j = 0; j < g->dim(0); ++j) {
    double x1 = g->coord(0, j);
    double expect = x1 >= 0 ? 1.0 - std::exp(-x1 / h) : 0.0;
    CHECK(std::abs(v[j * cols] - expect) <= tol + 1e-12);
  }

  // u == 0
  ComplexField zero(*g);
  CHECK(lr_norm(apply_jinv(zero, spec), 2.0) == 0.0);

  // exact support preservation from {x1 > 0.1}
  Rng rng(21);
  ComplexField f = white_noise(*g, rng);
  for (int j = 0; j < g->dim(0); ++j)
    if (g->coord(0, j) <= 0.1)
      for (std::size_t c = 0; c < cols; ++c) f[j * cols + c] = 0.0;
  ComplexField w = apply_jinv(f, spec);
  for (int j = 0; j < g->dim(0); ++j)
    if (g->coord(0, j) <= 0.0)
      for (std::size_t c = 0; c < cols; ++c)
        CHECK(std::abs(w[j * cols + c]) == 0.0);

  // j o j^{-1} = identity on margin-safe inputs
  Rng rng2(22);
  ComplexField ms = bump_field(*g, 0.4, 0.4, rng2);
  ComplexField round = j_map(spec, *g).apply(apply_jinv(ms, spec));
  CHECK(lr_norm(round - ms, 2.0) <= 1e-9 * lr_norm(ms, 2.0));
}

TEST_CASE("parabolic with order-zero correction") {
  auto g = smoke64();
  double h = 0.2;
  Symbol B0;
  B0.label = "B0";
  B0.tdim = 1;
  B0.order_trans = 0;
  B0.depends_axes = {0};
  B0.eval = [](const TransPoint& x, const std::array<double, 3>& xi) {
    return cplx(0.3 * std::sin(x[0]), 0.1) / std::sqrt(1.0 + xi[1] * xi[1]);
  };
  ParabolicSpec spec = make_parabolic_spec(elliptic_B(1.0, 1), B0, h, *g);

  Rng rng(4);
  ComplexField u = bump_field(*g, 0.4, 0.4, rng);
  auto detail = apply_Jinv_detail(u, spec);
  CHECK(detail.residual <= 1e-10);

  // J(J^{-1} u) = u
  LinearMap j = j_map(spec, *g);
  LinearMap opb0 = weyl_quantize(B0, h, *g);
  ComplexField check = j.apply(detail.field) + cplx(h) * opb0.apply(detail.field);
  CHECK(lr_norm(check - u, 2.0) <= 1e-9 * lr_norm(u, 2.0));

  // B0 == 0 reduces to jinv
  ParabolicSpec plain = make_parabolic_spec(elliptic_B(1.0, 1), {}, h, *g);
  ComplexField a = apply_Jinv(u, plain);
  ComplexField b = apply_jinv(u, plain);
  CHECK(lr_norm(a - b, 2.0) <= 1e-12 * lr_norm(b, 2.0));

  // exact support preservation through the Neumann correction
  std::size_t cols = g->size() / g->dim(0);
  ComplexField f = white_noise(*g, rng);
  for (int j2 = 0; j2 < g->dim(0); ++j2)
    if (g->coord(0, j2) <= 0.1)
      for (std::size_t c = 0; c < cols; ++c) f[j2 * cols + c] = 0.0;
  ComplexField w = apply_Jinv(f, spec);
  for (int j2 = 0; j2 < g->dim(0); ++j2)
    if (g->coord(0, j2) <= 0.0)
      for (std::size_t c = 0; c < cols; ++c)
        CHECK(std::abs(w[j2 * cols + c]) == 0.0);
}

TEST_CASE("parabolic block path (x'-dependent B)") {
  auto g = torus16();
  double h = 0.3;
  Symbol B;
  B.label = "Bx";
  B.tdim = 2;
  B.order_trans = 1;
  B.depends_axes = {0};
  B.eval = [](const TransPoint& x, const std::array<double, 3>& xi) {
    double jap = std::sqrt(1.0 + xi[1] * xi[1] + xi[2] * xi[2]);
    return cplx((1.0 + 0.3 * std::cos(x[0])) * jap, 0.2 * xi[1]);
  };
  ParabolicSpec spec = make_parabolic_spec(B, {}, h, *g);
  CHECK(spec.c_ell > 0.5);

  Rng rng(15);
  ComplexField u = bump_field(*g, 0.4, 0.4, rng);
  ComplexField v = apply_jinv(u, spec);
  ComplexField round = j_map(spec, *g).apply(v);
  CHECK(lr_norm(round - u, 2.0) <= 1e-9 * lr_norm(u, 2.0));

  // causality
  std::size_t cols = g->size() / g->dim(0);
  ComplexField f = white_noise(*g, rng);
  for (int j = 0; j < g->dim(0); ++j)
    if (g->coord(0, j) <= 0.1)
      for (std::size_t c = 0; c < cols; ++c) f[j * cols + c] = 0.0;
  ComplexField w = apply_jinv(f, spec);
  for (int j = 0; j < g->dim(0); ++j)
    if (g->coord(0, j) <= 0.0)
      for (std::size_t c = 0; c < cols; ++c)
        CHECK(std::abs(w[j * cols + c]) == 0.0);

  // adjoint identity
  ComplexField y = white_noise(*g, rng);
  LinearMap jinv = jinv_map(spec, *g);
  cplx ip1 = dot(y, jinv.apply(u));
  cplx ip2 = dot(jinv.apply_adjoint(y), u);
  CHECK(std::abs(ip1 - ip2) <= 1e-10 * std::abs(ip1));
}

TEST_CASE("disjoint support decay slope") {
  auto g = smoke64();
  std::vector<double> h_list{0.28, 0.2, 0.14, 0.1, 0.07};
  auto spec_of_h = [&](double h) {
    return make_parabolic_spec(elliptic_B(1.5, 1), {}, h, *g);
  };
  DecaySweep sweep =
      disjoint_support_decay(spec_of_h, 0.3, h_list, 2.0, *g, 101);
  CHECK(sweep.slope >= 1.7);
  // doubling epsilon does not decrease the slope
  DecaySweep sweep2 =
      disjoint_support_decay(spec_of_h, 0.6, h_list, 2.0, *g, 101);
  CHECK(sweep2.slope >= sweep.slope - 0.05);
  // trivial: f supported in M+ gives zero
  ParabolicSpec spec = spec_of_h(0.14);
  std::size_t cols = g->size() / g->dim(0);
  Rng rng(7);
  ComplexField f = white_noise(*g, rng);
  for (int j = 0; j < g->dim(0); ++j)
    if (g->coord(0, j) < 0)
      for (std::size_t c = 0; c < cols; ++c) f[j * cols + c] = 0.0;
  ComplexField masked(*g);
  for (int j = 0; j < g->dim(0); ++j)
    if (g->coord(0, j) < 0)
      for (std::size_t c = 0; c < cols; ++c)
        masked[j * cols + c] = f[j * cols + c];
  CHECK(lr_norm(apply_jinv(masked, spec), 2.0) == 0.0);
}
