#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>

#include "calderon/fields.hpp"
#include "calderon/geometry.hpp"
#include "calderon/grid.hpp"
#include "calderon/opnorm.hpp"
#include "calderon/quantize.hpp"

using namespace calderon;

namespace {
std::unique_ptr<Grid> small_torus_grid() {
  // 16 x 16 x 16, y1 cell [-1.2, 2.0)
  return std::make_unique<Grid>(std::vector<int>{16, 16, 16},
                                std::vector<double>{3.2, 2 * M_PI, 2 * M_PI},
                                6);
}
std::unique_ptr<Grid> smoke_grid() {
  return std::make_unique<Grid>(std::vector<int>{32, 16},
                                std::vector<double>{3.2, 2 * M_PI}, 12);
}
}  // namespace

TEST_CASE("fft roundtrip and parseval") {
  auto g = small_torus_grid();
  Rng rng(7);
  ComplexField u = white_noise(*g, rng);
  ComplexField hat(*g), back(*g);
  g->fft_all(u.v.data(), hat.v.data());
  g->ifft_all(hat.v.data(), back.v.data());
  double err = 0, scale = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    err = std::max(err, std::abs(back[i] - u[i]));
    scale = std::max(scale, std::abs(u[i]));
  }
  CHECK(err / scale < 1e-12);

  // Parseval: sum |u|^2 = (1/N) sum |hat|^2
  double a = 0, b = 0;
  for (std::size_t i = 0; i < u.size(); ++i) a += std::norm(u[i]);
  for (std::size_t i = 0; i < u.size(); ++i) b += std::norm(hat[i]);
  CHECK(std::abs(a - b / double(g->size())) / a < 1e-12);
}

TEST_CASE("axis transform equals composed full transform") {
  auto g = small_torus_grid();
  Rng rng(3);
  ComplexField u = white_noise(*g, rng);
  ComplexField a(*g), b(*g), c(*g), full(*g);
  g->fft_axis(0, u.v.data(), a.v.data());
  g->fft_axis(1, a.v.data(), b.v.data());
  g->fft_axis(2, b.v.data(), c.v.data());
  g->fft_all(u.v.data(), full.v.data());
  double err = 0;
  for (std::size_t i = 0; i < u.size(); ++i)
    err = std::max(err, std::abs(c[i] - full[i]));
  CHECK(err < 1e-9 * max_abs(full));
}

TEST_CASE("lr norm basics") {
  auto g = small_torus_grid();
  ComplexField one(*g);
  for (auto& x : one.v) x = 1.0;
  double vol = g->cell_volume();
  CHECK(lr_norm(one, 2.0) == doctest::Approx(std::sqrt(vol)).epsilon(1e-12));
  CHECK(lr_norm(one, kInfNorm) == doctest::Approx(1.0));

  // single Fourier mode: L2 norm = sqrt(cell volume)
  ComplexField mode(*g);
  std::size_t i = 0;
  for (int j0 = 0; j0 < g->dim(0); ++j0)
    for (int j1 = 0; j1 < g->dim(1); ++j1)
      for (int j2 = 0; j2 < g->dim(2); ++j2) {
        double ph = g->freq(0, 1) * g->coord(0, j0) + 2.0 * g->coord(1, j1);
        mode[i++] = cplx(std::cos(ph), std::sin(ph));
      }
  CHECK(lr_norm(mode, 2.0) == doctest::Approx(std::sqrt(vol)).epsilon(1e-12));

  // homogeneity
  Rng rng(11);
  ComplexField u = white_noise(*g, rng);
  cplx alpha(1.3, -0.7);
  ComplexField au = alpha * u;
  for (double r : {1.5, 2.0, 6.0}) {
    CHECK(lr_norm(au, r) ==
          doctest::Approx(std::abs(alpha) * lr_norm(u, r)).epsilon(1e-12));
  }
}

TEST_CASE("bessel multiplier") {
  auto g = small_torus_grid();
  Rng rng(5);
  ComplexField u = white_noise(*g, rng);
  double h = 0.2;

  ComplexField same = bessel_multiplier(u, 0.0, h, MultiplierDirection::full);
  double err = 0;
  for (std::size_t i = 0; i < u.size(); ++i)
    err = std::max(err, std::abs(same[i] - u[i]));
  CHECK(err < 1e-12 * max_abs(u));

  // single mode diagonal action
  ComplexField mode(*g);
  std::size_t i = 0;
  for (int j0 = 0; j0 < g->dim(0); ++j0)
    for (int j1 = 0; j1 < g->dim(1); ++j1)
      for (int j2 = 0; j2 < g->dim(2); ++j2) {
        double ph = 3.0 * g->coord(1, j1) - 2.0 * g->coord(2, j2);
        mode[i++] = cplx(std::cos(ph), std::sin(ph));
      }
  ComplexField w = bessel_multiplier(mode, 2.0, h, MultiplierDirection::full);
  double expect = 1.0 + h * h * (9.0 + 4.0);
  err = 0;
  for (std::size_t k = 0; k < w.size(); ++k)
    err = std::max(err, std::abs(w[k] - expect * mode[k]));
  CHECK(err < 1e-11 * expect);

  // inverse pair
  ComplexField v = bessel_multiplier(
      bessel_multiplier(u, 1.7, h, MultiplierDirection::transversal), -1.7, h,
      MultiplierDirection::transversal);
  err = 0;
  for (std::size_t k = 0; k < u.size(); ++k)
    err = std::max(err, std::abs(v[k] - u[k]));
  CHECK(err < 1e-12 * max_abs(u));

  // mixed-norm embedding at r=2: ||<hD'>^{-k}<hD>^l u|| >= ||<hD>^{l-k} u||
  for (int trial = 0; trial < 20; ++trial) {
    Rng r2 = Rng::substream(99, trial);
    ComplexField f = white_noise(*g, r2);
    double k = 1.0, l = 2.0;
    double mixed = mixed_norm(f, -k, l, 2.0, h);
    double sob = sobolev_norm(f, l - k, 2.0, h);
    CHECK(mixed >= sob * (1.0 - 1e-9));
  }
}

TEST_CASE("graph flatten round trip") {
  GraphBoundary f = GraphBoundary::cosine(0.1, 0.0, 0, 2);
  CHECK(f.f({{0.0, 0.0}}) == doctest::Approx(0.1));
  Point p;
  p.y1 = 0.1;
  p.yp[0] = 0.0;
  Point q = flatten(p, f);
  CHECK(q.y1 == doctest::Approx(0.0));

  GraphBoundary id0 = GraphBoundary::flat(0.0, 2);
  Point r;
  r.y1 = 0.3;
  r.yp[0] = 1.0;
  CHECK(flatten(r, id0).y1 == doctest::Approx(0.3));

  Rng rng(13);
  for (int t = 0; t < 100; ++t) {
    Point z;
    z.y1 = rng.next_double() * 2 - 1;
    z.yp[0] = rng.next_double() * 2 * M_PI;
    z.yp[1] = rng.next_double() * 2 * M_PI;
    Point back = unflatten(flatten(z, f), f);
    CHECK(std::abs(back.y1 - z.y1) <= 1e-14);
  }
}

TEST_CASE("boundary normal coordinates") {
  TransversalManifold m0;
  GraphBoundary flat = GraphBoundary::flat(0.0, 2);
  Point z;
  z.y1 = 0.2;
  z.yp[0] = 1.0;
  auto nc = boundary_normal_coords(z, flat, m0, 0.5);
  CHECK(nc.s == doctest::Approx(0.2));
  CHECK(nc.zp[0] == doctest::Approx(1.0));

  GraphBoundary f = GraphBoundary::cosine(0.1, 0.0, 0, 2);
  Point on;
  on.yp[0] = 0.7;
  on.yp[1] = 0.3;
  on.y1 = f.f(on.yp);
  auto nc2 = boundary_normal_coords(on, f, m0, 0.5);
  CHECK(std::abs(nc2.s) < 1e-10);

  // shoot along the normal and recover t
  double nu1;
  std::array<double, 2> nup;
  f.normal(on.yp, nu1, nup);
  Point shot;
  double t = 0.05;
  shot.y1 = on.y1 + t * nu1;
  shot.yp[0] = on.yp[0] + t * nup[0];
  shot.yp[1] = on.yp[1] + t * nup[1];
  auto nc3 = boundary_normal_coords(shot, f, m0, 0.5);
  CHECK(nc3.s == doctest::Approx(0.05).epsilon(1e-8));

  CHECK_THROWS_AS(
      boundary_normal_coords(Point{2.0, {{0.0, 0.0}}}, f, m0, 0.5),
      CollarExceeded);
}

TEST_CASE("signed graph distance") {
  GraphBoundary flat = GraphBoundary::flat(0.0, 2);
  CHECK(signed_graph_distance(Point{-0.1, {{0.3, 0.0}}}, flat) ==
        doctest::Approx(-0.1));
  GraphBoundary f = GraphBoundary::cosine(0.1, 0.0, 0, 2);
  Point on;
  on.yp[0] = 2.0;
  on.y1 = f.f(on.yp);
  CHECK(std::abs(signed_graph_distance(on, f)) < 1e-14);
  // sign agreement on a scan
  Rng rng(4);
  for (int t = 0; t < 1000; ++t) {
    Point z;
    z.y1 = rng.next_double() * 2 - 1;
    z.yp[0] = rng.next_double() * 2 * M_PI;
    z.yp[1] = rng.next_double() * 2 * M_PI;
    double d = signed_graph_distance(z, f);
    double x1 = z.y1 - f.f(z.yp);
    if (x1 > 1e-12) CHECK(d > 0);
    if (x1 < -1e-12) CHECK(d < 0);
  }
}

TEST_CASE("shear is unitary and exact on bandlimited fields") {
  auto g = small_torus_grid();
  GraphBoundary f = GraphBoundary::cosine(0.1, 0.0, 0, 2);
  Shear shear(*g, f);

  // bandlimited field: exact translation
  ComplexField u(*g);
  std::size_t i = 0;
  double xi1 = g->freq(0, 2);
  for (int j0 = 0; j0 < g->dim(0); ++j0)
    for (int j1 = 0; j1 < g->dim(1); ++j1)
      for (int j2 = 0; j2 < g->dim(2); ++j2) {
        double ph = xi1 * g->coord(0, j0) + std::sin(g->coord(2, j2));
        u[i++] = cplx(std::cos(ph), std::sin(ph));
      }
  ComplexField flat_u = shear.to_flat(u);
  i = 0;
  double err = 0;
  for (int j0 = 0; j0 < g->dim(0); ++j0)
    for (int j1 = 0; j1 < g->dim(1); ++j1)
      for (int j2 = 0; j2 < g->dim(2); ++j2) {
        TransPoint q{{g->coord(1, j1), g->coord(2, j2)}};
        double y1 = g->coord(0, j0) + f.f(q);
        double ph = xi1 * y1 + std::sin(q[1]);
        err = std::max(err, std::abs(flat_u[i++] - cplx(std::cos(ph), std::sin(ph))));
      }
  CHECK(err < 1e-11);

  Rng rng(6);
  ComplexField w = white_noise(*g, rng);
  ComplexField back = shear.to_phys(shear.to_flat(w));
  err = 0;
  for (std::size_t k = 0; k < w.size(); ++k)
    err = std::max(err, std::abs(back[k] - w[k]));
  CHECK(err < 1e-11 * max_abs(w));
}

TEST_CASE("domain membership and mask agree") {
  CtaGeometry geom = CtaGeometry::torus_default();
  GraphBoundary f = GraphBoundary::cosine(0.1, 0.0, 0, 2);
  DomainSpec dom(geom, f, 0.8, {-0.15, 0.85}, TransPoint{{M_PI, M_PI}}, 0.9,
                 0.3);
  auto g = small_torus_grid();
  auto mask = dom.grid_mask(*g);
  std::size_t i = 0, count = 0;
  for (int j0 = 0; j0 < g->dim(0); ++j0)
    for (int j1 = 0; j1 < g->dim(1); ++j1)
      for (int j2 = 0; j2 < g->dim(2); ++j2) {
        Point p{g->coord(0, j0), {{g->coord(1, j1), g->coord(2, j2)}}};
        CHECK((mask[i] != 0) == dom.inside(p));
        count += mask[i++];
      }
  CHECK(count > 0);
}

TEST_CASE("weyl quantization basics") {
  auto g = small_torus_grid();
  double h = 0.25;

  SUBCASE("constant symbol is identity") {
    LinearMap op = weyl_quantize(constant_symbol(1.0, 2), h, *g);
    Rng rng(8);
    ComplexField u = white_noise(*g, rng);
    ComplexField v = op.apply(u);
    double err = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
      err = std::max(err, std::abs(v[i] - u[i]));
    CHECK(err < 1e-12 * max_abs(u));
  }

  SUBCASE("flat symbol xi'_1 acts diagonally on a mode") {
    Symbol s = multiplier_symbol(
        [](double, const std::array<double, 2>& xip) { return xip[0]; },
        Symbol::Arity::transversal, 2, "xi1p");
    s.order_trans = 1;
    LinearMap op = weyl_quantize(s, h, *g);
    ComplexField mode(*g);
    std::size_t i = 0;
    for (int j0 = 0; j0 < g->dim(0); ++j0)
      for (int j1 = 0; j1 < g->dim(1); ++j1)
        for (int j2 = 0; j2 < g->dim(2); ++j2) {
          double ph = 3.0 * g->coord(1, j1);
          mode[i++] = cplx(std::cos(ph), std::sin(ph));
        }
    ComplexField v = op.apply(mode);
    double err = 0;
    for (std::size_t k = 0; k < v.size(); ++k)
      err = std::max(err, std::abs(v[k] - h * 3.0 * mode[k]));
    CHECK(err < 1e-11);
  }

  SUBCASE("multiplication symbol acts pointwise (dense kernel path)") {
    Symbol V = x_symbol(
        [](const TransPoint& x) { return cplx(std::sin(x[0]), 0.0); }, 2, {0},
        "V");
    LinearMap op = weyl_quantize(V, h, *g);
    Rng rng(9);
    ComplexField u = white_noise(*g, rng);
    ComplexField v = op.apply(u);
    std::size_t i = 0;
    double err = 0;
    for (int j0 = 0; j0 < g->dim(0); ++j0)
      for (int j1 = 0; j1 < g->dim(1); ++j1)
        for (int j2 = 0; j2 < g->dim(2); ++j2) {
          err = std::max(err,
                         std::abs(v[i] - std::sin(g->coord(1, j1)) * u[i]));
          ++i;
        }
    CHECK(err < 1e-11 * max_abs(u));
  }

  SUBCASE("multiplication symbol, both axes (dense 2d path)") {
    Symbol V = x_symbol(
        [](const TransPoint& x) {
          return cplx(std::sin(x[0]) * std::cos(x[1]), 0.0);
        },
        2, {0, 1}, "V2");
    LinearMap op = weyl_quantize(V, h, *g);
    Rng rng(10);
    ComplexField u = white_noise(*g, rng);
    ComplexField v = op.apply(u);
    std::size_t i = 0;
    double err = 0;
    for (int j0 = 0; j0 < g->dim(0); ++j0)
      for (int j1 = 0; j1 < g->dim(1); ++j1)
        for (int j2 = 0; j2 < g->dim(2); ++j2) {
          double V0 = std::sin(g->coord(1, j1)) * std::cos(g->coord(2, j2));
          err = std::max(err, std::abs(v[i] - V0 * u[i]));
          ++i;
        }
    CHECK(err < 1e-11 * max_abs(u));
  }

  SUBCASE("real symbols give symmetric operators") {
    Symbol s;
    s.tdim = 2;
    s.label = "real";
    s.depends_axes = {0};
    s.order_trans = 1;
    s.eval = [](const TransPoint& x, const std::array<double, 3>& xi) {
      return cplx((1.0 + 0.4 * std::cos(x[0])) *
                      std::sqrt(1.0 + xi[1] * xi[1] + xi[2] * xi[2]),
                  0.0);
    };
    LinearMap op = weyl_quantize(s, h, *g);
    Rng rng(12);
    ComplexField u = white_noise(*g, rng);
    ComplexField v = white_noise(*g, rng);
    cplx a = dot(v, op.apply(u));
    cplx b = dot(op.apply(v), u);
    CHECK(std::abs(a - b) < 1e-10 * std::abs(a));
    // adjoint consistency
    cplx c = dot(op.apply_adjoint(v), u);
    CHECK(std::abs(a - c) < 1e-10 * std::abs(a));
  }

  SUBCASE("linearity in the symbol") {
    Symbol s1 = x_symbol(
        [](const TransPoint& x) { return cplx(std::cos(x[0]), 0.1); }, 2, {0},
        "s1");
    Symbol s2 = multiplier_symbol(
        [](double, const std::array<double, 2>& xip) {
          return cplx(xip[0] * xip[1], 0.0);
        },
        Symbol::Arity::transversal, 2, "s2");
    s2.order_trans = 2;
    Symbol sum;
    sum.tdim = 2;
    sum.depends_axes = {0};
    sum.order_trans = 2;
    sum.label = "s1+s2";
    auto e1 = s1.eval, e2 = s2.eval;
    sum.eval = [e1, e2](const TransPoint& x, const std::array<double, 3>& xi) {
      return e1(x, xi) + e2(x, xi);
    };
    Rng rng(14);
    ComplexField u = smooth_random(*g, rng, 0.3);
    ComplexField lhs = weyl_quantize(sum, h, *g).apply(u);
    ComplexField rhs =
        weyl_quantize(s1, h, *g).apply(u) + weyl_quantize(s2, h, *g).apply(u);
    double err = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
      err = std::max(err, std::abs(lhs[i] - rhs[i]));
    CHECK(err < 1e-10 * max_abs(rhs));
  }
}

TEST_CASE("compose check: commuting multipliers hit the floor") {
  auto g = smoke_grid();
  Symbol a = multiplier_symbol(
      [](double, const std::array<double, 2>& xip) {
        return cplx(1.0 / (1.0 + xip[0] * xip[0]), 0.0);
      },
      Symbol::Arity::transversal, 1, "a");
  Symbol b = multiplier_symbol(
      [](double, const std::array<double, 2>& xip) {
        return cplx(xip[0] / std::sqrt(1.0 + xip[0] * xip[0]), 0.0);
      },
      Symbol::Arity::transversal, 1, "b");
  auto res = compose_check(a, b, {0.3, 0.2, 0.14, 0.1}, *g, 21);
  CHECK(res.at_floor);
  CHECK(res.slope >= 1.7);
}

TEST_CASE("opnorm identity and diagonal") {
  auto g = smoke_grid();
  NormEstimate e = estimate_opnorm(identity_map(), *g, 2.0, 2.0, 4, 17);
  CHECK(e.lower_bound == doctest::Approx(1.0).epsilon(1e-10));

  // diagonal multiplier with max modulus 3
  LinearMap diag = multiplier_map(
      *g,
      [&](const std::vector<int>& k) {
        return cplx(g->signed_index(1, k[1]) == 2 ? 3.0 : 0.5, 0.0);
      },
      "diag");
  NormEstimate e2 = estimate_opnorm(diag, *g, 2.0, 2.0, 4, 17);
  CHECK(e2.lower_bound == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(e2.lower_bound <= 3.0 + 1e-9);

  // monotone in trials
  NormEstimate few = estimate_opnorm(diag, *g, 2.0, 2.0, 2, 17);
  CHECK(e2.lower_bound >= few.lower_bound - 1e-13);
}

TEST_CASE("cv check on trivial symbol") {
  auto g = smoke_grid();
  auto res = cv_check(constant_symbol(1.0, 1), 2.0, 0.2, *g, 3, 33, 1.0);
  CHECK(res.measured_norm == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(res.bound >= 1.0);
  CHECK(res.measured_norm <= res.bound + 1e-9);
}
