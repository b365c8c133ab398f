#include "calderon/geometry.hpp"

#include <cmath>

namespace calderon {

double TransversalManifold::lambda(const std::vector<int>& m) const {
  double s = 0;
  for (int a = 0; a < dim; ++a) {
    double xi = dual_freq(a, m[a]);
    s += xi * xi;
  }
  return s;
}

double TransversalManifold::wrap(int axis, double t) const {
  double L = circumferences[axis];
  t = std::fmod(t, L);
  if (t > 0.5 * L) t -= L;
  if (t < -0.5 * L) t += L;
  return t;
}

double TransversalManifold::distance(const TransPoint& a,
                                     const TransPoint& b) const {
  double s = 0;
  for (int ax = 0; ax < dim; ++ax) {
    double d = wrap(ax, a[ax] - b[ax]);
    s += d * d;
  }
  return std::sqrt(s);
}

CtaGeometry CtaGeometry::torus_default() {
  CtaGeometry g;
  g.transversal = TransversalManifold();
  g.n = 3;
  g.p = 2.0 * g.n / (g.n - 2.0);
  g.p_prime = 2.0 * g.n / (g.n + 2.0);
  return g;
}

CtaGeometry CtaGeometry::circle_smoke() {
  CtaGeometry g;
  g.transversal.dim = 1;
  g.transversal.circumferences = {2.0 * M_PI};
  g.transversal.smoke_mode = true;
  g.n = 2;
  // p = 2n/(n-2) is undefined at n = 2; the smoke suite runs L^2 checks only
  g.p = 0.0;
  g.p_prime = 0.0;
  return g;
}

void GraphBoundary::normal(const TransPoint& q, double& nu1,
                           std::array<double, 2>& nup) const {
  auto g = df(q);
  double s = 1.0;
  for (int a = 0; a < tdim; ++a) s += g[a] * g[a];
  double inv = 1.0 / std::sqrt(s);
  nu1 = inv;
  nup = {-g[0] * inv, tdim > 1 ? -g[1] * inv : 0.0};
  if (sign < 0) {
    nu1 = -nu1;
    nup[0] = -nup[0];
    nup[1] = -nup[1];
  }
}

GraphBoundary GraphBoundary::flat(double level, int tdim, int sign) {
  GraphBoundary g;
  g.tdim = tdim;
  g.sign = sign;
  g.f = [level](const TransPoint&) { return level; };
  g.df = [](const TransPoint&) { return std::array<double, 2>{0.0, 0.0}; };
  g.hess = [](const TransPoint&) {
    return std::array<double, 4>{0.0, 0.0, 0.0, 0.0};
  };
  g.df_sup_sq = 0.0;
  return g;
}

GraphBoundary GraphBoundary::cosine(double amplitude, double level, int axis,
                                    int tdim, int sign) {
  GraphBoundary g;
  g.tdim = tdim;
  g.sign = sign;
  g.f = [=](const TransPoint& q) {
    return level + amplitude * std::cos(q[axis]);
  };
  g.df = [=](const TransPoint& q) {
    std::array<double, 2> d{0.0, 0.0};
    d[axis] = -amplitude * std::sin(q[axis]);
    return d;
  };
  g.hess = [=](const TransPoint& q) {
    std::array<double, 4> H{0.0, 0.0, 0.0, 0.0};
    H[axis * 3] = -amplitude * std::cos(q[axis]);
    return H;
  };
  g.df_sup_sq = amplitude * amplitude;
  g.depends_axes = {axis};
  return g;
}

void validate_graph_constants(const GraphBoundary& g, double c,
                              double c_prime) {
  double base = g.df_sup_sq / (1.0 + g.df_sup_sq);
  if (!(base < c && c < c_prime && c_prime < 1.0))
    throw InvalidConstants("need |df|^2/(1+|df|^2) < c < c' < 1, got base=" +
                           std::to_string(base) + " c=" + std::to_string(c) +
                           " c'=" + std::to_string(c_prime));
}

DomainSpec::DomainSpec(const CtaGeometry& geom, GraphBoundary bottom,
                       double y1_top, std::array<double, 2> interval,
                       TransPoint omega0_center, double omega0_radius,
                       double collar_width)
    : geom_(&geom),
      bottom_(std::move(bottom)),
      top_(GraphBoundary::flat(y1_top, geom.transversal.dim, -1)),
      y1_top_(y1_top),
      interval_(interval),
      center_(omega0_center),
      radius_(omega0_radius),
      collar_(collar_width) {
  if (!(interval_[0] < interval_[1]))
    throw ConfigError("domain interval is empty");
}

Membership DomainSpec::membership(const Point& p, double tol) const {
  double below = p.y1 - bottom_.f(p.yp);          // >0 above the graph
  double above = y1_top_ - p.y1;                  // >0 below the lid
  double rad = radius_ - geom_->transversal.distance(p.yp, center_);
  double m = std::min({below, above, rad});
  if (m > tol) return Membership::inside;
  if (m < -tol) return Membership::outside;
  return Membership::boundary;
}

bool DomainSpec::inside(const Point& p) const {
  return membership(p, 0.0) == Membership::inside;
}

std::vector<std::uint8_t> DomainSpec::grid_mask(const Grid& g) const {
  std::vector<std::uint8_t> mask(g.size(), 0);
  int tdim = geom_->transversal.dim;
  std::size_t i = 0;
  for (int j0 = 0; j0 < g.dim(0); ++j0) {
    Point p;
    p.y1 = g.coord(0, j0);
    for (int j1 = 0; j1 < g.dim(1); ++j1) {
      p.yp[0] = g.coord(1, j1);
      if (tdim == 1) {
        mask[i++] = inside(p) ? 1 : 0;
      } else {
        for (int j2 = 0; j2 < g.dim(2); ++j2) {
          p.yp[1] = g.coord(2, j2);
          mask[i++] = inside(p) ? 1 : 0;
        }
      }
    }
  }
  return mask;
}

std::vector<std::uint8_t> DomainSpec::flattened_mask(const Grid& g) const {
  std::vector<std::uint8_t> mask(g.size(), 0);
  int tdim = geom_->transversal.dim;
  std::size_t i = 0;
  for (int j0 = 0; j0 < g.dim(0); ++j0) {
    double x1 = g.coord(0, j0);
    for (int j1 = 0; j1 < g.dim(1); ++j1) {
      TransPoint q;
      q[0] = g.coord(1, j1);
      if (tdim == 1) {
        bool in = x1 > 0 && x1 < y1_top_ - bottom_.f(q) &&
                  geom_->transversal.distance(q, center_) < radius_;
        mask[i++] = in ? 1 : 0;
      } else {
        for (int j2 = 0; j2 < g.dim(2); ++j2) {
          q[1] = g.coord(2, j2);
          bool in = x1 > 0 && x1 < y1_top_ - bottom_.f(q) &&
                    geom_->transversal.distance(q, center_) < radius_;
          mask[i++] = in ? 1 : 0;
        }
      }
    }
  }
  return mask;
}

namespace {
ComplexField smooth_weight(const Grid& g, int tdim,
                           const std::function<double(double, const TransPoint&)>& depth,
                           double edge) {
  ComplexField w(g);
  std::size_t i = 0;
  for (int j0 = 0; j0 < g.dim(0); ++j0) {
    double x1 = g.coord(0, j0);
    for (int j1 = 0; j1 < g.dim(1); ++j1) {
      TransPoint q;
      q[0] = g.coord(1, j1);
      if (tdim == 1) {
        w[i++] = smooth_step(depth(x1, q) / edge);
      } else {
        for (int j2 = 0; j2 < g.dim(2); ++j2) {
          q[1] = g.coord(2, j2);
          w[i++] = smooth_step(depth(x1, q) / edge);
        }
      }
    }
  }
  return w;
}
}  // namespace

ComplexField DomainSpec::flattened_interior_weight(const Grid& g,
                                                   double edge) const {
  auto depth = [this](double x1, const TransPoint& q) {
    double top = y1_top_ - bottom_.f(q);
    double rad = radius_ - geom_->transversal.distance(q, center_);
    return std::min({x1, top - x1, rad});
  };
  return smooth_weight(g, geom_->transversal.dim, depth, edge);
}

ComplexField DomainSpec::interior_weight(const Grid& g, double edge) const {
  auto depth = [this](double y1, const TransPoint& q) {
    double below = y1 - bottom_.f(q);
    double above = y1_top_ - y1;
    double rad = radius_ - geom_->transversal.distance(q, center_);
    return std::min({below, above, rad});
  };
  return smooth_weight(g, geom_->transversal.dim, depth, edge);
}

Point flatten(const Point& p, const GraphBoundary& f) {
  Point q = p;
  q.y1 = p.y1 - f.f(p.yp);
  return q;
}

Point unflatten(const Point& p, const GraphBoundary& f) {
  Point q = p;
  q.y1 = p.y1 + f.f(p.yp);
  return q;
}

Shear::Shear(const Grid& g, const GraphBoundary& f) : grid_(&g) {
  std::size_t cols = g.size() / g.dim(0);
  shift_.resize(cols);
  int tdim = f.tdim;
  std::size_t i = 0;
  for (int j1 = 0; j1 < g.dim(1); ++j1) {
    TransPoint q;
    q[0] = g.coord(1, j1);
    if (tdim == 1) {
      shift_[i++] = f.f(q);
    } else {
      for (int j2 = 0; j2 < g.dim(2); ++j2) {
        q[1] = g.coord(2, j2);
        shift_[i++] = f.f(q);
      }
    }
  }
}

ComplexField Shear::apply(const ComplexField& u, double direction) const {
  const Grid& g = *grid_;
  ComplexField hat(g);
  g.fft_axis(0, u.v.data(), hat.v.data());
  int n1 = g.dim(0);
  std::size_t cols = g.size() / n1;
  for (int k = 0; k < n1; ++k) {
    double xi = g.freq(0, k);
    for (std::size_t c = 0; c < cols; ++c) {
      double phase = -direction * xi * shift_[c];
      hat[k * cols + c] *= cplx(std::cos(phase), std::sin(phase));
    }
  }
  ComplexField out(g);
  g.ifft_axis(0, hat.v.data(), out.v.data());
  return out;
}

// to_phys: w(y1,y') = u(y1 - f(y'), y') i.e. translate by +f
ComplexField Shear::to_phys(const ComplexField& u) const {
  return apply(u, +1.0);
}

// to_flat: u(x1,x') = w(x1 + f(x'), x') i.e. translate by -f
ComplexField Shear::to_flat(const ComplexField& u) const {
  return apply(u, -1.0);
}

NormalCoords boundary_normal_coords(const Point& z, const GraphBoundary& f,
                                    const TransversalManifold& m,
                                    double collar_width) {
  int tdim = f.tdim;
  TransPoint zp = z.yp;  // initial guess: vertical projection
  double s = 0;
  for (int iter = 0; iter < 50; ++iter) {
    double fz = f.f(zp);
    auto g = f.df(zp);
    auto H = f.hess(zp);
    double d1 = z.y1 - fz;
    std::array<double, 2> dp{};
    for (int a = 0; a < tdim; ++a) dp[a] = m.wrap(a, z.yp[a] - zp[a]);
    // tangential residual r_k = T_k . (z - sigma(zp)), T_k = (f_k, e_k)
    std::array<double, 2> r{};
    for (int k = 0; k < tdim; ++k) r[k] = g[k] * d1 + dp[k];
    double rn = std::hypot(r[0], r[1]);
    if (rn < 1e-13) break;
    // J_kj = H_kj * d1 - (delta_kj + f_k f_j)
    double J[2][2] = {{0, 0}, {0, 0}};
    for (int k = 0; k < tdim; ++k)
      for (int j = 0; j < tdim; ++j)
        J[k][j] = H[k * 2 + j] * d1 - ((k == j ? 1.0 : 0.0) + g[k] * g[j]);
    std::array<double, 2> step{};
    if (tdim == 1) {
      step[0] = r[0] / J[0][0];
    } else {
      double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
      if (std::abs(det) < 1e-14) throw OutsideChart("degenerate projection");
      step[0] = (J[1][1] * r[0] - J[0][1] * r[1]) / det;
      step[1] = (J[0][0] * r[1] - J[1][0] * r[0]) / det;
    }
    for (int a = 0; a < tdim; ++a) zp[a] -= step[a];
  }
  double nu1;
  std::array<double, 2> nup;
  f.normal(zp, nu1, nup);
  double d1 = z.y1 - f.f(zp);
  s = nu1 * d1;
  for (int a = 0; a < tdim; ++a) s += nup[a] * m.wrap(a, z.yp[a] - zp[a]);
  NormalCoords nc;
  nc.s = s;
  nc.zp = zp;
  if (std::abs(s) > collar_width)
    throw CollarExceeded("s=" + std::to_string(s) +
                         " collar=" + std::to_string(collar_width));
  return nc;
}

double signed_graph_distance(const Point& z, const GraphBoundary& f) {
  double x1 = z.y1 - f.f(z.yp);
  auto g = f.df(z.yp);
  double s = 1.0;
  for (int a = 0; a < f.tdim; ++a) s += g[a] * g[a];
  return x1 / std::sqrt(s);
}

}  // namespace calderon
