#include "calderon/freegreens.hpp"

#include <cmath>

namespace calderon {

CutoffPair make_cutoff_pair(const Grid& g, double lo, double hi, double pad,
                            double ramp) {
  CutoffPair cut;
  cut.chi = BumpProfile{lo - pad, hi + pad, ramp, ramp};
  cut.chi_tilde =
      BumpProfile{cut.chi.support_lo(), cut.chi.support_hi(), ramp, ramp};
  double clearance = 2.0 * g.spacing(0);
  if (cut.chi_tilde.support_lo() < g.y1_min() + clearance ||
      cut.chi_tilde.support_hi() > g.y1_max() - clearance)
    throw ConfigError("cutoff pair does not fit inside the periodic cell");
  return cut;
}

FreeGreens::FreeGreens(const Grid& g, int sign, double h)
    : grid_(&g), sign_(sign), h_(h) {
  min_denom_ = 1e300;
  std::vector<int> k(g.rank(), 0);
  auto scan = [&](auto&& self, int axis) -> void {
    if (axis == g.rank()) {
      min_denom_ = std::min(min_denom_, std::abs(denominator(k)));
      return;
    }
    for (k[axis] = 0; k[axis] < g.dim(axis); ++k[axis]) self(self, axis + 1);
  };
  scan(scan, 0);
  if (min_denom_ < 1e-6)
    throw ResonantDenominator(
        "grid frequency hits the symbol zero set (min |denom| = " +
        std::to_string(min_denom_) + "); perturb h");
}

cplx FreeGreens::denominator(const std::vector<int>& k) const {
  const Grid& g = *grid_;
  double xi1 = g.freq(0, k[0]);
  double lambda = 0.0;
  for (int a = 1; a < g.rank(); ++a) {
    double xi = g.freq(a, k[a]);
    lambda += xi * xi;
  }
  return cplx(h_ * h_ * xi1 * xi1 - 1.0 + h_ * h_ * lambda,
              -sign_ * 2.0 * h_ * xi1);
}

ComplexField FreeGreens::apply(const ComplexField& f, double safe_lo,
                               double safe_hi, double threshold) const {
  double leak = margin_mass_fraction(f, safe_lo, safe_hi);
  if (leak > threshold)
    throw MarginViolation("input mass fraction near the cell seam " +
                          std::to_string(leak));
  return as_map().apply(f);
}

LinearMap FreeGreens::as_map() const {
  const Grid& g = *grid_;
  int sign = sign_;
  double h = h_;
  return multiplier_map(
      g,
      [&g, sign, h](const std::vector<int>& k) {
        double xi1 = g.freq(0, k[0]);
        double lambda = 0.0;
        for (int a = 1; a < g.rank(); ++a) {
          double xi = g.freq(a, k[a]);
          lambda += xi * xi;
        }
        return 1.0 / cplx(h * h * xi1 * xi1 - 1.0 + h * h * lambda,
                          -sign * 2.0 * h * xi1);
      },
      sign > 0 ? "G^M+" : "G^M-");
}

LinearMap FreeGreens::conjugated_laplacian_map() const {
  return conj_laplacian_map(*grid_, sign_, h_);
}

ComplexField apply_free_greens(const ComplexField& f, int sign, double h,
                               double safe_lo, double safe_hi) {
  FreeGreens G(*f.grid, sign, h);
  return G.apply(f, safe_lo, safe_hi);
}

ComplexField apply_cut_greens(const ComplexField& f, const CutoffPair& cut,
                              int sign, double h) {
  return cut_greens_map(*f.grid, cut, sign, h).apply(f);
}

LinearMap cut_greens_map(const Grid& g, const CutoffPair& cut, int sign,
                         double h) {
  FreeGreens G(g, sign, h);
  LinearMap chi = profile1_map(g, [c = cut.chi](double t) { return c(t); },
                               "chi");
  LinearMap chit = profile1_map(
      g, [c = cut.chi_tilde](double t) { return c(t); }, "chi~");
  LinearMap m = compose(chit, compose(G.as_map(), chi));
  m.label = sign > 0 ? "G^I+" : "G^I-";
  return m;
}

LinearMap conj_laplacian_map(const Grid& g, int sign, double h) {
  return multiplier_map(
      g,
      [&g, sign, h](const std::vector<int>& k) {
        double xi1 = g.freq(0, k[0]);
        double lambda = 0.0;
        for (int a = 1; a < g.rank(); ++a) {
          double xi = g.freq(a, k[a]);
          lambda += xi * xi;
        }
        return cplx(h * h * xi1 * xi1 - 1.0 + h * h * lambda,
                    -sign * 2.0 * h * xi1);
      },
      sign > 0 ? "h2Delta+" : "h2Delta-");
}

ComplexField conjugated_laplacian(const ComplexField& u, int sign, double h,
                                  const GraphBoundary* f_graph) {
  const Grid& g = *u.grid;
  if (!f_graph) return conj_laplacian_map(g, sign, h).apply(u);
  return flat_conj_laplacian_map(g, *f_graph, sign, h).apply(u);
}

LinearMap flat_conj_laplacian_map(const Grid& g, const GraphBoundary& f,
                                  int sign, double h) {
  auto shear = std::make_shared<Shear>(g, f);
  LinearMap core = conj_laplacian_map(g, sign, h);
  LinearMap m;
  m.label = "h2Delta~";
  m.apply = [shear, core](const ComplexField& u) {
    return shear->to_flat(core.apply(shear->to_phys(u)));
  };
  m.apply_adjoint = [shear, core](const ComplexField& u) {
    // shear maps are unitary: adjoint of to_phys is to_flat
    return shear->to_flat(core.apply_adjoint(shear->to_phys(u)));
  };
  return m;
}

ComplexField flat_conj_laplacian_coeffs(const ComplexField& u,
                                        const GraphBoundary& f, int sign,
                                        double h) {
  const Grid& g = *u.grid;
  int tdim = g.rank() - 1;

  auto d_axis = [&](const ComplexField& w, int axis) {
    return spectral_multiplier(w, [&g, axis](const std::vector<int>& k) {
      return cplx(0.0, g.freq(axis, k[axis]));
    });
  };

  ComplexField d1 = d_axis(u, 0);
  ComplexField d11 = d_axis(d1, 0);

  // -(h d1 + s)^2 u = -(h^2 u'' + 2 s h u' + u)
  ComplexField out(g);
  double s = sign;
  for (std::size_t i = 0; i < u.size(); ++i)
    out[i] = -(h * h * d11[i] + 2.0 * s * h * d1[i] + u[i]);

  // - h^2 Delta'_flat u
  ComplexField lap_t = spectral_multiplier(u, [&g](const std::vector<int>& k) {
    double l = 0;
    for (int a = 1; a < g.rank(); ++a) {
      double xi = g.freq(a, k[a]);
      l += xi * xi;
    }
    return cplx(-l, 0.0);
  });
  for (std::size_t i = 0; i < u.size(); ++i) out[i] -= h * h * lap_t[i];

  // coefficient fields over the transversal slice
  std::size_t cols = g.size() / g.dim(0);
  std::vector<double> lapf(cols), dfsq(cols);
  std::vector<std::array<double, 2>> grad(cols);
  {
    std::size_t c = 0;
    for (int j1 = 0; j1 < g.dim(1); ++j1) {
      TransPoint q;
      q[0] = g.coord(1, j1);
      if (tdim == 1) {
        lapf[c] = f.lap_f(q);
        auto d = f.df(q);
        grad[c] = d;
        dfsq[c] = d[0] * d[0];
        ++c;
      } else {
        for (int j2 = 0; j2 < g.dim(2); ++j2) {
          q[1] = g.coord(2, j2);
          lapf[c] = f.lap_f(q);
          auto d = f.df(q);
          grad[c] = d;
          dfsq[c] = d[0] * d[0] + d[1] * d[1];
          ++c;
        }
      }
    }
  }

  // + h^2 (Delta' f) d1 u + 2 h^2 sum_j f_j d_j d1 u - h^2 |df|^2 d1 d1 u
  std::vector<ComplexField> dj1(tdim);
  for (int a = 0; a < tdim; ++a) dj1[a] = d_axis(d1, 1 + a);
  int n1 = g.dim(0);
  for (int j0 = 0; j0 < n1; ++j0) {
    for (std::size_t c = 0; c < cols; ++c) {
      std::size_t i = j0 * cols + c;
      cplx t = lapf[c] * d1[i] - dfsq[c] * d11[i];
      for (int a = 0; a < tdim; ++a) t += 2.0 * grad[c][a] * dj1[a][i];
      out[i] += h * h * t;
    }
  }
  return out;
}

}  // namespace calderon
