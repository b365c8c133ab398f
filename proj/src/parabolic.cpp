#include "calderon/parabolic.hpp"

#include <cmath>
#include <memory>

namespace calderon {

namespace {

enum class RunMode { inv, inv_adjoint, fwd, fwd_adjoint };

struct FlowOps {
  const Grid* g = nullptr;
  bool scalar_path = true;
  std::vector<CausalWeights> col_w;  // per transversal mode (scalar path)
  int d_grid = 1, e_grid = -1;
  std::vector<BlockCausalWeights> blocks;  // per e-mode (block path)

  ComplexField run(const ComplexField& u, RunMode mode) const;
};

ComplexField FlowOps::run(const ComplexField& u, RunMode mode) const {
  const Grid& grid = *g;
  int n1 = grid.dim(0);
  std::size_t cols = grid.size() / n1;
  if (scalar_path) {
    ComplexField hat(grid);
    grid.fft_axis(1, u.v.data(), hat.v.data());
    if (grid.rank() == 3) grid.fft_axis(2, hat.v.data(), hat.v.data());
    parallel_for(cols, [&](std::size_t c) {
      cplx* p = hat.v.data() + c;
      switch (mode) {
        case RunMode::inv:
          causal_inv(col_w[c], p, p, n1, cols);
          break;
        case RunMode::inv_adjoint:
          causal_inv_adjoint(col_w[c], p, p, n1, cols);
          break;
        case RunMode::fwd:
          causal_fwd(col_w[c], p, p, n1, cols);
          break;
        case RunMode::fwd_adjoint:
          causal_fwd_adjoint(col_w[c], p, p, n1, cols);
          break;
      }
    });
    ComplexField out(grid);
    grid.ifft_axis(1, hat.v.data(), out.v.data());
    if (grid.rank() == 3) grid.ifft_axis(2, out.v.data(), out.v.data());
    return out;
  }

  // block path: dense along d_grid, spectral along e_grid (if present)
  ComplexField work(grid);
  if (e_grid > 0)
    grid.fft_axis(e_grid, u.v.data(), work.v.data());
  else
    work = u;
  int nd = grid.dim(d_grid);
  int ne = e_grid > 0 ? grid.dim(e_grid) : 1;
  std::size_t sd = grid.stride(d_grid);
  std::size_t se = e_grid > 0 ? grid.stride(e_grid) : 0;
  std::size_t s0 = grid.stride(0);
  parallel_for(ne, [&](std::size_t ke) {
    std::vector<Eigen::VectorXcd> cin(n1, Eigen::VectorXcd(nd)), cout;
    for (int j0 = 0; j0 < n1; ++j0)
      for (int jd = 0; jd < nd; ++jd)
        cin[j0][jd] = work[j0 * s0 + jd * sd + ke * se];
    const BlockCausalWeights& w = blocks[ke];
    switch (mode) {
      case RunMode::inv:
        block_causal_inv(w, cin, cout);
        break;
      case RunMode::inv_adjoint:
        block_causal_inv_adjoint(w, cin, cout);
        break;
      case RunMode::fwd:
        block_causal_fwd(w, cin, cout);
        break;
      case RunMode::fwd_adjoint:
        block_causal_fwd_adjoint(w, cin, cout);
        break;
    }
    for (int j0 = 0; j0 < n1; ++j0)
      for (int jd = 0; jd < nd; ++jd)
        work[j0 * s0 + jd * sd + ke * se] = cout[j0][jd];
  });
  if (e_grid > 0) {
    ComplexField out(grid);
    grid.ifft_axis(e_grid, work.v.data(), out.v.data());
    return out;
  }
  return work;
}

std::shared_ptr<FlowOps> build_flow(const ParabolicSpec& spec, const Grid& g) {
  auto ops = std::make_shared<FlowOps>();
  ops->g = &g;
  double dx = g.spacing(0);
  int tdim = g.rank() - 1;
  if (spec.B.depends_axes.empty()) {
    ops->scalar_path = true;
    std::size_t cols = g.size() / g.dim(0);
    ops->col_w.resize(cols);
    TransPoint dummy;
    std::size_t c = 0;
    for (int k1 = 0; k1 < g.dim(1); ++k1) {
      if (tdim == 1) {
        cplx b = spec.B.eval(dummy, {0.0, spec.h * g.freq(1, k1), 0.0});
        ops->col_w[c++] = causal_weights(b, dx, spec.h);
      } else {
        for (int k2 = 0; k2 < g.dim(2); ++k2) {
          cplx b = spec.B.eval(dummy, {0.0, spec.h * g.freq(1, k1),
                                       spec.h * g.freq(2, k2)});
          ops->col_w[c++] = causal_weights(b, dx, spec.h);
        }
      }
    }
    return ops;
  }
  ops->scalar_path = false;
  if (tdim == 1) {
    ops->d_grid = 1;
    ops->e_grid = -1;
    ops->blocks.push_back(
        block_causal_weights(transversal_mode_kernel(spec.B, spec.h, g, 0), dx,
                             spec.h));
    return ops;
  }
  if (spec.B.depends_axes.size() != 1)
    throw Error("flow symbols dense in both transversal axes not supported");
  int d = spec.B.depends_axes[0];
  ops->d_grid = 1 + d;
  ops->e_grid = 1 + (1 - d);
  int ne = g.dim(ops->e_grid);
  ops->blocks.reserve(ne);
  for (int ke = 0; ke < ne; ++ke)
    ops->blocks.push_back(block_causal_weights(
        transversal_mode_kernel(spec.B, spec.h, g, ke), dx, spec.h));
  return ops;
}

}  // namespace

ParabolicSpec make_parabolic_spec(Symbol B, std::optional<Symbol> B0, double h,
                                  const Grid& g) {
  ParabolicSpec spec;
  spec.B = std::move(B);
  spec.B0 = std::move(B0);
  spec.h = h;
  double cmin = 1e300, cmax = 0.0;
  int tdim = g.rank() - 1;
  std::vector<double> xs{0.0, 0.9, 2.1, 3.3, 4.8, 5.9};
  for (int k1 = 0; k1 < g.dim(1); ++k1) {
    for (int k2 = 0; k2 < (tdim == 2 ? g.dim(2) : 1); ++k2) {
      std::array<double, 3> xi{0.0, h * g.freq(1, k1),
                               tdim == 2 ? h * g.freq(2, k2) : 0.0};
      double jap = std::sqrt(1.0 + xi[1] * xi[1] + xi[2] * xi[2]);
      for (double x1 : xs) {
        for (double x2 : (tdim == 2 ? xs : std::vector<double>{0.0})) {
          TransPoint q{{x1, x2}};
          double re = spec.B.eval(q, xi).real() / jap;
          cmin = std::min(cmin, re);
          cmax = std::max(cmax, re);
        }
      }
    }
  }
  if (cmin <= 0.0)
    throw EllipticityViolation("Re B not positive on the sampled band, min " +
                               std::to_string(cmin));
  spec.c_ell = cmin;
  spec.C_ell = cmax;
  return spec;
}

LinearMap jinv_map(const ParabolicSpec& spec, const Grid& g) {
  auto ops = build_flow(spec, g);
  LinearMap m;
  m.label = "j^{-1}";
  m.apply = [ops](const ComplexField& u) { return ops->run(u, RunMode::inv); };
  m.apply_adjoint = [ops](const ComplexField& u) {
    return ops->run(u, RunMode::inv_adjoint);
  };
  return m;
}

LinearMap j_map(const ParabolicSpec& spec, const Grid& g) {
  auto ops = build_flow(spec, g);
  LinearMap m;
  m.label = "j";
  m.apply = [ops](const ComplexField& u) { return ops->run(u, RunMode::fwd); };
  m.apply_adjoint = [ops](const ComplexField& u) {
    return ops->run(u, RunMode::fwd_adjoint);
  };
  return m;
}

ComplexField apply_jinv(const ComplexField& u, const ParabolicSpec& spec) {
  return jinv_map(spec, *u.grid).apply(u);
}

JinvDetail apply_Jinv_detail(const ComplexField& u, const ParabolicSpec& spec,
                             double tol, int cap) {
  const Grid& g = *u.grid;
  LinearMap jinv = jinv_map(spec, g);
  JinvDetail out;
  if (!spec.B0) {
    out.field = jinv.apply(u);
    out.iterations = 0;
    out.residual = 0.0;
    return out;
  }
  LinearMap j = j_map(spec, g);
  LinearMap opb0 = weyl_quantize(*spec.B0, spec.h, g);
  double h = spec.h;
  auto applyJ = [&](const ComplexField& v) {
    ComplexField w = j.apply(v);
    ComplexField c = opb0.apply(v);
    c *= h;
    return w + c;
  };
  double nu = lr_norm(u, 2.0);
  ComplexField v = jinv.apply(u);
  double prev = 1e300;
  int stalls = 0;
  for (int it = 0; it < cap; ++it) {
    ComplexField r = u - applyJ(v);
    double res = nu > 0 ? lr_norm(r, 2.0) / nu : 0.0;
    out.iterations = it + 1;
    out.residual = res;
    if (res <= tol) {
      out.field = std::move(v);
      return out;
    }
    if (res > 0.95 * prev) {
      if (++stalls >= 2)
        throw NoConvergence("J^{-1} Neumann stalled at residual " +
                            std::to_string(res) + " (h=" +
                            std::to_string(spec.h) + ")");
    } else {
      stalls = 0;
    }
    prev = res;
    v += jinv.apply(r);
  }
  throw NoConvergence("J^{-1} Neumann exceeded iteration cap (h=" +
                      std::to_string(spec.h) + ")");
}

ComplexField apply_Jinv(const ComplexField& u, const ParabolicSpec& spec) {
  return apply_Jinv_detail(u, spec).field;
}

LinearMap Jinv_map(const ParabolicSpec& spec, const Grid& g, double tol,
                   int cap) {
  if (!spec.B0) return jinv_map(spec, g);
  auto specp = std::make_shared<ParabolicSpec>(spec);
  LinearMap m;
  m.label = "J^{-1}";
  m.apply = [specp, tol, cap](const ComplexField& u) {
    return apply_Jinv_detail(u, *specp, tol, cap).field;
  };
  // adjoint solves J^H x = y by the mirrored Neumann iteration
  const Grid* gp = &g;
  m.apply_adjoint = [specp, tol, cap, gp](const ComplexField& y) {
    LinearMap jinv = jinv_map(*specp, *gp);
    LinearMap j = j_map(*specp, *gp);
    LinearMap opb0 = weyl_quantize(*specp->B0, specp->h, *gp);
    double h = specp->h;
    auto applyJH = [&](const ComplexField& v) {
      ComplexField w = j.apply_adjoint(v);
      ComplexField c = opb0.apply_adjoint(v);
      c *= h;
      return w + c;
    };
    double ny = lr_norm(y, 2.0);
    ComplexField x = jinv.apply_adjoint(y);
    for (int it = 0; it < cap; ++it) {
      ComplexField r = y - applyJH(x);
      if (ny == 0 || lr_norm(r, 2.0) / ny <= tol) break;
      x += jinv.apply_adjoint(r);
    }
    return x;
  };
  return m;
}

std::pair<double, double> loglog_slope(const std::vector<double>& h_list,
                                       const std::vector<double>& values) {
  int m = static_cast<int>(h_list.size());
  if (m < 2) throw DegenerateSweep("need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    if (!(values[i] > 0)) throw DegenerateSweep("nonpositive sweep value");
    double x = std::log(h_list[i]);
    double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = m * sxx - sx * sx;
  double slope = (m * sxy - sx * sy) / denom;
  double intercept = (sy - slope * sx) / m;
  double ss = 0;
  for (int i = 0; i < m; ++i) {
    double r = std::log(values[i]) - slope * std::log(h_list[i]) - intercept;
    ss += r * r;
  }
  double se = m > 2 ? std::sqrt(ss / (m - 2) / (sxx - sx * sx / m)) : 0.0;
  return {slope, se};
}

namespace {

// W^{1,r} restriction norm on {x1 >= eps}: the x1 derivative uses one-sided
// differences reading only upward, so nothing below eps is touched.
double w1r_restricted(const ComplexField& w, double r, double h,
                      const std::vector<std::uint8_t>& mask) {
  const Grid& g = *w.grid;
  int n1 = g.dim(0);
  std::size_t cols = g.size() / n1;
  double dx = g.spacing(0);
  ComplexField d1(g);
  for (int j = 0; j < n1; ++j) {
    int j1 = (j + 1) % n1, j2 = (j + 2) % n1, j3 = (j + 3) % n1;
    for (std::size_t c = 0; c < cols; ++c) {
      // third-order one-sided stencil
      d1[j * cols + c] =
          (-11.0 / 6.0 * w[j * cols + c] + 3.0 * w[j1 * cols + c] -
           1.5 * w[j2 * cols + c] + w[j3 * cols + c] / 3.0) /
          dx;
    }
  }
  double total = std::pow(lr_norm(w, r, &mask), r);
  ComplexField hd1 = d1;
  hd1 *= h;
  total += std::pow(lr_norm(hd1, r, &mask), r);
  for (int a = 1; a < g.rank(); ++a) {
    ComplexField da = spectral_multiplier(w, [&g, a](const std::vector<int>& k) {
      return cplx(0.0, g.freq(a, k[a]));
    });
    da *= h;
    total += std::pow(lr_norm(da, r, &mask), r);
  }
  return std::pow(total, 1.0 / r);
}

}  // namespace

DecaySweep disjoint_support_decay(
    const std::function<ParabolicSpec(double)>& spec_of_h, double eps,
    const std::vector<double>& h_list, double r, const Grid& g,
    std::uint64_t seed, int probes) {
  if (eps <= 4.0 * g.spacing(0))
    throw ConfigError("epsilon must exceed four grid spacings");
  std::vector<std::uint8_t> mask_eps(g.size(), 0);
  std::size_t cols = g.size() / g.dim(0);
  // the one-sided stencil needs three nodes above the top of the mask; keep
  // the masked region away from the cell seam
  double hi = g.y1_max() - 4.0 * g.spacing(0);
  for (int j = 0; j < g.dim(0); ++j)
    if (g.coord(0, j) >= eps && g.coord(0, j) <= hi)
      std::fill_n(mask_eps.begin() + j * cols, cols, std::uint8_t{1});

  LinearMap mminus = [&] {
    std::vector<std::uint8_t> mask(g.size(), 0);
    for (int j = 0; j < g.dim(0); ++j)
      if (g.coord(0, j) < 0)
        std::fill_n(mask.begin() + j * cols, cols, std::uint8_t{1});
    return mask_map(std::move(mask), "1_{M-}");
  }();

  DecaySweep sweep;
  sweep.h_list = h_list;
  for (double h : h_list) {
    ParabolicSpec spec = spec_of_h(h);
    double worst = 0.0;
    for (int k = 0; k < probes; ++k) {
      Rng rng = Rng::substream(seed, k);
      ComplexField f = smooth_random(g, rng, 0.25);
      ComplexField w = apply_Jinv(mminus.apply(f), spec);
      double num = w1r_restricted(w, r, h, mask_eps);
      double den = lr_norm(f, r);
      worst = std::max(worst, num / den);
    }
    sweep.values.push_back(worst);
  }
  auto [slope, halfwidth] = loglog_slope(sweep.h_list, sweep.values);
  sweep.slope = slope;
  sweep.halfwidth = halfwidth;
  return sweep;
}

}  // namespace calderon
