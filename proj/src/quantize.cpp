#include "calderon/quantize.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>

#include "calderon/opnorm.hpp"

namespace calderon {

Symbol constant_symbol(cplx value, int tdim) {
  Symbol s;
  s.label = "const";
  s.tdim = tdim;
  s.eval = [value](const TransPoint&, const std::array<double, 3>&) {
    return value;
  };
  s.class_tag = Symbol::ClassTag::S1;
  return s;
}

Symbol multiplier_symbol(
    std::function<cplx(double, const std::array<double, 2>&)> f,
    Symbol::Arity arity, int tdim, std::string label) {
  Symbol s;
  s.label = std::move(label);
  s.arity = arity;
  s.tdim = tdim;
  s.eval = [f = std::move(f)](const TransPoint&,
                              const std::array<double, 3>& xi) {
    return f(xi[0], {xi[1], xi[2]});
  };
  return s;
}

Symbol x_symbol(std::function<cplx(const TransPoint&)> f, int tdim,
                std::vector<int> depends, std::string label) {
  Symbol s;
  s.label = std::move(label);
  s.tdim = tdim;
  s.depends_axes = std::move(depends);
  s.eval = [f = std::move(f)](const TransPoint& x,
                              const std::array<double, 3>&) { return f(x); };
  return s;
}

namespace {

// Growth guard: the sampled symbol must not outgrow its declared order over
// the resolved frequency band.
void check_growth(const Symbol& a, double h, const Grid& g) {
  double order = a.arity == Symbol::Arity::full
                     ? a.order_full
                     : a.order_trans;
  TransPoint x0;
  x0[0] = 0.37;
  x0[1] = 1.13;
  double lo = 0.0, hi = 0.0;
  auto probe = [&](double frac) {
    double worst = 0.0;
    for (int axis = (a.arity == Symbol::Arity::full ? 0 : 1); axis < g.rank();
         ++axis) {
      std::array<double, 3> xi{0.0, 0.0, 0.0};
      xi[axis] = frac * h * g.max_freq(axis);
      double jap = std::sqrt(1.0 + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
      double v = std::abs(a.eval(x0, xi)) / std::pow(jap, order);
      worst = std::max(worst, v);
    }
    return worst;
  };
  lo = probe(0.45);
  hi = probe(0.9);
  if (hi > 50.0 * std::max(lo, 1e-12) && hi > 1e-9)
    throw FrequencyOverflow(a.label + " grows past declared order " +
                            std::to_string(order));
}

int wrap_diff(int d, int n) {
  d %= n;
  if (d > n / 2) d -= n;
  if (d <= -n / 2) d += n;
  return d;
}

// Dense midpoint kernels along the axes the symbol depends on, diagonal in
// the remaining transversal modes.
struct TransKernels {
  const Grid* grid = nullptr;
  int d_grid = 1;            // dense grid axis
  int e_grid = -1;           // diagonal grid axis (-1 if none)
  bool dense_both = false;   // full dense kernel over the slice
  std::vector<Eigen::MatrixXcd> K;  // per e-mode, or single entry

  ComplexField apply(const ComplexField& u, bool adjoint) const;
};

using SymEval = std::function<cplx(const TransPoint&, const std::array<double, 3>&)>;

// kernel entries K(i,j) = (1/n) sum_k w^{(i-j)k} a(mid(i,j), h xi_k)
Eigen::MatrixXcd build_1d_kernel(const SymEval& eval, double h, const Grid& g,
                                 int d_grid, double xi_other, int other_comp) {
  int n = g.dim(d_grid);
  double L = g.length(d_grid);
  double dx = L / n;
  int comp = d_grid - 1;  // transversal component index of the dense axis
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(n, n);
  // per midpoint class: inverse DFT of the symbol row over the dense modes
  std::vector<cplx> row(n), F(n);
  for (int m2 = 0; m2 < 2 * n; ++m2) {
    double mid = 0.5 * m2 * dx;
    TransPoint x;
    x[comp] = mid;
    for (int k = 0; k < n; ++k) {
      std::array<double, 3> xi{0.0, 0.0, 0.0};
      xi[1 + comp] = h * g.freq(d_grid, k);
      if (other_comp >= 0) xi[1 + other_comp] = xi_other;
      row[k] = eval(x, xi);
    }
    for (int w = 0; w < n; ++w) {
      cplx s = 0;
      for (int k = 0; k < n; ++k) {
        double ph = 2.0 * M_PI * double(w) * double(k) / double(n);
        s += row[k] * cplx(std::cos(ph), std::sin(ph));
      }
      F[w] = s / double(n);
    }
    // scatter to the pairs (i,j) whose short-way midpoint class is m2; the
    // antipodal difference |w| = n/2 has two geodesic midpoints and takes
    // half weight from each
    for (int j = 0; j < n; ++j) {
      int wr = (((m2 - 2 * j) % (2 * n)) + 2 * n) % (2 * n);
      int w;
      double weight = 1.0;
      if (wr < n / 2) {
        w = wr;
      } else if (wr > 3 * n / 2) {
        w = wr - 2 * n;
      } else if (wr == n / 2 || wr == 3 * n / 2) {
        w = n / 2;
        weight = 0.5;
      } else {
        continue;
      }
      int i = ((j + w) % n + n) % n;
      K(i, j) += weight * F[((w % n) + n) % n];
    }
  }
  return K;
}

ComplexField TransKernels::apply(const ComplexField& u, bool adjoint) const {
  const Grid& g = *grid;
  int n1 = g.dim(0);
  if (dense_both) {
    std::size_t slice = g.size() / n1;
    ComplexField out(g);
    const Eigen::MatrixXcd& M = K[0];
    parallel_for(n1, [&](std::size_t j0) {
      Eigen::Map<const Eigen::VectorXcd> x(u.v.data() + j0 * slice, slice);
      Eigen::Map<Eigen::VectorXcd> y(out.v.data() + j0 * slice, slice);
      if (adjoint)
        y = M.adjoint() * x;
      else
        y = M * x;
    });
    return out;
  }
  if (e_grid < 0) {
    // single transversal axis (smoke mode)
    int n = g.dim(d_grid);
    ComplexField out(g);
    const Eigen::MatrixXcd& M = K[0];
    parallel_for(n1, [&](std::size_t j0) {
      Eigen::Map<const Eigen::VectorXcd> x(u.v.data() + j0 * n, n);
      Eigen::Map<Eigen::VectorXcd> y(out.v.data() + j0 * n, n);
      if (adjoint)
        y = M.adjoint() * x;
      else
        y = M * x;
    });
    return out;
  }
  // dense along d, diagonal along e: transform axis e, per-mode matvec, back
  ComplexField hat(g);
  g.fft_axis(e_grid, u.v.data(), hat.v.data());
  int nd = g.dim(d_grid);
  int ne = g.dim(e_grid);
  std::size_t sd = g.stride(d_grid);
  std::size_t se = g.stride(e_grid);
  std::size_t s0 = g.stride(0);
  ComplexField mid(g);
  parallel_for(static_cast<std::size_t>(n1) * ne, [&](std::size_t item) {
    int j0 = static_cast<int>(item / ne);
    int ke = static_cast<int>(item % ne);
    Eigen::VectorXcd x(nd), y(nd);
    std::size_t base = j0 * s0 + ke * se;
    for (int j = 0; j < nd; ++j) x[j] = hat[base + j * sd];
    if (adjoint)
      y = K[ke].adjoint() * x;
    else
      y = K[ke] * x;
    for (int j = 0; j < nd; ++j) mid[base + j * sd] = y[j];
  });
  ComplexField out(g);
  g.ifft_axis(e_grid, mid.v.data(), out.v.data());
  return out;
}

// full dense kernel over a 2-axis transversal slice via midpoint classes
Eigen::MatrixXcd build_2d_kernel(const SymEval& eval, double h, const Grid& g) {
  int n1 = g.dim(1), n2 = g.dim(2);
  std::size_t slice = static_cast<std::size_t>(n1) * n2;
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(slice, slice);
  double dx1 = g.spacing(1), dx2 = g.spacing(2);
  std::vector<cplx> F(slice);
  std::vector<cplx> row(slice);
  for (int m1 = 0; m1 < 2 * n1; ++m1) {
    for (int m2 = 0; m2 < 2 * n2; ++m2) {
      TransPoint x;
      x[0] = 0.5 * m1 * dx1;
      x[1] = 0.5 * m2 * dx2;
      std::size_t i = 0;
      for (int k1 = 0; k1 < n1; ++k1)
        for (int k2 = 0; k2 < n2; ++k2)
          row[i++] = eval(x, {0.0, h * g.freq(1, k1), h * g.freq(2, k2)});
      // F(w1,w2) = (1/N) sum row * exp(+2pi i (w1 k1/n1 + w2 k2/n2))
      // two small nested DFTs
      static thread_local std::vector<cplx> tmp;
      tmp.assign(slice, 0.0);
      for (int w2 = 0; w2 < n2; ++w2)
        for (int k1 = 0; k1 < n1; ++k1) {
          cplx s = 0;
          for (int k2 = 0; k2 < n2; ++k2) {
            double ph = 2.0 * M_PI * double(w2) * double(k2) / double(n2);
            s += row[k1 * n2 + k2] * cplx(std::cos(ph), std::sin(ph));
          }
          tmp[k1 * n2 + w2] = s;
        }
      for (int w1 = 0; w1 < n1; ++w1)
        for (int w2 = 0; w2 < n2; ++w2) {
          cplx s = 0;
          for (int k1 = 0; k1 < n1; ++k1) {
            double ph = 2.0 * M_PI * double(w1) * double(k1) / double(n1);
            s += tmp[k1 * n2 + w2] * cplx(std::cos(ph), std::sin(ph));
          }
          F[w1 * n2 + w2] = s / double(slice);
        }
      for (int j1 = 0; j1 < n1; ++j1) {
        int wr1 = (((m1 - 2 * j1) % (2 * n1)) + 2 * n1) % (2 * n1);
        int w1;
        double weight1 = 1.0;
        if (wr1 < n1 / 2) {
          w1 = wr1;
        } else if (wr1 > 3 * n1 / 2) {
          w1 = wr1 - 2 * n1;
        } else if (wr1 == n1 / 2 || wr1 == 3 * n1 / 2) {
          w1 = n1 / 2;
          weight1 = 0.5;
        } else {
          continue;
        }
        int i1 = ((j1 + w1) % n1 + n1) % n1;
        for (int j2 = 0; j2 < n2; ++j2) {
          int wr2 = (((m2 - 2 * j2) % (2 * n2)) + 2 * n2) % (2 * n2);
          int w2;
          double weight2 = 1.0;
          if (wr2 < n2 / 2) {
            w2 = wr2;
          } else if (wr2 > 3 * n2 / 2) {
            w2 = wr2 - 2 * n2;
          } else if (wr2 == n2 / 2 || wr2 == 3 * n2 / 2) {
            w2 = n2 / 2;
            weight2 = 0.5;
          } else {
            continue;
          }
          int i2 = ((j2 + w2) % n2 + n2) % n2;
          K(i1 * n2 + i2, j1 * n2 + j2) +=
              weight1 * weight2 *
              F[(((w1 % n1) + n1) % n1) * n2 + ((w2 % n2) + n2) % n2];
        }
      }
    }
  }
  return K;
}

}  // namespace

LinearMap weyl_quantize(const Symbol& a, double h, const Grid& g) {
  check_growth(a, h, g);

  if (a.depends_axes.empty()) {
    bool full = a.arity == Symbol::Arity::full;
    auto eval = a.eval;
    return multiplier_map(
        g,
        [eval, h, &g, full](const std::vector<int>& k) {
          std::array<double, 3> xi{0.0, 0.0, 0.0};
          if (full) xi[0] = h * g.freq(0, k[0]);
          for (int axis = 1; axis < g.rank(); ++axis)
            xi[axis] = h * g.freq(axis, k[axis]);
          TransPoint x;
          return eval(x, xi);
        },
        "Op(" + a.label + ")");
  }

  if (a.arity == Symbol::Arity::full)
    throw Error("x'-dependent full-arity symbols go through weyl_quantize_poly1");

  auto kern = std::make_shared<TransKernels>();
  kern->grid = &g;
  int tdim = g.rank() - 1;
  if (tdim == 1) {
    kern->d_grid = 1;
    kern->e_grid = -1;
    kern->K.push_back(build_1d_kernel(a.eval, h, g, 1, 0.0, -1));
  } else if (a.depends_axes.size() == 1) {
    int d = a.depends_axes[0];
    int e = 1 - d;
    kern->d_grid = 1 + d;
    kern->e_grid = 1 + e;
    kern->K.resize(g.dim(kern->e_grid));
    for (int ke = 0; ke < g.dim(kern->e_grid); ++ke)
      kern->K[ke] = build_1d_kernel(a.eval, h, g, kern->d_grid,
                                    h * g.freq(kern->e_grid, ke), e);
  } else {
    kern->dense_both = true;
    if (static_cast<std::size_t>(g.dim(1)) * g.dim(2) > 64 * 64)
      throw Error("dense transversal kernel limited to 64^2 per slice");
    kern->K.push_back(build_2d_kernel(a.eval, h, g));
  }

  LinearMap m;
  m.label = "Op(" + a.label + ")";
  m.apply = [kern](const ComplexField& u) { return kern->apply(u, false); };
  m.apply_adjoint = [kern](const ComplexField& u) {
    return kern->apply(u, true);
  };
  return m;
}

Eigen::MatrixXcd transversal_mode_kernel(const Symbol& a, double h,
                                         const Grid& g, int ke_mode) {
  int tdim = g.rank() - 1;
  if (tdim == 1) return build_1d_kernel(a.eval, h, g, 1, 0.0, -1);
  int d = a.depends_axes.empty() ? 0 : a.depends_axes[0];
  if (a.depends_axes.size() > 1)
    throw Error("mode kernel requires dependence on at most one axis");
  int e = 1 - d;
  int d_grid = 1 + d, e_grid = 1 + e;
  if (a.depends_axes.empty()) {
    // diagonal multiplier matrix in the d-axis modes; convert to nodal form
    int n = g.dim(d_grid);
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(n, n);
    TransPoint x;
    for (int k = 0; k < n; ++k) {
      std::array<double, 3> xi{0.0, 0.0, 0.0};
      xi[1 + d] = h * g.freq(d_grid, k);
      xi[1 + e] = h * g.freq(e_grid, ke_mode);
      D(k, k) = a.eval(x, xi);
    }
    // nodal kernel K = F^{-1} D F with F the unitary DFT
    Eigen::MatrixXcd F(n, n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double ph = -2.0 * M_PI * double(j) * double(k) / double(n);
        F(k, j) = cplx(std::cos(ph), std::sin(ph));
      }
    return F.adjoint() * D * F / double(n);
  }
  return build_1d_kernel(a.eval, h, g, d_grid, h * g.freq(e_grid, ke_mode), e);
}

LinearMap weyl_quantize_poly1(const std::vector<Symbol>& coeffs, double h,
                              const Grid& g) {
  LinearMap total;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    LinearMap term = weyl_quantize(coeffs[k], h, g);
    for (std::size_t j = 0; j < k; ++j) {
      LinearMap d1 = multiplier_map(
          g,
          [&g, h](const std::vector<int>& idx) {
            return cplx(h * g.freq(0, idx[0]), 0.0);
          },
          "hD1");
      term = compose(d1, term);
    }
    total = k == 0 ? term : map_sum(total, term);
  }
  total.label = "Op(poly1)";
  return total;
}

namespace {

// nested central differences for mixed partials of the symbol evaluator
cplx fd_mixed(const std::function<cplx(std::vector<double>&)>& f,
              std::vector<double>& pt, const std::vector<int>& orders,
              const std::vector<double>& steps, int var) {
  if (var < 0) {
    return f(pt);
  }
  if (orders[var] == 0) return fd_mixed(f, pt, orders, steps, var - 1);
  std::vector<int> o = orders;
  o[var] -= 1;
  double s = steps[var];
  pt[var] += s;
  cplx up = fd_mixed(f, pt, o, steps, var);
  pt[var] -= 2 * s;
  cplx dn = fd_mixed(f, pt, o, steps, var);
  pt[var] += s;
  return (up - dn) / (2.0 * s);
}

}  // namespace

double symbol_seminorm(const Symbol& a, double h, const Grid& g,
                       const std::vector<int>& alpha,
                       const std::vector<int>& beta) {
  int tdim = g.rank() - 1;
  bool full = a.arity == Symbol::Arity::full;
  int nx = tdim;
  int nxi = full ? 1 + tdim : tdim;
  int total_order = 0;
  for (int o : alpha) total_order += o;
  for (int o : beta) total_order += o;
  double base_step = total_order <= 2 ? 1e-4 : (total_order <= 4 ? 5e-3 : 3e-2);

  auto f = [&](std::vector<double>& pt) -> cplx {
    TransPoint x;
    for (int i = 0; i < nx; ++i) x[i] = pt[i];
    std::array<double, 3> xi{0.0, 0.0, 0.0};
    if (full) {
      xi[0] = pt[nx];
      for (int i = 0; i < tdim; ++i) xi[1 + i] = pt[nx + 1 + i];
    } else {
      for (int i = 0; i < tdim; ++i) xi[1 + i] = pt[nx + i];
    }
    return a.eval(x, xi);
  };

  std::vector<int> orders(nx + nxi, 0);
  for (int i = 0; i < nx && i < static_cast<int>(alpha.size()); ++i)
    orders[i] = alpha[i];
  for (int i = 0; i < nxi && i < static_cast<int>(beta.size()); ++i)
    orders[nx + i] = beta[i];
  int btot = 0;
  for (int o : beta) btot += o;

  // sample lattice: x' on a coarse subgrid, xi along rays in the band
  std::vector<double> xsamples;
  for (int i = 0; i < 5; ++i)
    xsamples.push_back(g.length(1) * (0.07 + 0.2 * i));
  std::vector<double> fracs{0.0, 0.15, 0.35, 0.6, 0.85};

  double sup = 0.0;
  std::vector<double> pt(nx + nxi, 0.0);
  std::vector<double> steps(nx + nxi, base_step);
  for (double x1 : xsamples) {
    for (double x2 : (nx > 1 ? xsamples : std::vector<double>{0.0})) {
      pt[0] = x1;
      if (nx > 1) pt[1] = x2;
      for (double f1 : fracs) {
        for (double f2 : fracs) {
          // two independent ray fractions cover axis and diagonal directions
          double ximax1 = h * g.max_freq(full ? 0 : 1);
          double ximax2 = h * g.max_freq(g.rank() - 1);
          pt[nx] = f1 * ximax1 * 0.95;
          if (nxi > 1) pt[nx + 1] = f2 * ximax2 * 0.95;
          if (nxi > 2) pt[nx + 2] = 0.5 * f1 * ximax2 * 0.95;
          double xi2 = 0.0;
          for (int i = 0; i < nxi; ++i) xi2 += pt[nx + i] * pt[nx + i];
          double jap = std::sqrt(1.0 + xi2);
          for (int i = 0; i < nxi; ++i)
            steps[nx + i] = base_step * jap;
          cplx d = fd_mixed(f, pt, orders, steps, nx + nxi - 1);
          sup = std::max(sup, std::abs(d) * std::pow(jap, btot));
        }
      }
    }
  }
  return sup;
}

int cv_derivative_count(int n) { return (n + 1) / 2 + 1; }

namespace {
void enumerate_multi(int vars, int max_total, std::vector<std::vector<int>>& out) {
  std::vector<int> cur(vars, 0);
  auto rec = [&](auto&& self, int v, int left) -> void {
    if (v == vars) {
      out.push_back(cur);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      cur[v] = k;
      self(self, v + 1, left - k);
    }
    cur[v] = 0;
  };
  rec(rec, 0, max_total);
}
}  // namespace

double cv_seminorm_sum(const Symbol& a, double h, const Grid& g, int kn) {
  int tdim = g.rank() - 1;
  int nxi = a.arity == Symbol::Arity::full ? 1 + tdim : tdim;
  std::vector<std::vector<int>> alphas, betas;
  enumerate_multi(tdim, kn, alphas);
  enumerate_multi(nxi, kn, betas);
  double sum = 0.0;
  for (const auto& al : alphas)
    for (const auto& be : betas) sum += symbol_seminorm(a, h, g, al, be);
  return sum;
}

CvCheckResult cv_check(const Symbol& a, double r, double h, const Grid& g,
                       int trials, std::uint64_t seed, double slack_const) {
  CvCheckResult res;
  int n = g.rank();
  res.kn = cv_derivative_count(n);
  LinearMap op = weyl_quantize(a, h, g);
  OpNormOptions opts;
  opts.corr_len = 0.2;
  res.measured_norm =
      estimate_opnorm(op, g, r, r, trials, seed, opts).lower_bound;
  res.seminorm_sum = cv_seminorm_sum(a, h, g, res.kn);
  res.bound = res.seminorm_sum + slack_const * std::sqrt(h);
  return res;
}

namespace {
Symbol fd_derivative_symbol(const Symbol& a, int var_kind, int index,
                            std::string label) {
  // var_kind 0: x'-derivative, 1: xi-derivative (index into xi array)
  Symbol d = a;
  d.label = std::move(label);
  auto eval = a.eval;
  d.eval = [eval, var_kind, index](const TransPoint& x,
                                   const std::array<double, 3>& xi) {
    double step = 1e-5;
    if (var_kind == 0) {
      TransPoint xp = x, xm = x;
      xp[index] += step;
      xm[index] -= step;
      return (eval(xp, xi) - eval(xm, xi)) / (2.0 * step);
    }
    double jap = std::sqrt(1.0 + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
    std::array<double, 3> xp = xi, xm = xi;
    xp[index] += step * jap;
    xm[index] -= step * jap;
    return (eval(x, xp) - eval(x, xm)) / (2.0 * step * jap);
  };
  return d;
}
}  // namespace

ComposeCheckResult compose_check(const Symbol& a, const Symbol& b,
                                 const std::vector<double>& h_list,
                                 const Grid& g, std::uint64_t seed) {
  ComposeCheckResult out;
  out.h_list = h_list;
  int tdim = g.rank() - 1;

  Symbol prod = a;
  prod.label = a.label + "*" + b.label;
  {
    auto ea = a.eval, eb = b.eval;
    prod.eval = [ea, eb](const TransPoint& x, const std::array<double, 3>& xi) {
      return ea(x, xi) * eb(x, xi);
    };
    prod.order_trans = a.order_trans + b.order_trans;
    prod.depends_axes = a.depends_axes;
    for (int d : b.depends_axes)
      if (std::find(prod.depends_axes.begin(), prod.depends_axes.end(), d) ==
          prod.depends_axes.end())
        prod.depends_axes.push_back(d);
    std::sort(prod.depends_axes.begin(), prod.depends_axes.end());
  }

  // bracket with the convention making Op(b)Op(a) = Op(ab) + (h/2i)Op({a,b})
  // + O(h^2): {a,b} = sum_j d_xi_j(b) d_x_j(a) - d_x_j(b) d_xi_j(a)
  Symbol bracket = prod;
  bracket.label = "{" + a.label + "," + b.label + "}";
  bracket.order_trans = a.order_trans + b.order_trans - 1;
  {
    std::vector<Symbol> dxa, dxia, dxb, dxib;
    for (int j = 0; j < tdim; ++j) {
      dxa.push_back(fd_derivative_symbol(a, 0, j, "dxa"));
      dxb.push_back(fd_derivative_symbol(b, 0, j, "dxb"));
      dxia.push_back(fd_derivative_symbol(a, 1, 1 + j, "dxia"));
      dxib.push_back(fd_derivative_symbol(b, 1, 1 + j, "dxib"));
    }
    bracket.eval = [tdim, dxa, dxia, dxb, dxib](
                       const TransPoint& x, const std::array<double, 3>& xi) {
      cplx s = 0;
      for (int j = 0; j < tdim; ++j)
        s += dxib[j].eval(x, xi) * dxa[j].eval(x, xi) -
             dxb[j].eval(x, xi) * dxia[j].eval(x, xi);
      return s;
    };
  }

  double probe_scale = 0.0;
  for (double h : h_list) {
    LinearMap Oa = weyl_quantize(a, h, g);
    LinearMap Ob = weyl_quantize(b, h, g);
    LinearMap Oab = weyl_quantize(prod, h, g);
    LinearMap Obr = weyl_quantize(bracket, h, g);
    double worst = 0.0;
    for (int k = 0; k < 4; ++k) {
      Rng rng = Rng::substream(seed, k);
      ComplexField u = smooth_random(g, rng, 0.35);
      ComplexField res = Ob.apply(Oa.apply(u)) - Oab.apply(u);
      ComplexField br = Obr.apply(u);
      br *= cplx(0.0, -0.5 * h);  // h/(2i)
      res -= br;
      double nu = lr_norm(u, 2.0);
      worst = std::max(worst, lr_norm(res, 2.0) / nu);
      probe_scale = std::max(probe_scale, lr_norm(Oa.apply(u), 2.0) / nu);
    }
    out.residuals.push_back(worst);
  }

  double floor = 1e-11 * std::max(probe_scale, 1.0);
  bool all_floor = true;
  for (double v : out.residuals) all_floor = all_floor && v < floor;
  if (all_floor) {
    out.at_floor = true;
    out.slope = 99.0;
    return out;
  }
  // least-squares slope in log-log
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = static_cast<int>(h_list.size());
  for (int i = 0; i < m; ++i) {
    double x = std::log(h_list[i]);
    double y = std::log(std::max(out.residuals[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return out;
}

double symbol_class_ratio(const Symbol& a, double h, const Grid& g) {
  // compare |d_xi a| against the declared S1 decay <xi>^(order-1)
  double order = a.arity == Symbol::Arity::full ? a.order_full : a.order_trans;
  double worst = 0.0;
  TransPoint x;
  x[0] = 0.91;
  x[1] = 2.17;
  int first = a.arity == Symbol::Arity::full ? 0 : 1;
  double base = 0.0;
  for (int axis = first; axis < g.rank(); ++axis) {
    for (double frac : {0.1, 0.3, 0.5, 0.8}) {
      std::array<double, 3> xi{0.0, 0.0, 0.0};
      xi[axis] = frac * h * g.max_freq(axis);
      double jap =
          std::sqrt(1.0 + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
      double step = 1e-5 * jap;
      std::array<double, 3> xp = xi, xm = xi;
      xp[axis] += step;
      xm[axis] -= step;
      double d = std::abs(a.eval(x, xp) - a.eval(x, xm)) / (2.0 * step);
      double ratio = d / std::pow(jap, order - 1.0);
      if (frac <= 0.11) base = std::max(base, ratio + 1e-12);
      worst = std::max(worst, ratio);
    }
  }
  return base > 0 ? worst / base : 0.0;
}

}  // namespace calderon
