#include "calderon/causal.hpp"

#include <cmath>

namespace calderon {

namespace {
constexpr double kSeriesRadius = 0.5;
}

cplx phi_A(cplx z) {
  if (std::abs(z) < kSeriesRadius) {
    // sum (-z)^k (k+1)/(k+2)!
    cplx term = 1.0, sum = 0.0;
    double fact = 2.0;  // (k+2)! running
    for (int k = 0; k <= 14; ++k) {
      sum += term * double(k + 1) / fact;
      term *= -z;
      fact *= double(k + 3);
    }
    return sum;
  }
  cplx ez = std::exp(-z);
  return (1.0 - (1.0 + z) * ez) / (z * z);
}

cplx phi_B(cplx z) {
  if (std::abs(z) < kSeriesRadius) {
    // sum (-z)^k / (k+2)!
    cplx term = 1.0, sum = 0.0;
    double fact = 2.0;
    for (int k = 0; k <= 14; ++k) {
      sum += term / fact;
      term *= -z;
      fact *= double(k + 3);
    }
    return sum;
  }
  cplx ez = std::exp(-z);
  return (z - 1.0 + ez) / (z * z);
}

cplx phi_Q(cplx z) {
  if (std::abs(z) < kSeriesRadius) {
    // sum (-z)^k / (k! (k+3))
    cplx term = 1.0, sum = 0.0;
    double fact = 1.0;
    for (int k = 0; k <= 14; ++k) {
      sum += term / (fact * double(k + 3));
      term *= -z;
      fact *= double(k + 1);
    }
    return sum;
  }
  cplx ez = std::exp(-z);
  return (2.0 - ez * (z * z + 2.0 * z + 2.0)) / (z * z * z);
}

CausalWeights causal_weights(cplx b, double dx, double h) {
  cplx z = b * dx / h;
  CausalWeights w;
  w.E = std::exp(-z);
  double s = dx / h;
  // kernel weight on u_{i-1} integrates tau e^{-z tau}; on u_i (1-tau)
  w.wA = s * phi_A(z);
  w.wB = s * phi_B(z);
  return w;
}

void causal_inv(const CausalWeights& w, const cplx* u, cplx* v, int n,
                std::size_t stride) {
  cplx prev_v = 0.0, prev_u = 0.0;
  for (int i = 0; i < n; ++i) {
    cplx ui = u[i * stride];
    cplx vi = w.E * prev_v + w.wA * prev_u + w.wB * ui;
    v[i * stride] = vi;
    prev_v = vi;
    prev_u = ui;
  }
}

void causal_inv_adjoint(const CausalWeights& w, const cplx* y, cplx* x, int n,
                        std::size_t stride) {
  cplx Ec = std::conj(w.E);
  cplx c0 = std::conj(w.wB);
  cplx c1 = std::conj(w.E * w.wB + w.wA);
  cplx T = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    x[i * stride] = c0 * y[i * stride] + c1 * T;
    T = y[i * stride] + Ec * T;
  }
}

void causal_fwd(const CausalWeights& w, const cplx* v, cplx* u, int n,
                std::size_t stride) {
  cplx prev_v = 0.0, prev_u = 0.0;
  for (int i = 0; i < n; ++i) {
    cplx vi = v[i * stride];
    cplx ui = (vi - w.E * prev_v - w.wA * prev_u) / w.wB;
    u[i * stride] = ui;
    prev_v = vi;
    prev_u = ui;
  }
}

void causal_fwd_adjoint(const CausalWeights& w, const cplx* y, cplx* x, int n,
                        std::size_t stride) {
  // solve (M^H) x = y where M is the inverse-recurrence matrix
  cplx Ec = std::conj(w.E);
  cplx c0 = std::conj(w.wB);
  cplx c1 = std::conj(w.E * w.wB + w.wA);
  cplx T = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    cplx xi = (y[i * stride] - c1 * T) / c0;
    x[i * stride] = xi;
    T = xi + Ec * T;
  }
}

BlockCausalWeights block_causal_weights(const Eigen::MatrixXcd& Bmat, double dx,
                                        double h) {
  int n = static_cast<int>(Bmat.rows());
  Eigen::MatrixXcd Z = (dx / h) * Bmat;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Z);
  if (es.info() != Eigen::Success)
    throw Error("eigendecomposition of the flow matrix failed");
  const auto& V = es.eigenvectors();
  const auto& lam = es.eigenvalues();
  Eigen::VectorXcd fE(n), fA(n), fB(n);
  for (int i = 0; i < n; ++i) {
    fE[i] = std::exp(-lam[i]);
    fA[i] = (dx / h) * phi_A(lam[i]);
    fB[i] = (dx / h) * phi_B(lam[i]);
  }
  Eigen::PartialPivLU<Eigen::MatrixXcd> Vlu(V);
  BlockCausalWeights w;
  w.E = V * fE.asDiagonal() * Vlu.inverse();
  w.wA = V * fA.asDiagonal() * Vlu.inverse();
  w.wB = V * fB.asDiagonal() * Vlu.inverse();
  double resid = (w.E * V - V * fE.asDiagonal()).norm() /
                 std::max(1.0, w.E.norm());
  if (!std::isfinite(resid) || resid > 1e-8)
    throw Error("ill-conditioned eigenbasis in flow matrix exponential");
  w.wB_lu.compute(w.wB);
  w.wBH_lu.compute(w.wB.adjoint().eval());
  return w;
}

void block_causal_inv(const BlockCausalWeights& w,
                      const std::vector<Eigen::VectorXcd>& u,
                      std::vector<Eigen::VectorXcd>& v) {
  int n = static_cast<int>(u.size());
  int m = static_cast<int>(u[0].size());
  v.assign(n, Eigen::VectorXcd::Zero(m));
  Eigen::VectorXcd prev_v = Eigen::VectorXcd::Zero(m);
  Eigen::VectorXcd prev_u = Eigen::VectorXcd::Zero(m);
  for (int i = 0; i < n; ++i) {
    v[i] = w.E * prev_v + w.wA * prev_u + w.wB * u[i];
    prev_v = v[i];
    prev_u = u[i];
  }
}

void block_causal_inv_adjoint(const BlockCausalWeights& w,
                              const std::vector<Eigen::VectorXcd>& y,
                              std::vector<Eigen::VectorXcd>& x) {
  int n = static_cast<int>(y.size());
  int m = static_cast<int>(y[0].size());
  x.assign(n, Eigen::VectorXcd::Zero(m));
  Eigen::MatrixXcd EH = w.E.adjoint();
  Eigen::MatrixXcd C0 = w.wB.adjoint();
  Eigen::MatrixXcd C1 = (w.E * w.wB + w.wA).adjoint();
  Eigen::VectorXcd T = Eigen::VectorXcd::Zero(m);
  for (int i = n - 1; i >= 0; --i) {
    x[i] = C0 * y[i] + C1 * T;
    T = y[i] + EH * T;
  }
}

void block_causal_fwd(const BlockCausalWeights& w,
                      const std::vector<Eigen::VectorXcd>& v,
                      std::vector<Eigen::VectorXcd>& u) {
  int n = static_cast<int>(v.size());
  int m = static_cast<int>(v[0].size());
  u.assign(n, Eigen::VectorXcd::Zero(m));
  Eigen::VectorXcd prev_v = Eigen::VectorXcd::Zero(m);
  Eigen::VectorXcd prev_u = Eigen::VectorXcd::Zero(m);
  for (int i = 0; i < n; ++i) {
    u[i] = w.wB_lu.solve(v[i] - w.E * prev_v - w.wA * prev_u);
    prev_v = v[i];
    prev_u = u[i];
  }
}

void block_causal_fwd_adjoint(const BlockCausalWeights& w,
                              const std::vector<Eigen::VectorXcd>& y,
                              std::vector<Eigen::VectorXcd>& x) {
  int n = static_cast<int>(y.size());
  int m = static_cast<int>(y[0].size());
  x.assign(n, Eigen::VectorXcd::Zero(m));
  Eigen::MatrixXcd EH = w.E.adjoint();
  Eigen::MatrixXcd C1 = (w.E * w.wB + w.wA).adjoint();
  Eigen::VectorXcd T = Eigen::VectorXcd::Zero(m);
  for (int i = n - 1; i >= 0; --i) {
    x[i] = w.wBH_lu.solve(y[i] - C1 * T);
    T = x[i] + EH * T;
  }
}

void two_pole_column(cplx a_plus, cplx a_minus, double h, double dx,
                     const cplx* u, cplx* v, int n, std::size_t stride,
                     bool adjoint, double confluent_tol) {
  // adjoint: run the conjugated Toeplitz kernel on the reversed column
  if (adjoint) {
    std::vector<cplx> ur(n), vr(n);
    for (int i = 0; i < n; ++i) ur[i] = u[(n - 1 - i) * stride];
    two_pole_column(-std::conj(a_plus), -std::conj(a_minus), h, dx, ur.data(),
                    vr.data(), n, 1, false, confluent_tol);
    for (int i = 0; i < n; ++i) v[i * stride] = vr[n - 1 - i];
    return;
  }

  double scale = std::max({std::abs(a_plus), std::abs(a_minus), 1.0});
  if (std::abs(a_plus - a_minus) > confluent_tol * scale) {
    cplx zp = cplx(0, -1) * a_plus * dx / h;
    cplx zm = cplx(0, -1) * a_minus * dx / h;
    cplx Ep = std::exp(-zp), Em = std::exp(-zm);
    cplx Ap = dx * phi_A(zp), Bp = dx * phi_B(zp);
    cplx Am = dx * phi_A(zm), Bm = dx * phi_B(zm);
    cplx pref = cplx(0, 1) / (h * (a_plus - a_minus));
    cplx Sp = 0.0, Sm = 0.0, prev_u = 0.0;
    for (int i = 0; i < n; ++i) {
      cplx ui = u[i * stride];
      Sp = Ep * Sp + Ap * prev_u + Bp * ui;
      Sm = Em * Sm + Am * prev_u + Bm * ui;
      v[i * stride] = pref * (Sp - Sm);
      prev_u = ui;
    }
    return;
  }

  // confluent limit: kernel (i (x1-y)/h) e^{i a (x1-y)/h}
  cplx a = 0.5 * (a_plus + a_minus);
  cplx z = cplx(0, -1) * a * dx / h;
  cplx E = std::exp(-z);
  cplx A = dx * phi_A(z), B = dx * phi_B(z), Q = dx * phi_Q(z);
  cplx idxh = cplx(0, 1) * dx / h;
  cplx S = 0.0, T = 0.0, prev_u = 0.0;
  for (int i = 0; i < n; ++i) {
    cplx ui = u[i * stride];
    cplx Snew = E * S + A * prev_u + B * ui;
    T = E * (T + idxh * S) + idxh * ((A - Q) * ui + Q * prev_u);
    S = Snew;
    v[i * stride] = cplx(0, 1) / h * T;
    prev_u = ui;
  }
}

}  // namespace calderon
