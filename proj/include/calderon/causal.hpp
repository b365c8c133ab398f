#pragma once

#include <Eigen/Dense>

#include "calderon/grid.hpp"
#include "calderon/util.hpp"

namespace calderon {

// One-step weights of the causal exponential integrator for
// h v' + b v = u along x1 with piecewise-linear u:
//   v_i = E v_{i-1} + wA u_{i-1} + wB u_i,  z = b dx / h.
// The forward operator is the exact bidiagonal inverse of this recurrence,
// so the pair composes to the identity to roundoff and both read strictly
// backward in x1.
struct CausalWeights {
  cplx E, wA, wB;
};

// stable phi-functions (series for small |z|)
cplx phi_A(cplx z);  // int_0^1 tau e^{-z tau} dtau
cplx phi_B(cplx z);  // int_0^1 (1-tau) e^{-z tau} dtau
cplx phi_Q(cplx z);  // int_0^1 tau^2 e^{-z tau} dtau

CausalWeights causal_weights(cplx b, double dx, double h);

void causal_inv(const CausalWeights& w, const cplx* u, cplx* v, int n,
                std::size_t stride);
void causal_inv_adjoint(const CausalWeights& w, const cplx* y, cplx* x, int n,
                        std::size_t stride);
void causal_fwd(const CausalWeights& w, const cplx* v, cplx* u, int n,
                std::size_t stride);
void causal_fwd_adjoint(const CausalWeights& w, const cplx* y, cplx* x, int n,
                        std::size_t stride);

// Block (matrix-coefficient) versions for quantized transversal symbols.
struct BlockCausalWeights {
  Eigen::MatrixXcd E, wA, wB;
  Eigen::PartialPivLU<Eigen::MatrixXcd> wB_lu;
  Eigen::PartialPivLU<Eigen::MatrixXcd> wBH_lu;
};

// weights from the quantized flow matrix Bmat (h v' + Bmat v = u)
BlockCausalWeights block_causal_weights(const Eigen::MatrixXcd& Bmat, double dx,
                                        double h);

void block_causal_inv(const BlockCausalWeights& w,
                      const std::vector<Eigen::VectorXcd>& u,
                      std::vector<Eigen::VectorXcd>& v);
void block_causal_inv_adjoint(const BlockCausalWeights& w,
                              const std::vector<Eigen::VectorXcd>& y,
                              std::vector<Eigen::VectorXcd>& x);
void block_causal_fwd(const BlockCausalWeights& w,
                      const std::vector<Eigen::VectorXcd>& v,
                      std::vector<Eigen::VectorXcd>& u);
void block_causal_fwd_adjoint(const BlockCausalWeights& w,
                              const std::vector<Eigen::VectorXcd>& y,
                              std::vector<Eigen::VectorXcd>& x);

// Causal column action of the two-pole kernel
//   v(x1) = (i/h) int_{-inf}^{x1} (e^{i a+ (x1-y)/h} - e^{i a- (x1-y)/h})
//            / (a+ - a-) u(y) dy
// with the confluent limit used when the poles nearly coincide. The adjoint
// runs the conjugated kernel on the reversed column (the kernel is Toeplitz).
void two_pole_column(cplx a_plus, cplx a_minus, double h, double dx,
                     const cplx* u, cplx* v, int n, std::size_t stride,
                     bool adjoint, double confluent_tol = 1e-8);

}  // namespace calderon
