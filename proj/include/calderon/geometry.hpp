#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "calderon/grid.hpp"
#include "calderon/util.hpp"

namespace calderon {

// A point on the cylinder R x M0. Only the first tdim transversal entries
// are meaningful.
struct TransPoint {
  std::array<double, 2> x{0.0, 0.0};
  double& operator[](int i) { return x[i]; }
  double operator[](int i) const { return x[i]; }
};

struct Point {
  double y1 = 0.0;
  TransPoint yp;
};

// Closed flat cross-section: a circle (smoke mode) or a flat 2-torus.
// Laplacian eigenfunctions are exponentials exp(i m.y'), eigenvalues the
// squared dual-lattice frequencies.
struct TransversalManifold {
  int dim = 2;
  std::vector<double> circumferences;  // periodic cell lengths
  bool smoke_mode = false;

  TransversalManifold() : circumferences{2.0 * M_PI, 2.0 * M_PI} {}

  double dual_freq(int axis, int mode) const {
    return 2.0 * M_PI * mode / circumferences[axis];
  }
  // eigenvalue of the (geometer) transversal Laplacian for mode m
  double lambda(const std::vector<int>& m) const;
  // shortest-path distance on the flat torus/circle
  double distance(const TransPoint& a, const TransPoint& b) const;
  double wrap(int axis, double t) const;
};

// Conformal factor c(y) > 0 with optional analytic derivative data used by
// the conformal reduction. Identity by default.
struct ConformalFactor {
  bool identity = true;
  std::function<double(const Point&)> value;
  // geometer Laplacian of c^power, needed for q_c; supplied analytically
  std::function<double(const Point&, double power)> lap_of_power;

  double operator()(const Point& p) const { return identity ? 1.0 : value(p); }
};

struct CtaGeometry {
  TransversalManifold transversal;
  int n = 3;  // total dimension
  ConformalFactor conformal;
  double p = 6.0;        // 2n/(n-2)
  double p_prime = 1.2;  // 2n/(n+2)

  static CtaGeometry torus_default();
  static CtaGeometry circle_smoke();
};

// Graph boundary portion {y1 = f(y')} with analytic f, df, Hessian. The
// factorization symbols need df and (flat) Laplacian of f pointwise.
class GraphBoundary {
 public:
  std::function<double(const TransPoint&)> f;
  std::function<std::array<double, 2>(const TransPoint&)> df;
  std::function<std::array<double, 4>(const TransPoint&)> hess;  // row-major
  int sign = +1;
  int tdim = 2;
  double df_sup_sq = 0.0;  // analytic sup |df|^2
  // transversal axes f depends on; empty means constant
  std::vector<int> depends_axes;

  double lap_f(const TransPoint& q) const {
    auto H = hess(q);
    return tdim == 1 ? H[0] : H[0] + H[3];
  }
  // coefficient F in the pushed-forward conjugated Laplacian
  double coeff_F(const TransPoint& q) const { return -0.5 * lap_f(q); }

  // inward unit normal (points toward increasing y1 for sign +)
  void normal(const TransPoint& q, double& nu1, std::array<double, 2>& nup) const;

  static GraphBoundary flat(double level, int tdim, int sign = +1);
  static GraphBoundary cosine(double amplitude, double level, int axis, int tdim,
                              int sign = +1);
};

void validate_graph_constants(const GraphBoundary& g, double c, double c_prime);

enum class Membership { inside, boundary, outside };

// Bounded domain: epigraph slab {f(y') < y1 < y1_top} within I x Omega0,
// Omega0 a metric ball in the cross-section.
class DomainSpec {
 public:
  DomainSpec(const CtaGeometry& geom, GraphBoundary bottom, double y1_top,
             std::array<double, 2> interval, TransPoint omega0_center,
             double omega0_radius, double collar_width);

  const GraphBoundary& bottom() const { return bottom_; }
  const GraphBoundary& top() const { return top_; }
  double y1_top() const { return y1_top_; }
  std::array<double, 2> interval() const { return interval_; }
  TransPoint omega0_center() const { return center_; }
  double omega0_radius() const { return radius_; }
  double collar_width() const { return collar_; }
  const CtaGeometry& geometry() const { return *geom_; }

  Membership membership(const Point& p, double tol) const;
  bool inside(const Point& p) const;

  std::vector<std::uint8_t> grid_mask(const Grid& g) const;
  // mask of the flattened domain {0 < x1 < y1_top - f(x')} in x-coordinates
  std::vector<std::uint8_t> flattened_mask(const Grid& g) const;
  // smooth weight equal to 1 deep inside the flattened domain, 0 within a
  // few cells of its boundary
  ComplexField flattened_interior_weight(const Grid& g, double edge) const;
  ComplexField interior_weight(const Grid& g, double edge) const;

 private:
  const CtaGeometry* geom_;
  GraphBoundary bottom_, top_;
  double y1_top_;
  std::array<double, 2> interval_;
  TransPoint center_;
  double radius_;
  double collar_;
};

// Change of variables (y1, y') -> (y1 - f(y'), y') and inverse.
Point flatten(const Point& p, const GraphBoundary& f);
Point unflatten(const Point& p, const GraphBoundary& f);

// Exact spectral shear of a grid field: per transversal column, translate
// along y1 by +shift(y') (to_y) or -shift(y') (to_x). Unitary on the cell.
class Shear {
 public:
  Shear(const Grid& g, const GraphBoundary& f);
  // field given in y-coordinates -> flattened x-coordinates
  ComplexField to_flat(const ComplexField& u) const;
  // flattened field -> y-coordinates
  ComplexField to_phys(const ComplexField& u) const;

 private:
  ComplexField apply(const ComplexField& u, double direction) const;
  const Grid* grid_;
  std::vector<double> shift_;  // f at each transversal node
};

// Boundary normal coordinates near a graph: s = signed geodesic distance to
// {y1 = f(y')} (inward positive), z' the foot point parameter.
struct NormalCoords {
  double s = 0.0;
  TransPoint zp;
};

NormalCoords boundary_normal_coords(const Point& z, const GraphBoundary& f,
                                    const TransversalManifold& m,
                                    double collar_width);

double signed_graph_distance(const Point& z, const GraphBoundary& f);

}  // namespace calderon
