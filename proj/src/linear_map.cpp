#include "calderon/linear_map.hpp"

namespace calderon {

LinearMap identity_map() {
  LinearMap m;
  m.label = "identity";
  m.apply = [](const ComplexField& u) { return u; };
  m.apply_adjoint = m.apply;
  return m;
}

LinearMap compose(LinearMap a, LinearMap b) {
  LinearMap m;
  m.label = a.label + "*" + b.label;
  auto fa = a.apply, fb = b.apply;
  m.apply = [fa, fb](const ComplexField& u) { return fa(fb(u)); };
  if (a.has_adjoint() && b.has_adjoint()) {
    auto ga = a.apply_adjoint, gb = b.apply_adjoint;
    m.apply_adjoint = [ga, gb](const ComplexField& u) { return gb(ga(u)); };
  }
  return m;
}

LinearMap map_sum(LinearMap a, LinearMap b) {
  LinearMap m;
  m.label = a.label + "+" + b.label;
  auto fa = a.apply, fb = b.apply;
  m.apply = [fa, fb](const ComplexField& u) { return fa(u) + fb(u); };
  if (a.has_adjoint() && b.has_adjoint()) {
    auto ga = a.apply_adjoint, gb = b.apply_adjoint;
    m.apply_adjoint = [ga, gb](const ComplexField& u) { return ga(u) + gb(u); };
  }
  return m;
}

LinearMap map_diff(LinearMap a, LinearMap b) {
  return map_sum(std::move(a), scaled_map(-1.0, std::move(b)));
}

LinearMap scaled_map(cplx s, LinearMap a) {
  LinearMap m;
  m.label = a.label;
  auto fa = a.apply;
  m.apply = [fa, s](const ComplexField& u) {
    ComplexField w = fa(u);
    w *= s;
    return w;
  };
  if (a.has_adjoint()) {
    auto ga = a.apply_adjoint;
    cplx sc = std::conj(s);
    m.apply_adjoint = [ga, sc](const ComplexField& u) {
      ComplexField w = ga(u);
      w *= sc;
      return w;
    };
  }
  return m;
}

LinearMap pointwise_map(ComplexField V, std::string label) {
  LinearMap m;
  m.label = std::move(label);
  auto Vp = std::make_shared<ComplexField>(std::move(V));
  m.apply = [Vp](const ComplexField& u) { return pointwise(*Vp, u); };
  m.apply_adjoint = [Vp](const ComplexField& u) {
    ComplexField w(*u.grid);
    for (std::size_t i = 0; i < u.size(); ++i)
      w[i] = std::conj((*Vp)[i]) * u[i];
    return w;
  };
  return m;
}

LinearMap mask_map(std::vector<std::uint8_t> mask, std::string label) {
  LinearMap m;
  m.label = std::move(label);
  auto mp = std::make_shared<std::vector<std::uint8_t>>(std::move(mask));
  auto f = [mp](const ComplexField& u) {
    ComplexField w = u;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (!(*mp)[i]) w[i] = 0.0;
    return w;
  };
  m.apply = f;
  m.apply_adjoint = f;
  return m;
}

LinearMap multiplier_map(const Grid& g,
                         std::function<cplx(const std::vector<int>&)> m,
                         std::string label) {
  LinearMap out;
  out.label = std::move(label);
  auto mp = std::make_shared<std::function<cplx(const std::vector<int>&)>>(
      std::move(m));
  out.apply = [mp](const ComplexField& u) {
    return spectral_multiplier(u, *mp);
  };
  out.apply_adjoint = [mp](const ComplexField& u) {
    return spectral_multiplier(u, [mp](const std::vector<int>& k) {
      return std::conj((*mp)(k));
    });
  };
  return out;
}

LinearMap profile1_map(const Grid& g, const std::function<double(double)>& prof,
                       std::string label) {
  std::vector<double> vals(g.dim(0));
  for (int j = 0; j < g.dim(0); ++j) vals[j] = prof(g.coord(0, j));
  LinearMap m;
  m.label = std::move(label);
  std::size_t cols = g.size() / g.dim(0);
  auto f = [vals, cols](const ComplexField& u) {
    ComplexField w = u;
    for (std::size_t j = 0; j < vals.size(); ++j) {
      double p = vals[j];
      for (std::size_t c = 0; c < cols; ++c) w[j * cols + c] *= p;
    }
    return w;
  };
  m.apply = f;
  m.apply_adjoint = f;
  return m;
}

LinearMap mplus_mask(const Grid& g) {
  std::vector<std::uint8_t> mask(g.size(), 0);
  std::size_t cols = g.size() / g.dim(0);
  for (int j = 0; j < g.dim(0); ++j) {
    if (g.coord(0, j) > 0)
      std::fill_n(mask.begin() + j * cols, cols, std::uint8_t{1});
  }
  return mask_map(std::move(mask), "1_{M+}");
}

}  // namespace calderon
