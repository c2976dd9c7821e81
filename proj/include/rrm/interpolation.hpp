#pragma once

#include <array>

#include "rrm/field.hpp"

namespace rrm {

/// Five-cell averaging stencil of the quasi-interpolation functional
/// lambda_K(v) = sum_mu w_mu * mean_{S_mu}(v) with S = (left, right, below,
/// above, center). The weights satisfy lambda_K(p) = t_K(p) for every
/// quadratic p; combined with the basis identities this reproduces P2.
struct FiveCellStencil {
  std::array<CellIndex, 5> cells{};
  std::array<Rect, 5> rects{};
  std::array<double, 5> weights{};
};

inline FiveCellStencil stencil(const Patch3x3& patch) {
  const double Lm = patch.lengths[0], L = patch.lengths[1], Lp = patch.lengths[2];
  const double Hm = patch.heights[0], H = patch.heights[1], Hp = patch.heights[2];
  FiveCellStencil s;
  s.cells = {patch.cell_at(0, 1), patch.cell_at(2, 1), patch.cell_at(1, 0), patch.cell_at(1, 2),
             patch.cell_at(1, 1)};
  s.rects = {patch.cell_rect(0, 1), patch.cell_rect(2, 1), patch.cell_rect(1, 0),
             patch.cell_rect(1, 2), patch.cell_rect(1, 1)};
  s.weights[0] = -L * L / ((Lm + L) * (Lm + L + Lp));
  s.weights[1] = -L * L / ((L + Lp) * (Lm + L + Lp));
  s.weights[2] = -H * H / ((Hm + H) * (Hm + H + Hp));
  s.weights[3] = -H * H / ((H + Hp) * (Hm + H + Hp));
  s.weights[4] = 1.0 - (s.weights[0] + s.weights[1] + s.weights[2] + s.weights[3]);
  return s;
}

/// The functional lambda_K applied to an arbitrary field, cell means by
/// tensor Gauss quadrature.
inline double stencil_apply(const FiveCellStencil& s, const ScalarFn& v, int quad_order) {
  double lambda = 0;
  for (int mu = 0; mu < 5; ++mu) {
    const double mean = integrate(s.rects[mu], quad_order, v) / s.rects[mu].area();
    lambda += s.weights[mu] * mean;
  }
  return lambda;
}

struct Interpolant {
  Coefficients coeffs;
  PiecewiseP2Field field;
};

namespace detail {

inline Interpolant interpolate(const TensorGrid& grid, const BasisSet& set, const ScalarFn& v,
                               int quad_order) {
  Interpolant out;
  out.coeffs.values.reserve(set.size());
  for (const PatchBasisFn& fn : set.fns)
    out.coeffs.values.push_back(stencil_apply(stencil(fn.patch), v, quad_order));
  out.field = field_from_coefficients(grid, set, out.coeffs);
  return out;
}

}  // namespace detail

/// Quasi-interpolation onto the homogeneous space. All stencil cells of
/// interior centers lie in the domain, so v only needs to be defined on it.
inline Interpolant interpolate_h0(const TensorGrid& grid, const BasisSet& interior_set,
                                  const ScalarFn& v, int quad_order = 6) {
  if (interior_set.kind != BasisSet::Kind::interior)
    throw Error("interpolate_h0: expected the interior basis set");
  return detail::interpolate(grid, interior_set, v, quad_order);
}

/// Quasi-interpolation onto the extended space. Stencils of boundary and
/// expansion centers reach ghost cells, so v must be evaluable there
/// (a globally defined expression).
inline Interpolant interpolate_extended(const TensorGrid& grid, const BasisSet& extended_set,
                                        const ScalarFn& v, int quad_order = 6) {
  if (extended_set.kind != BasisSet::Kind::extended)
    throw Error("interpolate_extended: expected the extended basis set");
  return detail::interpolate(grid, extended_set, v, quad_order);
}

}  // namespace rrm
