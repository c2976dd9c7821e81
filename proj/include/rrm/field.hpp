#pragma once

#include <vector>

#include "rrm/basis.hpp"

namespace rrm {

/// Coefficient vector over a basis set, indexed by function id.
struct Coefficients {
  std::vector<double> values;

  double operator[](int id) const { return values[id]; }
  int size() const { return static_cast<int>(values.size()); }
};

/// A discrete function: one quadratic per active cell, all in the cell's
/// local frame. Per cell it equals the coefficient-weighted sum of the
/// covering basis restrictions, coefficientwise.
struct PiecewiseP2Field {
  std::vector<P2Poly> cell_polys;  // indexed by grid cell ordinal

  const P2Poly& on_ordinal(int ord) const { return cell_polys[ord]; }
};

inline PiecewiseP2Field field_from_coefficients(const TensorGrid& grid, const BasisSet& set,
                                                const Coefficients& coeffs) {
  if (coeffs.size() != set.size())
    throw Error("field_from_coefficients: coefficient count mismatch");
  PiecewiseP2Field field;
  field.cell_polys.reserve(grid.num_active());
  for (CellIndex c : grid.active_cells()) {
    P2Poly sum = P2Poly::zero(grid.cell_rect(c));
    for (const auto& [id, slot] : set.cover[grid.ordinal(c)])
      sum.axpy(coeffs[id], set.fns[id].cell_polys[slot]);
    field.cell_polys.push_back(sum);
  }
  return field;
}

/// Squared broken Sobolev seminorms (L2, H1, H2) of a discrete field,
/// Hessians in the Frobenius norm.
struct BrokenNorms {
  double l2 = 0, h1 = 0, h2 = 0;
};

inline BrokenNorms broken_norms(const TensorGrid& grid, const PiecewiseP2Field& field,
                                int quad_order = 3) {
  BrokenNorms n;
  for (CellIndex c : grid.active_cells()) {
    const P2Poly& p = field.on_ordinal(grid.ordinal(c));
    const Rect r = grid.cell_rect(c);
    const auto h = p.hessian();
    n.h2 += (h[0] * h[0] + 2 * h[1] * h[1] + h[2] * h[2]) * r.area();
    n.l2 += integrate(r, quad_order, [&](double x, double y) {
      const double v = p.value(x, y);
      return v * v;
    });
    n.h1 += integrate(r, quad_order, [&](double x, double y) {
      const auto g = p.gradient(x, y);
      return g[0] * g[0] + g[1] * g[1];
    });
  }
  return n;
}

}  // namespace rrm
