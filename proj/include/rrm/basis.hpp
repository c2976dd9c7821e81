#pragma once

#include <array>
#include <unordered_map>
#include <vector>

#include "rrm/mesh.hpp"
#include "rrm/polynomial.hpp"

namespace rrm {

/// One patch basis function: a piecewise quadratic supported on a 3x3 patch,
/// stored as one P2Poly per patch cell (ghost cells included; restriction to
/// the domain is the subset of active cells).
struct PatchBasisFn {
  CellIndex center;
  Patch3x3 patch;
  double anchor_value = 0;          // value at the lower-left interior patch vertex
  std::array<P2Poly, 9> cell_polys; // slot = a + 3*b for patch cell (a, b)

  const P2Poly& poly(int a, int b) const { return cell_polys[a + 3 * b]; }
};

/// Build the patch function from its closed-form vertex values and edge
/// normal-derivative means. With Lm, L, Lp the patch column widths and
/// Hm, H, Hp the row heights, the interior values are tensor products of
///   gx = (1 + L/Lm) / (1 + L/Lp),   gy = (1 + H/Hm) / (1 + H/Hp)
/// scaled by the anchor Lm/(Lm+L) * Hm/(Hm+H); all patch-boundary dofs
/// vanish, which makes the function compactly supported.
inline PatchBasisFn build_phi(const Patch3x3& patch) {
  const double Lm = patch.lengths[0], L = patch.lengths[1], Lp = patch.lengths[2];
  const double Hm = patch.heights[0], H = patch.heights[1], Hp = patch.heights[2];
  const double gx = (1 + L / Lm) / (1 + L / Lp);
  const double gy = (1 + H / Hm) / (1 + H / Hp);
  const double anchor = Lm / (Lm + L) * Hm / (Hm + H);

  // v[m][n]: values at interior vertices (m, n in 1..2);
  // u[m][n]: d/dy at midpoints of horizontal interior edges (column m, line n);
  // z[m][n]: d/dx at midpoints of vertical interior edges (line m, row n).
  double v[4][4] = {}, u[4][4] = {}, z[4][4] = {};
  v[1][1] = anchor;
  v[2][1] = gx * anchor;
  v[1][2] = gy * anchor;
  v[2][2] = gx * gy * anchor;
  const std::array<double, 3> rx{1, 1 + gx, gx};
  const std::array<double, 3> ry{1, 1 + gy, gy};
  for (int m = 1; m <= 3; ++m) {
    u[m][1] = rx[m - 1] / Hm * anchor;
    u[m][2] = -gy * rx[m - 1] / Hp * anchor;
  }
  for (int n = 1; n <= 3; ++n) {
    z[1][n] = ry[n - 1] / Lm * anchor;
    z[2][n] = -gx * ry[n - 1] / Lp * anchor;
  }

  PatchBasisFn fn;
  fn.center = patch.center;
  fn.patch = patch;
  fn.anchor_value = anchor;
  for (int b = 0; b < 3; ++b)
    for (int a = 0; a < 3; ++a) {
      MorleyDofs dofs;
      auto vv = [&](int m, int n) {
        return (m >= 1 && m <= 2 && n >= 1 && n <= 2) ? v[m][n] : 0.0;
      };
      dofs.vertex_values = {vv(a, b), vv(a + 1, b), vv(a, b + 1), vv(a + 1, b + 1)};
      const double ub = (b >= 1 && b <= 2) ? u[a + 1][b] : 0.0;
      const double ut = (b + 1 <= 2) ? u[a + 1][b + 1] : 0.0;
      const double zl = (a >= 1 && a <= 2) ? z[a][b + 1] : 0.0;
      const double zr = (a + 1 <= 2) ? z[a + 1][b + 1] : 0.0;
      dofs.edge_normal_means = {-ub, ut, -zl, zr};
      fn.cell_polys[a + 3 * b] = fit_p2_from_morley(patch.cell_rect(a, b), dofs).poly;
    }
  return fn;
}

/// A set of patch basis functions with center-index lookup and per-cell
/// coverage lists. The interior kind spans the homogeneous space (one
/// function per interior cell); the extended kind adds the boundary and
/// exterior-expansion patches so that every active cell is covered by
/// exactly nine functions.
struct BasisSet {
  enum class Kind { interior, extended };

  Kind kind = Kind::interior;
  std::vector<PatchBasisFn> fns;
  std::unordered_map<CellIndex, int, CellIndexHash> index_of;
  std::vector<int> checkerboard;  // +-1 per function, lattice parity of the center

  /// cover[grid ordinal of T] = (function id, patch slot of T) pairs.
  std::vector<std::vector<std::pair<int, int>>> cover;

  int size() const { return static_cast<int>(fns.size()); }

  const P2Poly* poly_on(int fn_id, CellIndex cell) const {
    const PatchBasisFn& f = fns[fn_id];
    const int a = cell.i - f.center.i + 1, b = cell.j - f.center.j + 1;
    if (a < 0 || a > 2 || b < 0 || b > 2) return nullptr;
    return &f.cell_polys[a + 3 * b];
  }
};

namespace detail {

inline BasisSet build_set(const TensorGrid& grid, const Classification& cls,
                          std::vector<CellIndex> centers, BasisSet::Kind kind) {
  BasisSet set;
  set.kind = kind;
  set.fns.reserve(centers.size());
  for (CellIndex c : centers) {
    set.index_of.emplace(c, static_cast<int>(set.fns.size()));
    set.checkerboard.push_back(parity_sign(c));
    set.fns.push_back(build_phi(make_patch(grid, cls, c)));
  }
  set.cover.assign(grid.num_active(), {});
  for (int id = 0; id < set.size(); ++id)
    for (int b = 0; b < 3; ++b)
      for (int a = 0; a < 3; ++a) {
        const int ord = grid.ordinal(set.fns[id].patch.cell_at(a, b));
        if (ord >= 0) set.cover[ord].emplace_back(id, a + 3 * b);
      }
  return set;
}

}  // namespace detail

/// Basis of the homogeneous space: one function per interior cell.
inline BasisSet build_interior_set(const TensorGrid& grid, const Classification& cls) {
  if (cls.interior_cells.empty())
    throw EmptySpace("build_interior_set: grid has no interior cells");
  return detail::build_set(grid, cls, cls.interior_cells, BasisSet::Kind::interior);
}

/// Extended basis: interior, boundary, and exterior-expansion patches.
inline BasisSet build_extended_set(const TensorGrid& grid, const Classification& cls) {
  std::vector<CellIndex> centers = cls.interior_cells;
  centers.insert(centers.end(), cls.boundary_cells.begin(), cls.boundary_cells.end());
  centers.insert(centers.end(), cls.expansion_cells.begin(), cls.expansion_cells.end());
  std::sort(centers.begin(), centers.end());
  return detail::build_set(grid, cls, std::move(centers), BasisSet::Kind::extended);
}

/// Max-norm residuals of the reproduction identities of the extended set,
/// sampled on a 5x5 grid per active cell.
///
/// With c_T the cell barycenter and L_T, H_T the cell extents, the extended
/// set reproduces
///   - any bilinear v from the coefficients v(c_T) and from the cell means,
///   - any quadratic v from r_T(v) = v(c_T) - (L_T^2 v_xx + H_T^2 v_yy)/8
///     and from t_T(v) = mean_T(v) - (L_T^2 v_xx + H_T^2 v_yy)/6,
/// and the area-weighted checkerboard combination vanishes identically.
struct IdentityReport {
  double q1_center = 0;
  double q1_mean = 0;
  double p2_r = 0;
  double p2_t = 0;
  double checkerboard = 0;

  double max_all() const {
    return std::max({q1_center, q1_mean, p2_r, p2_t, checkerboard});
  }
};

namespace detail {

struct Monomial {
  const char* name;
  double vxx, vyy;  // constant second derivatives d2/dx2, d2/dy2
  bool quadratic;   // outside Q1
  double (*value)(double, double);
  double (*mean)(const Rect&);
};

inline const std::array<Monomial, 6>& identity_monomials() {
  static const std::array<Monomial, 6> ms{{
      {"1", 0, 0, false, [](double, double) { return 1.0; },
       [](const Rect&) { return 1.0; }},
      {"x", 0, 0, false, [](double x, double) { return x; },
       [](const Rect& r) { return r.xc(); }},
      {"y", 0, 0, false, [](double, double y) { return y; },
       [](const Rect& r) { return r.yc(); }},
      {"xy", 0, 0, false, [](double x, double y) { return x * y; },
       [](const Rect& r) { return r.xc() * r.yc(); }},
      {"x2", 2, 0, true, [](double x, double) { return x * x; },
       [](const Rect& r) { return r.xc() * r.xc() + r.width() * r.width() / 12.0; }},
      {"y2", 0, 2, true, [](double, double y) { return y * y; },
       [](const Rect& r) { return r.yc() * r.yc() + r.height() * r.height() / 12.0; }},
  }};
  return ms;
}

}  // namespace detail

inline IdentityReport verify_identities(const TensorGrid& grid, const BasisSet& set) {
  IdentityReport rep;
  const auto& monomials = detail::identity_monomials();
  for (CellIndex T : grid.active_cells()) {
    const Rect rect = grid.cell_rect(T);
    const auto& covering = set.cover[grid.ordinal(T)];

    struct Covering {
      const P2Poly* poly;
      double signed_area;                      // d_K * L_K * H_K
      std::array<std::array<double, 4>, 6> coeff;  // per monomial: center, mean, r, t
    };
    std::vector<Covering> cov;
    cov.reserve(covering.size());
    for (const auto& [id, slot] : covering) {
      const PatchBasisFn& fn = set.fns[id];
      const Rect cK = grid.cell_rect(fn.center);
      Covering cv;
      cv.poly = &fn.cell_polys[slot];
      cv.signed_area = set.checkerboard[id] * cK.area();
      for (std::size_t m = 0; m < monomials.size(); ++m) {
        const auto& mono = monomials[m];
        const double curv =
            cK.width() * cK.width() * mono.vxx + cK.height() * cK.height() * mono.vyy;
        const double vc = mono.value(cK.xc(), cK.yc());
        const double vm = mono.mean(cK);
        cv.coeff[m] = {vc, vm, vc - curv / 8.0, vm - curv / 6.0};
      }
      cov.push_back(cv);
    }

    for (int sy = 0; sy < 5; ++sy)
      for (int sx = 0; sx < 5; ++sx) {
        const double x = rect.x0 + rect.width() * sx / 4.0;
        const double y = rect.y0 + rect.height() * sy / 4.0;
        double chk = 0;
        std::array<std::array<double, 4>, 6> sums{};
        for (const Covering& cv : cov) {
          const double phi = cv.poly->value(x, y);
          chk += cv.signed_area * phi;
          for (std::size_t m = 0; m < monomials.size(); ++m)
            for (int variant = 0; variant < 4; ++variant)
              sums[m][variant] += cv.coeff[m][variant] * phi;
        }
        rep.checkerboard = std::max(rep.checkerboard, std::abs(chk));
        for (std::size_t m = 0; m < monomials.size(); ++m) {
          const double exact = monomials[m].value(x, y);
          if (!monomials[m].quadratic) {
            rep.q1_center = std::max(rep.q1_center, std::abs(sums[m][0] - exact));
            rep.q1_mean = std::max(rep.q1_mean, std::abs(sums[m][1] - exact));
          }
          rep.p2_r = std::max(rep.p2_r, std::abs(sums[m][2] - exact));
          rep.p2_t = std::max(rep.p2_t, std::abs(sums[m][3] - exact));
        }
      }
  }
  return rep;
}

}  // namespace rrm
