#pragma once

#include <cmath>
#include <iomanip>
#include <ostream>
#include <span>
#include <vector>

#include "rrm/assembly.hpp"
#include "rrm/interpolation.hpp"

namespace rrm {

/// Closed-form reference field with derivatives up to second order.
struct ExactField {
  ScalarFn value;
  std::function<std::array<double, 2>(double, double)> grad;
  std::function<std::array<double, 3>(double, double)> hess;  // xx, xy, yy
};

/// Manufactured-solution setups of the convergence studies.
///   1: unit square, u = (sin(pi x) sin(pi y))^2, f = eps^2 Lap^2 u - Lap u
///   2: L-shape (0,2)^2 \ [1,2]^2, same u and f
///   3: unit square, f = 2 pi^2 sin(pi x) sin(pi y); the reference is the
///      solution u0 = sin(pi x) sin(pi y) of the limit problem -Lap u0 = f.
struct ExampleSpec {
  int id = 1;
  DomainKind domain = DomainKind::square;
  ExactField exact;
  std::function<ScalarFn(double eps)> rhs;
};

inline ExampleSpec example(int id) {
  const double pi = M_PI;
  ExampleSpec ex;
  ex.id = id;
  switch (id) {
    case 1:
    case 2: {
      ex.domain = id == 1 ? DomainKind::square : DomainKind::lshape;
      // u = (1 - C)(1 - D)/4 with C = cos(2 pi x), D = cos(2 pi y)
      ex.exact.value = [pi](double x, double y) {
        const double sx = std::sin(pi * x), sy = std::sin(pi * y);
        return sx * sx * sy * sy;
      };
      ex.exact.grad = [pi](double x, double y) -> std::array<double, 2> {
        const double C = std::cos(2 * pi * x), D = std::cos(2 * pi * y);
        return {0.5 * pi * std::sin(2 * pi * x) * (1 - D),
                0.5 * pi * (1 - C) * std::sin(2 * pi * y)};
      };
      ex.exact.hess = [pi](double x, double y) -> std::array<double, 3> {
        const double C = std::cos(2 * pi * x), D = std::cos(2 * pi * y);
        return {pi * pi * C * (1 - D), pi * pi * std::sin(2 * pi * x) * std::sin(2 * pi * y),
                pi * pi * D * (1 - C)};
      };
      ex.rhs = [pi](double eps) -> ScalarFn {
        return [pi, eps](double x, double y) {
          const double C = std::cos(2 * pi * x), D = std::cos(2 * pi * y);
          const double bilap = 4 * pi * pi * pi * pi * (-C - D + 4 * C * D);
          const double lap = pi * pi * (C + D - 2 * C * D);
          return eps * eps * bilap - lap;
        };
      };
      break;
    }
    case 3: {
      ex.domain = DomainKind::square;
      ex.exact.value = [pi](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
      ex.exact.grad = [pi](double x, double y) -> std::array<double, 2> {
        return {pi * std::cos(pi * x) * std::sin(pi * y),
                pi * std::sin(pi * x) * std::cos(pi * y)};
      };
      ex.exact.hess = [pi](double x, double y) -> std::array<double, 3> {
        const double s = std::sin(pi * x) * std::sin(pi * y);
        return {-pi * pi * s, pi * pi * std::cos(pi * x) * std::cos(pi * y), -pi * pi * s};
      };
      ex.rhs = [pi](double) -> ScalarFn {
        return [pi](double x, double y) {
          return 2 * pi * pi * std::sin(pi * x) * std::sin(pi * y);
        };
      };
      break;
    }
    default:
      throw Error("example: id must be 1, 2, or 3");
  }
  return ex;
}

/// One row of a convergence table. The energy norm combines the broken
/// seminorms as |||w|||^2 = eps^2 |w|_{2,h}^2 + |w|_{1,h}^2; errors are
/// relative against the reference measured the same way.
struct ConvergenceRow {
  double eps = 0;
  double h = 0;
  double rel_energy = 0;
  double rel_h1 = 0;
  double rel_h2 = 0;
  double rel_l2 = 0;
};

inline ConvergenceRow energy_error(const TensorGrid& grid, const PiecewiseP2Field& field,
                                   const ExactField& exact, double eps, int quad_order = 10) {
  double e_l2 = 0, e_h1 = 0, e_h2 = 0;
  double r_l2 = 0, r_h1 = 0, r_h2 = 0;
  for (CellIndex c : grid.active_cells()) {
    const Rect rect = grid.cell_rect(c);
    const P2Poly& p = field.on_ordinal(grid.ordinal(c));
    const auto ph = p.hessian();
    const QuadRule q = gauss_rect(rect, quad_order);
    for (int k = 0; k < q.size(); ++k) {
      const double x = q.x[k], y = q.y[k], w = q.w[k];
      const double uv = exact.value(x, y);
      const auto ug = exact.grad(x, y);
      const auto uh = exact.hess(x, y);
      const double dv = uv - p.value(x, y);
      const auto pg = p.gradient(x, y);
      const double dgx = ug[0] - pg[0], dgy = ug[1] - pg[1];
      const double dxx = uh[0] - ph[0], dxy = uh[1] - ph[1], dyy = uh[2] - ph[2];
      e_l2 += w * dv * dv;
      e_h1 += w * (dgx * dgx + dgy * dgy);
      e_h2 += w * (dxx * dxx + 2 * dxy * dxy + dyy * dyy);
      r_l2 += w * uv * uv;
      r_h1 += w * (ug[0] * ug[0] + ug[1] * ug[1]);
      r_h2 += w * (uh[0] * uh[0] + 2 * uh[1] * uh[1] + uh[2] * uh[2]);
    }
  }
  ConvergenceRow row;
  row.eps = eps;
  row.h = grid.mesh_size();
  row.rel_energy = std::sqrt((eps * eps * e_h2 + e_h1) / (eps * eps * r_h2 + r_h1));
  row.rel_h1 = std::sqrt(e_h1 / r_h1);
  row.rel_h2 = std::sqrt(e_h2 / r_h2);
  row.rel_l2 = std::sqrt(e_l2 / r_l2);
  return row;
}

/// Least-squares slope of log(error) against log(h).
inline double rate_fit(std::span<const double> errors, std::span<const double> hs) {
  if (errors.size() != hs.size() || errors.size() < 2)
    throw Error("rate_fit: need at least two matching rows");
  const int n = static_cast<int>(errors.size());
  double mx = 0, my = 0;
  std::vector<double> lx(n), ly(n);
  for (int k = 0; k < n; ++k) {
    if (!(errors[k] > 0) || !(hs[k] > 0)) throw Error("rate_fit: values must be positive");
    lx[k] = std::log(hs[k]);
    ly[k] = std::log(errors[k]);
    mx += lx[k];
    my += ly[k];
  }
  mx /= n;
  my /= n;
  double num = 0, den = 0;
  for (int k = 0; k < n; ++k) {
    num += (lx[k] - mx) * (ly[k] - my);
    den += (lx[k] - mx) * (lx[k] - mx);
  }
  return num / den;
}

enum class MeshKind { uniform, pattern };

/// Grid of one study run. Uniform levels give h = 2^-level (Examples 1, 3 on
/// the unit square; Example 2 with 2^level cells per unit length); pattern
/// levels give h = max(ratio, 1-ratio) * 2^-level.
inline TensorGrid study_grid(int example_id, MeshKind kind, int level, double ratio = 0.65) {
  const bool lshape = example_id == 2;
  if (kind == MeshKind::uniform) {
    const int n = 1 << level;
    return lshape ? build_lshape(n, LshapeKind::uniform) : build_uniform({0, 0, 1, 1}, n);
  }
  return lshape ? build_lshape(level, LshapeKind::pattern, ratio) : build_pattern(level, ratio);
}

struct RateRow {
  double eps = 0;
  double energy = 0, h1 = 0, h2 = 0, l2 = 0;
};

struct ConvergenceStudy {
  int example_id = 1;
  MeshKind mesh = MeshKind::uniform;
  double ratio = 0.65;
  std::vector<double> eps;
  std::vector<int> levels;
  std::vector<std::vector<ConvergenceRow>> rows;  // [eps index][level index]
  std::vector<RateRow> rates;
};

/// Run the scheme over the (eps, level) lattice and fit rates per eps.
/// The forms A and B are assembled once per level; only the load depends
/// on eps.
inline ConvergenceStudy run_convergence(int example_id, MeshKind mesh,
                                        std::vector<double> eps_list, std::vector<int> levels,
                                        double ratio = 0.65) {
  const ExampleSpec ex = example(example_id);
  ConvergenceStudy study;
  study.example_id = example_id;
  study.mesh = mesh;
  study.ratio = ratio;
  study.eps = std::move(eps_list);
  study.levels = std::move(levels);
  study.rows.assign(study.eps.size(), {});

  for (int level : study.levels) {
    const TensorGrid grid = study_grid(example_id, mesh, level, ratio);
    const Classification cls = classify(grid);
    const BasisSet basis = build_interior_set(grid, cls);
    const SparseSPDSystem base = assemble(grid, basis, [](double, double) { return 0.0; }, 2);
    for (std::size_t e = 0; e < study.eps.size(); ++e) {
      const double eps = study.eps[e];
      SparseSPDSystem sys;
      sys.A = base.A;
      sys.B = base.B;
      sys.dim = base.dim;
      sys.F = assemble_load(grid, basis, ex.rhs(eps));
      const Coefficients c = solve(sys, eps);
      const PiecewiseP2Field uh = field_from_coefficients(grid, basis, c);
      study.rows[e].push_back(energy_error(grid, uh, ex.exact, eps));
    }
  }
  if (study.levels.size() < 2) return study;  // no rates from a single level
  for (std::size_t e = 0; e < study.eps.size(); ++e) {
    const auto& r = study.rows[e];
    std::vector<double> hs, en, h1, h2, l2;
    for (const ConvergenceRow& row : r) {
      hs.push_back(row.h);
      en.push_back(row.rel_energy);
      h1.push_back(row.rel_h1);
      h2.push_back(row.rel_h2);
      l2.push_back(row.rel_l2);
    }
    RateRow rr;
    rr.eps = study.eps[e];
    rr.energy = rate_fit(en, hs);
    rr.h1 = rate_fit(h1, hs);
    rr.h2 = rate_fit(h2, hs);
    rr.l2 = rate_fit(l2, hs);
    study.rates.push_back(rr);
  }
  return study;
}

/// CSV emission: header row, one row per (eps, level), then one trailing
/// rate line per eps with the literal marker `rate` in the h column.
inline void write_csv(std::ostream& os, const ConvergenceStudy& study) {
  os << "eps,h,rel_energy,rel_h1,rel_h2,rel_l2\n";
  os << std::setprecision(12);
  for (std::size_t e = 0; e < study.eps.size(); ++e)
    for (const ConvergenceRow& row : study.rows[e])
      os << row.eps << ',' << row.h << ',' << row.rel_energy << ',' << row.rel_h1 << ','
         << row.rel_h2 << ',' << row.rel_l2 << '\n';
  for (const RateRow& rr : study.rates)
    os << rr.eps << ",rate," << rr.energy << ',' << rr.h1 << ',' << rr.h2 << ',' << rr.l2
       << '\n';
}

}  // namespace rrm
