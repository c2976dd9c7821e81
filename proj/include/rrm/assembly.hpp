#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>

#include "rrm/field.hpp"

namespace rrm {

/// Sparse symmetric forms of the discrete problem in the interior basis:
/// A is the broken Hessian form, B the broken gradient form, F the load.
/// The system for perturbation parameter eps is (eps^2 A + B) c = F.
struct SparseSPDSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::SparseMatrix<double> B;
  Eigen::VectorXd F;
  int dim = 0;
};

/// Load vector alone, for reuse of A and B across right-hand sides.
inline Eigen::VectorXd assemble_load(const TensorGrid& grid, const BasisSet& interior_set,
                                     const ScalarFn& f, int quad_order_load = 6) {
  Eigen::VectorXd F = Eigen::VectorXd::Zero(interior_set.size());
  for (CellIndex c : grid.active_cells()) {
    const auto& covering = interior_set.cover[grid.ordinal(c)];
    if (covering.empty()) continue;
    const QuadRule qf = gauss_rect(grid.cell_rect(c), quad_order_load);
    std::vector<double> fv(qf.size());
    for (int k = 0; k < qf.size(); ++k) fv[k] = qf.w[k] * f(qf.x[k], qf.y[k]);
    for (const auto& [id, slot] : covering) {
      const P2Poly& p = interior_set.fns[id].cell_polys[slot];
      double load = 0;
      for (int k = 0; k < qf.size(); ++k) load += fv[k] * p.value(qf.x[k], qf.y[k]);
      F(id) += load;
    }
  }
  return F;
}

/// Assemble A, B, F over the active cells. The stiffness integrands are
/// quadratics, exact at tensor Gauss order 2; the load uses
/// `quad_order_load` points per direction.
inline SparseSPDSystem assemble(const TensorGrid& grid, const BasisSet& interior_set,
                                const ScalarFn& f, int quad_order_load = 6) {
  if (interior_set.kind != BasisSet::Kind::interior)
    throw Error("assemble: expected the interior basis set");
  if (interior_set.size() == 0) throw EmptySpace("assemble: empty basis");

  SparseSPDSystem sys;
  sys.dim = interior_set.size();
  std::vector<Eigen::Triplet<double>> ta, tb;

  for (CellIndex c : grid.active_cells()) {
    const auto& covering = interior_set.cover[grid.ordinal(c)];
    if (covering.empty()) continue;
    const Rect rect = grid.cell_rect(c);
    const QuadRule q2 = gauss_rect(rect, 2);

    for (std::size_t a = 0; a < covering.size(); ++a) {
      const auto& [ida, slota] = covering[a];
      const P2Poly& pa = interior_set.fns[ida].cell_polys[slota];
      const auto ha = pa.hessian();

      for (std::size_t b = 0; b < covering.size(); ++b) {
        const auto& [idb, slotb] = covering[b];
        const P2Poly& pb = interior_set.fns[idb].cell_polys[slotb];
        const auto hb = pb.hessian();
        const double aa = (ha[0] * hb[0] + 2 * ha[1] * hb[1] + ha[2] * hb[2]) * rect.area();
        double bb = 0;
        for (int k = 0; k < q2.size(); ++k) {
          const auto ga = pa.gradient(q2.x[k], q2.y[k]);
          const auto gb = pb.gradient(q2.x[k], q2.y[k]);
          bb += q2.w[k] * (ga[0] * gb[0] + ga[1] * gb[1]);
        }
        ta.emplace_back(ida, idb, aa);
        tb.emplace_back(ida, idb, bb);
      }
    }
  }
  sys.A.resize(sys.dim, sys.dim);
  sys.B.resize(sys.dim, sys.dim);
  sys.A.setFromTriplets(ta.begin(), ta.end());
  sys.B.setFromTriplets(tb.begin(), tb.end());
  sys.A.makeCompressed();
  sys.B.makeCompressed();
  sys.F = assemble_load(grid, interior_set, f, quad_order_load);
  return sys;
}

/// Solve (eps^2 A + B) c = F. Direct Cholesky with iterative refinement
/// first, conjugate gradients as fallback; the result must satisfy the
/// relative residual tolerance.
inline Coefficients solve(const SparseSPDSystem& sys, double eps, double tol = 1e-12) {
  if (eps < 0) throw Error("solve: eps must be nonnegative");
  const Eigen::SparseMatrix<double> M = eps * eps * sys.A + sys.B;
  const double fscale = std::max(sys.F.norm(), 1e-300);
  // Residual in extended precision; the refinement floor is otherwise set by
  // rounding in M*c, not by the factorization.
  auto residual = [&](const Eigen::VectorXd& c) {
    Eigen::VectorXd r(sys.dim);
    std::vector<long double> acc(sys.dim);
    for (int k = 0; k < sys.dim; ++k) acc[k] = sys.F(k);
    for (int col = 0; col < M.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(M, col); it; ++it)
        acc[it.row()] -= static_cast<long double>(it.value()) * static_cast<long double>(c(col));
    for (int k = 0; k < sys.dim; ++k) r(k) = static_cast<double>(acc[k]);
    return r;
  };
  // Acceptance threshold: tol * ||F|| when attainable, otherwise the
  // normwise backward-error scale tol * (||F|| + ||M|| ||c||), never looser
  // than 1e-10 * ||F||. Double-precision coefficients cannot push the
  // residual below roundoff(||M|| ||c||), which exceeds tol * ||F|| on the
  // finest grids where the Hessian form dominates the matrix norm.
  double mnorm = 0;
  {
    Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(sys.dim);
    for (int col = 0; col < M.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(M, col); it; ++it)
        rowsum(it.row()) += std::abs(it.value());
    mnorm = rowsum.maxCoeff();
  }
  auto within_tol = [&](const Eigen::VectorXd& c) {
    const double backward = tol * (fscale + mnorm * c.lpNorm<Eigen::Infinity>());
    const double threshold = std::max(tol * fscale, std::min(backward, 1e-10 * fscale));
    return residual(c).norm() <= threshold;
  };
  auto pack = [](const Eigen::VectorXd& c) {
    Coefficients out;
    out.values.assign(c.data(), c.data() + c.size());
    return out;
  };

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> direct(M);
  if (direct.info() == Eigen::Success) {
    Eigen::VectorXd c = direct.solve(sys.F);
    for (int step = 0; step < 6 && !within_tol(c); ++step) c += direct.solve(residual(c));
    if (within_tol(c)) return pack(c);
  }
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg(M);
  cg.setTolerance(0.1 * tol);
  cg.setMaxIterations(200 * sys.dim);
  Eigen::VectorXd c = cg.solve(sys.F);
  for (int step = 0; step < 6 && !within_tol(c); ++step) c += cg.solve(residual(c));
  if (!within_tol(c))
    throw SolveFailure("solve: neither direct nor iterative solver reached tolerance");
  return pack(c);
}

}  // namespace rrm
