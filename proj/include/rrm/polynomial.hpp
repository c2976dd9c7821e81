#pragma once

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include <Eigen/Dense>

#include "rrm/common.hpp"

namespace rrm {

/// Quadratic polynomial in local coordinates xi = (x - xc)/scale,
/// eta = (y - yc)/scale anchored at a cell barycenter. The local frame keeps
/// the fit conditioning independent of the mesh size.
struct P2Poly {
  double xc = 0, yc = 0, scale = 1;
  std::array<double, 6> c{};  // 1, xi, eta, xi^2, xi*eta, eta^2

  static P2Poly zero(const Rect& cell) {
    return {cell.xc(), cell.yc(), cell.size(), {}};
  }

  double value(double x, double y) const {
    const double xi = (x - xc) / scale, eta = (y - yc) / scale;
    return c[0] + c[1] * xi + c[2] * eta + c[3] * xi * xi + c[4] * xi * eta + c[5] * eta * eta;
  }

  /// (d/dx, d/dy)
  std::array<double, 2> gradient(double x, double y) const {
    const double xi = (x - xc) / scale, eta = (y - yc) / scale;
    return {(c[1] + 2 * c[3] * xi + c[4] * eta) / scale,
            (c[2] + c[4] * xi + 2 * c[5] * eta) / scale};
  }

  /// Constant Hessian (d2/dx2, d2/dxdy, d2/dy2).
  std::array<double, 3> hessian() const {
    const double s2 = scale * scale;
    return {2 * c[3] / s2, c[4] / s2, 2 * c[5] / s2};
  }

  P2Poly& operator+=(const P2Poly& o) {
    for (int k = 0; k < 6; ++k) c[k] += o.c[k];
    return *this;
  }
  P2Poly& axpy(double a, const P2Poly& o) {
    for (int k = 0; k < 6; ++k) c[k] += a * o.c[k];
    return *this;
  }
};

/// Tensor quadrature on a rectangle.
struct QuadRule {
  std::vector<double> x, y, w;
  int size() const { return static_cast<int>(w.size()); }
};

namespace detail {

/// Gauss-Legendre nodes/weights on [-1, 1], Newton iteration on P_n.
inline const std::vector<std::pair<double, double>>& gauss_legendre(int n) {
  static std::map<int, std::vector<std::pair<double, double>>> cache;
  static std::mutex mtx;
  std::scoped_lock lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<std::pair<double, double>> nw(n);
  for (int k = 0; k < (n + 1) / 2; ++k) {
    double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int m = 2; m <= n; ++m) {
        const double p2 = ((2 * m - 1) * x * p1 - (m - 1) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nw[k] = {-x, w};
    nw[n - 1 - k] = {x, w};
  }
  if (n % 2 == 1) nw[n / 2].first = 0.0;
  return cache.emplace(n, std::move(nw)).first->second;
}

}  // namespace detail

/// Tensor Gauss-Legendre rule with n points per direction; exact for
/// Q_{2n-1} on the rectangle.
inline QuadRule gauss_rect(const Rect& cell, int n) {
  if (n < 1) throw Error("gauss_rect: order must be positive");
  const auto& nw = detail::gauss_legendre(n);
  QuadRule q;
  q.x.reserve(n * n);
  q.y.reserve(n * n);
  q.w.reserve(n * n);
  const double jac = 0.25 * cell.area();
  for (const auto& [tx, wx] : nw)
    for (const auto& [ty, wy] : nw) {
      q.x.push_back(cell.xc() + 0.5 * cell.width() * tx);
      q.y.push_back(cell.yc() + 0.5 * cell.height() * ty);
      q.w.push_back(jac * wx * wy);
    }
  return q;
}

template <class F>
double integrate(const Rect& cell, int order, F&& f) {
  const QuadRule q = gauss_rect(cell, order);
  double s = 0;
  for (int k = 0; k < q.size(); ++k) s += q.w[k] * f(q.x[k], q.y[k]);
  return s;
}

/// Rectangular Morley degrees of freedom of a cell: the four vertex values
/// and the four mean outward-normal derivatives over the edges.
/// Vertex order: LL, LR, UL, UR. Edge order: bottom, top, left, right.
struct MorleyDofs {
  std::array<double, 4> vertex_values{};
  std::array<double, 4> edge_normal_means{};
};

struct P2Fit {
  P2Poly poly;
  double residual = 0;  // least-squares residual of the 8x6 system
};

/// The unique quadratic with the given Morley dofs. The system is
/// overdetermined (8 conditions, 6 coefficients); the residual of the normal
/// equations doubles as an integrity check on the dof source.
inline P2Fit fit_p2_from_morley(const Rect& cell, const MorleyDofs& dofs, double tol = 1e-9) {
  const double ell = cell.size();
  const double a = cell.width() / (2 * ell), b = cell.height() / (2 * ell);
  Eigen::Matrix<double, 8, 6> M = Eigen::Matrix<double, 8, 6>::Zero();
  Eigen::Matrix<double, 8, 1> d;
  const std::array<std::array<double, 2>, 4> corners{{{-a, -b}, {a, -b}, {-a, b}, {a, b}}};
  for (int k = 0; k < 4; ++k) {
    const auto [xi, eta] = corners[k];
    M.row(k) << 1, xi, eta, xi * xi, xi * eta, eta * eta;
    d(k) = dofs.vertex_values[k];
  }
  // Mean normal derivative rows, scaled by ell so all rows are O(1).
  // The mean of the (affine) derivative over an edge is its midpoint value.
  M.row(4) << 0, 0, -1, 0, 0, 2 * b;   // bottom, outward -y
  M.row(5) << 0, 0, 1, 0, 0, 2 * b;    // top, outward +y
  M.row(6) << 0, -1, 0, 2 * a, 0, 0;   // left, outward -x
  M.row(7) << 0, 1, 0, 2 * a, 0, 0;    // right, outward +x
  for (int k = 0; k < 4; ++k) d(4 + k) = dofs.edge_normal_means[k] * ell;

  const Eigen::Matrix<double, 6, 6> N = M.transpose() * M;
  const Eigen::Matrix<double, 6, 1> rhs = M.transpose() * d;
  const Eigen::Matrix<double, 6, 1> c = N.ldlt().solve(rhs);
  const double residual = (M * c - d).norm();
  if (residual > tol * std::max(1.0, d.norm()))
    throw InconsistentDofs("fit_p2_from_morley: dofs admit no quadratic (residual " +
                           std::to_string(residual) + ")");
  P2Fit fit;
  fit.poly.xc = cell.xc();
  fit.poly.yc = cell.yc();
  fit.poly.scale = ell;
  for (int k = 0; k < 6; ++k) fit.poly.c[k] = c(k);
  fit.residual = residual;
  return fit;
}

/// Morley dofs of a smooth function, for tests and round-trip checks.
template <class Value, class Gradient>
MorleyDofs morley_dofs_of(const Rect& cell, Value&& v, Gradient&& g) {
  MorleyDofs d;
  d.vertex_values = {v(cell.x0, cell.y0), v(cell.x1, cell.y0), v(cell.x0, cell.y1),
                     v(cell.x1, cell.y1)};
  auto edge_mean = [&](double px0, double py0, double px1, double py1, double nx, double ny) {
    // 3-point Gauss along the segment
    const auto& nw = detail::gauss_legendre(3);
    double s = 0;
    for (const auto& [t, w] : nw) {
      const double x = 0.5 * (px0 + px1) + 0.5 * t * (px1 - px0);
      const double y = 0.5 * (py0 + py1) + 0.5 * t * (py1 - py0);
      const auto gr = g(x, y);
      s += 0.5 * w * (gr[0] * nx + gr[1] * ny);
    }
    return s;
  };
  d.edge_normal_means = {edge_mean(cell.x0, cell.y0, cell.x1, cell.y0, 0, -1),
                         edge_mean(cell.x0, cell.y1, cell.x1, cell.y1, 0, 1),
                         edge_mean(cell.x0, cell.y0, cell.x0, cell.y1, -1, 0),
                         edge_mean(cell.x1, cell.y0, cell.x1, cell.y1, 1, 0)};
  return d;
}

}  // namespace rrm
