#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "rrm/basis.hpp"

namespace rrm {

using Vec2 = Eigen::Vector2d;

/// Convex polygon, counterclockwise.
struct ConvexPolygon {
  std::vector<Vec2> pts;

  double area() const {
    double a = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const Vec2& p = pts[k];
      const Vec2& q = pts[(k + 1) % pts.size()];
      a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
  }
};

/// A subdomain is a union of convex polygons; for cell unions these are the
/// cell rectangles.
struct Subdomain {
  std::vector<ConvexPolygon> polys;
};

inline Subdomain subdomain_from_cells(const TensorGrid& grid, const std::vector<CellIndex>& cells) {
  Subdomain d;
  for (CellIndex c : cells) {
    if (!grid.is_active(c)) throw Error("subdomain_from_cells: inactive cell");
    const Rect r = grid.cell_rect(c);
    d.polys.push_back({{Vec2(r.x0, r.y0), Vec2(r.x1, r.y0), Vec2(r.x1, r.y1), Vec2(r.x0, r.y1)}});
  }
  return d;
}

namespace detail {

/// Keep the part of `poly` with n . x <= d (Sutherland-Hodgman step).
inline ConvexPolygon clip_halfplane(const ConvexPolygon& poly, const Vec2& n, double d) {
  ConvexPolygon out;
  const std::size_t m = poly.pts.size();
  for (std::size_t k = 0; k < m; ++k) {
    const Vec2& p = poly.pts[k];
    const Vec2& q = poly.pts[(k + 1) % m];
    const double sp = n.dot(p) - d, sq = n.dot(q) - d;
    if (sp <= 1e-14) out.pts.push_back(p);
    if ((sp < -1e-14 && sq > 1e-14) || (sp > 1e-14 && sq < -1e-14))
      out.pts.push_back(p + (sp / (sp - sq)) * (q - p));
  }
  return out;
}

inline ConvexPolygon clip_to_triangle(ConvexPolygon poly, const std::array<Vec2, 3>& tri) {
  for (int s = 0; s < 3 && !poly.pts.empty(); ++s) {
    const Vec2 a = tri[s], b = tri[(s + 1) % 3];
    const Vec2 edge = b - a;
    Vec2 inward(-edge.y(), edge.x());  // CCW triangle: inside is the left side
    poly = clip_halfplane(poly, -inward, -inward.dot(a));
  }
  return poly;
}

inline ConvexPolygon clip_to_rect(ConvexPolygon poly, const Rect& r) {
  poly = clip_halfplane(poly, Vec2(-1, 0), -r.x0);
  poly = clip_halfplane(poly, Vec2(1, 0), r.x1);
  poly = clip_halfplane(poly, Vec2(0, -1), -r.y0);
  poly = clip_halfplane(poly, Vec2(0, 1), r.y1);
  return poly;
}

/// Degree-5 seven-point rule per fan triangle of a convex polygon.
template <class F>
double integrate_polygon(const ConvexPolygon& poly, F&& f) {
  static const double w0 = 0.225;
  static const double a1 = 0.059715871789770, b1 = 0.470142064105115,
                      w1 = 0.132394152788506;
  static const double a2 = 0.797426985353087, b2 = 0.101286507323456,
                      w2 = 0.125939180544827;
  double s = 0;
  for (std::size_t k = 1; k + 1 < poly.pts.size(); ++k) {
    const Vec2 A = poly.pts[0], B = poly.pts[k], C = poly.pts[k + 1];
    const double area = 0.5 * std::abs((B - A).x() * (C - A).y() - (C - A).x() * (B - A).y());
    if (area == 0) continue;
    auto add = [&](double la, double lb, double lc, double w) {
      const Vec2 p = la * A + lb * B + lc * C;
      s += w * area * f(p.x(), p.y());
    };
    add(1.0 / 3, 1.0 / 3, 1.0 / 3, w0);
    add(a1, b1, b1, w1);
    add(b1, a1, b1, w1);
    add(b1, b1, a1, w1);
    add(a2, b2, b2, w2);
    add(b2, a2, b2, w2);
    add(b2, b2, a2, w2);
  }
  return s;
}

}  // namespace detail

/// A clipped portion of a subdomain on which a fixed list of family members
/// is smooth; the pieces of a subdomain partition it up to clipping noise.
struct IntegrationPiece {
  ConvexPolygon poly;
  std::vector<int> members;
  std::function<double(int member, double x, double y)> eval;  // by global member id
};

/// Family of locally supported basis functions that can report, for any
/// subdomain, integration pieces with per-piece member evaluation.
class LocalBasisFamily {
 public:
  virtual ~LocalBasisFamily() = default;
  virtual int size() const = 0;
  virtual std::vector<IntegrationPiece> pieces(const Subdomain& d) const = 0;
};

/// The patch basis functions of a BasisSet as a family over the grid cells.
class RrmFamily : public LocalBasisFamily {
 public:
  RrmFamily(const TensorGrid& grid, const BasisSet& set) : grid_(&grid), set_(&set) {}

  int size() const override { return set_->size(); }

  std::vector<IntegrationPiece> pieces(const Subdomain& d) const override {
    std::vector<IntegrationPiece> out;
    for (const ConvexPolygon& poly : d.polys) {
      double bx0 = poly.pts[0].x(), bx1 = bx0, by0 = poly.pts[0].y(), by1 = by0;
      for (const Vec2& p : poly.pts) {
        bx0 = std::min(bx0, p.x());
        bx1 = std::max(bx1, p.x());
        by0 = std::min(by0, p.y());
        by1 = std::max(by1, p.y());
      }
      for (CellIndex c : grid_->active_cells()) {
        const Rect r = grid_->cell_rect(c);
        if (r.x1 <= bx0 || r.x0 >= bx1 || r.y1 <= by0 || r.y0 >= by1) continue;
        ConvexPolygon clipped = detail::clip_to_rect(poly, r);
        if (clipped.pts.size() < 3 || clipped.area() < 1e-14 * r.area()) continue;
        IntegrationPiece piece;
        piece.poly = std::move(clipped);
        const auto& covering = set_->cover[grid_->ordinal(c)];
        std::vector<const P2Poly*> polys;
        for (const auto& [id, slot] : covering) {
          piece.members.push_back(id);
          polys.push_back(&set_->fns[id].cell_polys[slot]);
        }
        piece.eval = [covering, polys](int member, double x, double y) {
          for (std::size_t k = 0; k < covering.size(); ++k)
            if (covering[k].first == member) return polys[k]->value(x, y);
          return 0.0;
        };
        out.push_back(std::move(piece));
      }
    }
    return out;
  }

 private:
  const TensorGrid* grid_;
  const BasisSet* set_;
};

/// Uniform Crouzeix-Raviart mesh on the unit square: n x n squares of side
/// h = 1/n, each split by the diagonal from the lower-left to the upper-right
/// corner. One basis function per edge, affine per triangle, equal to one at
/// the edge midpoint and continuous there.
class CrMesh {
 public:
  enum class EdgeKind { horizontal, vertical, diagonal };

  explicit CrMesh(int n) : n_(n), h_(1.0 / n) {
    if (n < 1) throw Error("CrMesh: n must be positive");
  }

  int n() const { return n_; }
  double h() const { return h_; }
  int num_edges() const { return 2 * n_ * (n_ + 1) + n_ * n_; }
  int num_tris() const { return 2 * n_ * n_; }

  int horizontal_edge(int i, int j) const { return i + j * n_; }
  int vertical_edge(int i, int j) const { return n_ * (n_ + 1) + j + i * n_; }
  int diagonal_edge(int i, int j) const { return 2 * n_ * (n_ + 1) + i + j * n_; }

  EdgeKind kind(int e) const {
    if (e < n_ * (n_ + 1)) return EdgeKind::horizontal;
    if (e < 2 * n_ * (n_ + 1)) return EdgeKind::vertical;
    return EdgeKind::diagonal;
  }

  std::pair<Vec2, Vec2> endpoints(int e) const {
    if (kind(e) == EdgeKind::horizontal) {
      const int i = e % n_, j = e / n_;
      return {vertex(i, j), vertex(i + 1, j)};
    }
    if (kind(e) == EdgeKind::vertical) {
      const int r = e - n_ * (n_ + 1), j = r % n_, i = r / n_;
      return {vertex(i, j), vertex(i, j + 1)};
    }
    const int r = e - 2 * n_ * (n_ + 1), i = r % n_, j = r / n_;
    return {vertex(i, j), vertex(i + 1, j + 1)};
  }

  Vec2 midpoint(int e) const {
    const auto [a, b] = endpoints(e);
    return 0.5 * (a + b);
  }

  int lower_tri(int i, int j) const { return 2 * (i + j * n_); }
  int upper_tri(int i, int j) const { return lower_tri(i, j) + 1; }

  std::array<Vec2, 3> tri_vertices(int t) const {
    const int cell = t / 2, i = cell % n_, j = cell / n_;
    if (t % 2 == 0) return {vertex(i, j), vertex(i + 1, j), vertex(i + 1, j + 1)};
    return {vertex(i, j), vertex(i + 1, j + 1), vertex(i, j + 1)};
  }

  /// Edge ids by triangle side s = (v_s, v_{s+1}).
  std::array<int, 3> tri_edges(int t) const {
    const int cell = t / 2, i = cell % n_, j = cell / n_;
    if (t % 2 == 0)
      return {horizontal_edge(i, j), vertical_edge(i + 1, j), diagonal_edge(i, j)};
    return {diagonal_edge(i, j), horizontal_edge(i, j + 1), vertical_edge(i, j)};
  }

  std::vector<int> tris_of_edge(int e) const {
    std::vector<int> ts;
    if (kind(e) == EdgeKind::horizontal) {
      const int i = e % n_, j = e / n_;
      if (j < n_) ts.push_back(lower_tri(i, j));
      if (j > 0) ts.push_back(upper_tri(i, j - 1));
    } else if (kind(e) == EdgeKind::vertical) {
      const int r = e - n_ * (n_ + 1), j = r % n_, i = r / n_;
      if (i < n_) ts.push_back(upper_tri(i, j));
      if (i > 0) ts.push_back(lower_tri(i - 1, j));
    } else {
      const int r = e - 2 * n_ * (n_ + 1), i = r % n_, j = r / n_;
      ts.push_back(lower_tri(i, j));
      ts.push_back(upper_tri(i, j));
    }
    return ts;
  }

  /// Value of the basis function of edge e on triangle t (zero if e is not a
  /// side of t): 1 - 2 * (barycentric coordinate of the opposite vertex).
  double basis_value(int e, int t, double x, double y) const {
    const auto edges = tri_edges(t);
    int side = -1;
    for (int s = 0; s < 3; ++s)
      if (edges[s] == e) side = s;
    if (side < 0) return 0.0;
    const auto v = tri_vertices(t);
    const int opp = (side + 2) % 3;
    const Vec2 a = v[(opp + 1) % 3], b = v[(opp + 2) % 3], c = v[opp];
    const double det = (b - a).x() * (c - a).y() - (c - a).x() * (b - a).y();
    const double lam = ((x - a.x()) * (b - a).y() - (y - a.y()) * (b - a).x()) / -det;
    return 1.0 - 2.0 * lam;
  }

  /// Triangle containing (x, y), boundary ties resolved to the lower triangle.
  int locate(double x, double y) const {
    const int i = std::min(std::max(static_cast<int>(x / h_), 0), n_ - 1);
    const int j = std::min(std::max(static_cast<int>(y / h_), 0), n_ - 1);
    const double lx = x - i * h_, ly = y - j * h_;
    return ly <= lx ? lower_tri(i, j) : upper_tri(i, j);
  }

 private:
  Vec2 vertex(int i, int j) const { return {i * h_, j * h_}; }

  int n_;
  double h_;
};

/// Crouzeix-Raviart basis as a family; pieces are polygon-triangle clips.
class CrFamily : public LocalBasisFamily {
 public:
  explicit CrFamily(const CrMesh& mesh) : mesh_(&mesh) {}

  int size() const override { return mesh_->num_edges(); }

  std::vector<IntegrationPiece> pieces(const Subdomain& d) const override {
    std::vector<IntegrationPiece> out;
    const CrMesh& m = *mesh_;
    for (const ConvexPolygon& poly : d.polys) {
      for (int t = 0; t < m.num_tris(); ++t) {
        const auto tv = m.tri_vertices(t);
        ConvexPolygon clipped = detail::clip_to_triangle(poly, tv);
        if (clipped.pts.size() < 3) continue;
        const double tri_area = 0.5 * std::abs((tv[1] - tv[0]).x() * (tv[2] - tv[0]).y() -
                                               (tv[2] - tv[0]).x() * (tv[1] - tv[0]).y());
        if (clipped.area() < 1e-14 * tri_area) continue;
        IntegrationPiece piece;
        piece.poly = std::move(clipped);
        const auto edges = m.tri_edges(t);
        piece.members.assign(edges.begin(), edges.end());
        piece.eval = [&m, t](int member, double x, double y) {
          return m.basis_value(member, t, x, y);
        };
        out.push_back(std::move(piece));
      }
    }
    return out;
  }

 private:
  const CrMesh* mesh_;
};

namespace detail {

struct GramOnSubdomain {
  std::vector<int> members;       // sorted global ids overlapping the subdomain
  Eigen::MatrixXd gram;           // L2 products of restrictions
};

inline GramOnSubdomain gram_on(const LocalBasisFamily& family, const Subdomain& d) {
  const auto pieces = family.pieces(d);
  double total_area = 0;
  std::vector<int> members;
  for (const IntegrationPiece& p : pieces) {
    total_area += p.poly.area();
    members.insert(members.end(), p.members.begin(), p.members.end());
  }
  if (pieces.empty() || total_area <= 0)
    throw DegenerateSubdomain("gram_on: subdomain has no area in the mesh");
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  std::unordered_map<int, int> pos;
  for (std::size_t k = 0; k < members.size(); ++k) pos[members[k]] = static_cast<int>(k);

  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(members.size(), members.size());
  for (const IntegrationPiece& p : pieces)
    for (std::size_t a = 0; a < p.members.size(); ++a)
      for (std::size_t b = a; b < p.members.size(); ++b) {
        const int ma = p.members[a], mb = p.members[b];
        const double v = integrate_polygon(p.poly, [&](double x, double y) {
          return p.eval(ma, x, y) * p.eval(mb, x, y);
        });
        G(pos[ma], pos[mb]) += v;
        if (ma != mb) G(pos[mb], pos[ma]) += v;
      }
  return {std::move(members), std::move(G)};
}

}  // namespace detail

/// Decision of the local representability question: is the restriction of
/// member k to the subdomain a linear combination of the other overlapping
/// restrictions? Representable means no locally-defined projective
/// interpolation can use this subdomain for k; the witness holds the
/// combination coefficients over `members` with -1 in position k.
struct ProjectivityResult {
  bool representable = false;
  double residual = 0;            // L2 distance of phi_k to the span of the others
  double norm_k = 0;              // L2 norm of phi_k on the subdomain
  std::vector<int> members;
  Eigen::VectorXd witness;
};

inline ProjectivityResult projectivity_test(const LocalBasisFamily& family, const Subdomain& d,
                                            int k, double tol = 1e-9) {
  auto [members, G] = detail::gram_on(family, d);
  auto it = std::find(members.begin(), members.end(), k);
  if (it == members.end())
    throw DegenerateSubdomain("projectivity_test: subdomain misses the support of member k");
  const int kp = static_cast<int>(it - members.begin());
  const int m = static_cast<int>(members.size());

  ProjectivityResult res;
  res.members = members;
  res.norm_k = std::sqrt(std::max(G(kp, kp), 0.0));
  res.witness = Eigen::VectorXd::Zero(m);
  res.witness(kp) = -1.0;

  if (m > 1) {
    Eigen::MatrixXd Go(m - 1, m - 1);
    Eigen::VectorXd b(m - 1);
    for (int a = 0, ra = 0; a < m; ++a) {
      if (a == kp) continue;
      b(ra) = G(a, kp);
      for (int bb = 0, rb = 0; bb < m; ++bb) {
        if (bb == kp) continue;
        Go(ra, rb) = G(a, bb);
        ++rb;
      }
      ++ra;
    }
    // minimum-norm least squares handles rank-deficient restriction Grams
    const Eigen::VectorXd g = Go.completeOrthogonalDecomposition().solve(b);
    for (int a = 0, ra = 0; a < m; ++a) {
      if (a == kp) continue;
      res.witness(a) = g(ra++);
    }
  }
  // Residual of the combination as a function, by quadrature. Forming it
  // from Gram products cancels catastrophically near exact dependence.
  std::unordered_map<int, int> pos;
  for (int a = 0; a < m; ++a) pos[members[a]] = a;
  long double res2 = 0;
  for (const IntegrationPiece& piece : family.pieces(d)) {
    res2 += static_cast<long double>(detail::integrate_polygon(piece.poly, [&](double x, double y) {
      long double s = 0;
      for (int member : piece.members)
        s += static_cast<long double>(res.witness(pos.at(member))) * piece.eval(member, x, y);
      return static_cast<double>(s * s);
    }));
  }
  res.residual = std::sqrt(std::max(static_cast<double>(res2), 0.0));
  res.representable = res.residual <= tol * res.norm_k;
  return res;
}

/// L2 dual of member k on the subdomain: coefficients g over `members` with
/// integral of (sum g phi) * phi_t = delta_{kt} for every overlapping t.
struct DualResult {
  std::vector<int> members;
  Eigen::VectorXd coeffs;
  double duality_residual = 0;  // max |G g - e_k|
};

inline DualResult l2_dual(const LocalBasisFamily& family, const Subdomain& d, int k) {
  auto [members, G] = detail::gram_on(family, d);
  auto it = std::find(members.begin(), members.end(), k);
  if (it == members.end())
    throw DegenerateSubdomain("l2_dual: subdomain misses the support of member k");
  const int kp = static_cast<int>(it - members.begin());
  Eigen::VectorXd e = Eigen::VectorXd::Zero(members.size());
  e(kp) = 1.0;
  const Eigen::VectorXd g = G.completeOrthogonalDecomposition().solve(e);
  const double residual = (G * g - e).lpNorm<Eigen::Infinity>();
  if (residual > 1e-6)
    throw Error("l2_dual: singular Gram, no dual on this subdomain");
  return {std::move(members), g, residual};
}

/// True iff every cell of the union is covered by nine interior patches,
/// i.e. all lattice neighbors of each cell are interior cells.
inline bool completely_subdomain_check(const TensorGrid& grid, const Classification& cls,
                                       const std::vector<CellIndex>& cells) {
  (void)grid;
  for (CellIndex c : cells)
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di)
        if (cls.cell_class({c.i + di, c.j + dj}) != CellClass::interior) return false;
  return true;
}

/// Quarter-point rectangle of an edge: the square with one diagonal on the
/// edge, diagonals meeting at the quarter point Q = A + t (B - A), and side
/// length h / (8 sqrt(2)), i.e. half-diagonal h/16.
inline Subdomain quarter_rect(const CrMesh& mesh, int edge, double t) {
  const auto [A, B] = mesh.endpoints(edge);
  const Vec2 Q = A + t * (B - A);
  const Vec2 dir = (B - A).normalized();
  const Vec2 nrm(-dir.y(), dir.x());
  const double hd = mesh.h() / 16.0;
  Subdomain d;
  d.polys.push_back({{Q - hd * dir, Q - hd * nrm, Q + hd * dir, Q + hd * nrm}});
  return d;
}

/// Report of the dual-basis demonstration on quarter-point rectangles:
/// coefficients of the L2 dual of each representative edge, normalized by
/// h^2 (the natural scaling of duals of O(1) functions on O(h^2) areas).
struct CrDualRow {
  CrMesh::EdgeKind kind;
  double quarter = 0.25;
  int edge = -1;
  std::vector<int> members;
  Eigen::VectorXd coeffs_h2;
  int own_pos = -1;
  double duality_residual = 0;
};

inline std::vector<CrDualRow> cr_dual_demo(int n) {
  const CrMesh mesh(n);
  if (n < 2) throw Error("cr_dual_demo: need n >= 2 for interior edges");
  const int i = n / 2, j = n / 2;
  const std::array<std::pair<CrMesh::EdgeKind, int>, 3> picks{{
      {CrMesh::EdgeKind::horizontal, mesh.horizontal_edge(i, j)},
      {CrMesh::EdgeKind::vertical, mesh.vertical_edge(i, j)},
      {CrMesh::EdgeKind::diagonal, mesh.diagonal_edge(i, j)},
  }};
  const CrFamily family(mesh);
  std::vector<CrDualRow> rows;
  for (const auto& [kind, edge] : picks)
    for (double t : {0.25, 0.75}) {
      const DualResult dual = l2_dual(family, quarter_rect(mesh, edge, t), edge);
      CrDualRow row;
      row.kind = kind;
      row.quarter = t;
      row.edge = edge;
      row.members = dual.members;
      row.coeffs_h2 = dual.coeffs * mesh.h() * mesh.h();
      row.duality_residual = dual.duality_residual;
      row.own_pos = static_cast<int>(
          std::find(row.members.begin(), row.members.end(), edge) - row.members.begin());
      rows.push_back(std::move(row));
    }
  return rows;
}

enum class CrVariant { s1, s2, s3 };

/// The three projective interpolations onto the CR space: point values at
/// edge midpoints (S1), edge means (S2), and L2 duals on quarter-point
/// rectangles (S3). All reproduce the CR space exactly.
inline std::vector<double> cr_projective_interpolation(const CrMesh& mesh, CrVariant variant,
                                                       const ScalarFn& v) {
  std::vector<double> coeffs(mesh.num_edges(), 0.0);
  const CrFamily family(mesh);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    switch (variant) {
      case CrVariant::s1: {
        const Vec2 b = mesh.midpoint(e);
        coeffs[e] = v(b.x(), b.y());
        break;
      }
      case CrVariant::s2: {
        const auto [A, B] = mesh.endpoints(e);
        const auto& nw = detail::gauss_legendre(3);
        double s = 0;
        for (const auto& [tt, w] : nw) {
          const Vec2 p = 0.5 * (A + B) + 0.5 * tt * (B - A);
          s += 0.5 * w * v(p.x(), p.y());
        }
        coeffs[e] = s;
        break;
      }
      case CrVariant::s3: {
        const Subdomain d = quarter_rect(mesh, e, 0.25);
        const DualResult dual = l2_dual(family, d, e);
        const auto pieces = family.pieces(d);
        double s = 0;
        for (const IntegrationPiece& p : pieces)
          s += detail::integrate_polygon(p.poly, [&](double x, double y) {
            double psi = 0;
            for (std::size_t m = 0; m < dual.members.size(); ++m)
              psi += dual.coeffs(m) * p.eval(dual.members[m], x, y);
            return psi * v(x, y);
          });
        coeffs[e] = s;
        break;
      }
    }
  }
  return coeffs;
}

/// Point evaluation of a CR coefficient vector.
inline double cr_eval(const CrMesh& mesh, const std::vector<double>& coeffs, double x, double y) {
  const int t = mesh.locate(x, y);
  double s = 0;
  for (int e : mesh.tri_edges(t)) s += coeffs[e] * mesh.basis_value(e, t, x, y);
  return s;
}

}  // namespace rrm
