#pragma once

#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

#include "rrm/common.hpp"

namespace rrm {

enum class DomainKind { square, lshape, custom };

/// Rectangular tensor-product grid with an active-cell mask.
///
/// The grid owns the strictly increasing coordinate lines xs, ys. Cells are
/// addressed by lattice indices (i, j) with i in [0, nx) and j in [0, ny).
/// Indices outside that range address ghost cells whose dimensions mirror
/// the nearest real row/column (optionally rescaled, see set of ghost_scale);
/// ghost geometry is defined two layers out, enough for any 3x3 patch
/// centered on a first-layer ghost.
class TensorGrid {
 public:
  TensorGrid(std::vector<double> xs, std::vector<double> ys,
             std::vector<std::uint8_t> active_mask, DomainKind kind)
      : xs_(std::move(xs)), ys_(std::move(ys)), active_(std::move(active_mask)), kind_(kind) {
    if (xs_.size() < 2 || ys_.size() < 2) throw Error("TensorGrid: need at least one cell");
    for (std::size_t k = 0; k + 1 < xs_.size(); ++k)
      if (!(xs_[k + 1] > xs_[k])) throw Error("TensorGrid: xs not strictly increasing");
    for (std::size_t k = 0; k + 1 < ys_.size(); ++k)
      if (!(ys_[k + 1] > ys_[k])) throw Error("TensorGrid: ys not strictly increasing");
    if (active_.size() != static_cast<std::size_t>(nx()) * ny())
      throw Error("TensorGrid: active mask size mismatch");
    ordinal_.assign(active_.size(), -1);
    for (int j = 0; j < ny(); ++j)
      for (int i = 0; i < nx(); ++i)
        if (active_[flat(i, j)]) {
          ordinal_[flat(i, j)] = static_cast<int>(cells_.size());
          cells_.push_back({i, j});
        }
    if (cells_.empty()) throw Error("TensorGrid: no active cells");
  }

  int nx() const { return static_cast<int>(xs_.size()) - 1; }
  int ny() const { return static_cast<int>(ys_.size()) - 1; }
  DomainKind domain_kind() const { return kind_; }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }

  bool in_tensor(CellIndex c) const {
    return c.i >= 0 && c.i < nx() && c.j >= 0 && c.j < ny();
  }
  bool is_active(CellIndex c) const { return in_tensor(c) && active_[flat(c.i, c.j)]; }

  const std::vector<CellIndex>& active_cells() const { return cells_; }
  int num_active() const { return static_cast<int>(cells_.size()); }

  /// Ordinal of an active cell in active_cells(), or -1.
  int ordinal(CellIndex c) const {
    return in_tensor(c) ? ordinal_[flat(c.i, c.j)] : -1;
  }

  /// Column width, extended by the mirror rule (ghost widths rescaled by ghost_scale).
  double width(int i) const {
    const int n = nx();
    if (i >= 0 && i < n) return xs_[i + 1] - xs_[i];
    const int k = i < 0 ? -1 - i : i - n;          // layers out
    const int m = i < 0 ? std::min(k, n - 1) : n - 1 - std::min(k, n - 1);
    return ghost_scale_ * (xs_[m + 1] - xs_[m]);
  }
  double height(int j) const {
    const int n = ny();
    if (j >= 0 && j < n) return ys_[j + 1] - ys_[j];
    const int k = j < 0 ? -1 - j : j - n;
    const int m = j < 0 ? std::min(k, n - 1) : n - 1 - std::min(k, n - 1);
    return ghost_scale_ * (ys_[m + 1] - ys_[m]);
  }

  /// Coordinate of vertical line i, extended outward by cumulated ghost widths.
  double line_x(int i) const {
    if (i >= 0 && i <= nx()) return xs_[i];
    double x;
    if (i < 0) {
      x = xs_[0];
      for (int t = -1; t >= i; --t) x -= width(t);
    } else {
      x = xs_[nx()];
      for (int t = nx(); t < i; ++t) x += width(t);
    }
    return x;
  }
  double line_y(int j) const {
    if (j >= 0 && j <= ny()) return ys_[j];
    double y;
    if (j < 0) {
      y = ys_[0];
      for (int t = -1; t >= j; --t) y -= height(t);
    } else {
      y = ys_[ny()];
      for (int t = ny(); t < j; ++t) y += height(t);
    }
    return y;
  }

  /// Geometry of a (possibly ghost) cell.
  Rect cell_rect(CellIndex c) const {
    return {line_x(c.i), line_y(c.j), line_x(c.i) + width(c.i), line_y(c.j) + height(c.j)};
  }

  double mesh_size() const {
    double h = 0;
    for (CellIndex c : cells_) h = std::max(h, cell_rect(c).size());
    return h;
  }

  /// Multiplier applied to all mirrored ghost dimensions. Quantities restricted
  /// to the domain must not depend on it; the basis tests exercise exactly that.
  TensorGrid with_ghost_scale(double s) const {
    if (!(s > 0)) throw Error("ghost scale must be positive");
    TensorGrid g = *this;
    g.ghost_scale_ = s;
    return g;
  }
  double ghost_scale() const { return ghost_scale_; }

  void write_text(std::ostream& os) const {
    os.precision(17);
    os << "xs";
    for (double x : xs_) os << ' ' << x;
    os << "\nys";
    for (double y : ys_) os << ' ' << y;
    os << "\nactive\n";
    for (int j = 0; j < ny(); ++j) {
      for (int i = 0; i < nx(); ++i) os << (active_[flat(i, j)] ? '1' : '0');
      os << '\n';
    }
  }

  static TensorGrid read_text(std::istream& is) {
    std::string tag, line;
    std::vector<double> xs, ys;
    is >> tag;
    if (tag != "xs") throw Error("grid text: expected xs");
    std::getline(is, line);
    {
      std::istringstream ls(line);
      double v;
      while (ls >> v) xs.push_back(v);
    }
    is >> tag;
    if (tag != "ys") throw Error("grid text: expected ys");
    std::getline(is, line);
    {
      std::istringstream ls(line);
      double v;
      while (ls >> v) ys.push_back(v);
    }
    is >> tag;
    if (tag != "active") throw Error("grid text: expected active");
    const int nx = static_cast<int>(xs.size()) - 1, ny = static_cast<int>(ys.size()) - 1;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(nx) * ny, 0);
    for (int j = 0; j < ny; ++j) {
      is >> line;
      if (static_cast<int>(line.size()) != nx) throw Error("grid text: bad mask row");
      for (int i = 0; i < nx; ++i) mask[static_cast<std::size_t>(j) * nx + i] = line[i] == '1';
    }
    return TensorGrid(std::move(xs), std::move(ys), std::move(mask), DomainKind::custom);
  }

 private:
  std::size_t flat(int i, int j) const { return static_cast<std::size_t>(j) * nx() + i; }

  std::vector<double> xs_, ys_;
  std::vector<std::uint8_t> active_;
  DomainKind kind_;
  double ghost_scale_ = 1.0;
  std::vector<int> ordinal_;
  std::vector<CellIndex> cells_;
};

/// n x n equal cells covering `extent`, all active.
inline TensorGrid build_uniform(const Rect& extent, int n) {
  if (n < 1) throw Error("build_uniform: n must be positive");
  std::vector<double> xs(n + 1), ys(n + 1);
  for (int k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / n;
    xs[k] = extent.x0 + t * extent.width();
    ys[k] = extent.y0 + t * extent.height();
  }
  // exact endpoints
  xs[n] = extent.x1;
  ys[n] = extent.y1;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * n, 1);
  return TensorGrid(std::move(xs), std::move(ys), std::move(mask), DomainKind::square);
}

namespace detail {

/// Coordinate lines of the recursive split pattern on [lo, hi]:
/// `macros` equal macro-cells, each split at fraction `ratio` in both axes.
inline std::vector<double> pattern_lines(double lo, double hi, int macros, double ratio) {
  std::vector<double> lines;
  const double s = (hi - lo) / macros;
  for (int m = 0; m < macros; ++m) {
    lines.push_back(lo + m * s);
    lines.push_back(lo + m * s + ratio * s);
  }
  lines.push_back(hi);
  return lines;
}

}  // namespace detail

/// Non-uniform grid on the unit square: 2^level x 2^level macro-cells, each
/// split at `ratio` in x and y. Mesh size is max(ratio, 1-ratio) * 2^-level.
inline TensorGrid build_pattern(int level, double ratio) {
  if (level < 1) throw Error("build_pattern: level must be >= 1");
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error("build_pattern: ratio must be in (0,1)");
  const int macros = 1 << level;
  auto xs = detail::pattern_lines(0.0, 1.0, macros, ratio);
  auto ys = xs;
  const int n = static_cast<int>(xs.size()) - 1;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * n, 1);
  return TensorGrid(std::move(xs), std::move(ys), std::move(mask), DomainKind::square);
}

enum class LshapeKind { uniform, pattern };

/// L-shaped domain (0,2)^2 minus [1,2]^2. For `uniform`, resolution is the
/// number of cells per unit length; for `pattern`, the per-unit pattern level.
inline TensorGrid build_lshape(int resolution, LshapeKind kind, double ratio = 0.65) {
  std::vector<double> lines;
  if (kind == LshapeKind::uniform) {
    if (resolution < 1) throw Error("build_lshape: resolution must be positive");
    for (int k = 0; k <= 2 * resolution; ++k) lines.push_back(static_cast<double>(k) / resolution);
  } else {
    if (resolution < 1) throw Error("build_lshape: level must be >= 1");
    if (!(ratio > 0.0 && ratio < 1.0)) throw Error("build_lshape: ratio must be in (0,1)");
    lines = detail::pattern_lines(0.0, 2.0, 2 * (1 << resolution), ratio);
  }
  const int n = static_cast<int>(lines.size()) - 1;
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n) * n, 1);
  auto ys = lines;
  TensorGrid full(std::move(lines), std::move(ys), std::move(mask), DomainKind::lshape);
  std::vector<std::uint8_t> cut(static_cast<std::size_t>(n) * n, 1);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Rect r = full.cell_rect({i, j});
      if (r.xc() > 1.0 && r.yc() > 1.0) cut[static_cast<std::size_t>(j) * n + i] = 0;
    }
  return TensorGrid(full.xs(), full.ys(), std::move(cut), DomainKind::lshape);
}

/// Default bound on the shape-regularity measure; exceeding it is a
/// warning condition, not an error.
inline constexpr double kRegularityBound = 10.0;

/// Shape-regularity measure max_K h_K / rho_K over active cells
/// (rho_K = inscribed circle radius = min extent / 2).
inline double regularity(const TensorGrid& grid) {
  double worst = 0;
  for (CellIndex c : grid.active_cells()) {
    const Rect r = grid.cell_rect(c);
    worst = std::max(worst, 2.0 * r.size() / std::min(r.width(), r.height()));
  }
  return worst;
}

enum class CellClass : std::uint8_t { inactive, interior, boundary };

/// Edge of the tensor lattice. A horizontal edge (i, j) spans column i on
/// line y_j; a vertical edge (i, j) spans row j on line x_i.
struct EdgeId {
  bool horizontal = true;
  int i = 0;
  int j = 0;
  friend bool operator==(const EdgeId& a, const EdgeId& b) {
    return a.horizontal == b.horizontal && a.i == b.i && a.j == b.j;
  }
};

struct CornerNode {
  int vi = 0;
  int vj = 0;
  bool concave = false;
};

/// Cell/vertex/edge taxonomy of an active grid, plus the exterior expansion
/// cells attached to corner nodes and non-corner boundary edges.
struct Classification {
  int nx = 0, ny = 0;
  std::vector<CellClass> cell;                    // nx * ny
  std::vector<CellIndex> interior_cells;
  std::vector<CellIndex> boundary_cells;
  std::vector<CornerNode> corner_nodes;
  std::vector<EdgeId> corner_edges;
  std::vector<EdgeId> noncorner_boundary_edges;
  std::vector<EdgeId> interior_edges;
  std::vector<std::array<int, 2>> interior_vertices;
  std::vector<std::array<int, 2>> boundary_vertices;
  std::vector<CellIndex> expansion_cells;         // sorted, ghost lattice indices allowed

  CellClass cell_class(CellIndex c) const {
    if (c.i < 0 || c.i >= nx || c.j < 0 || c.j >= ny) return CellClass::inactive;
    return cell[static_cast<std::size_t>(c.j) * nx + c.i];
  }
  bool is_expansion(CellIndex c) const {
    return std::binary_search(expansion_cells.begin(), expansion_cells.end(), c);
  }
};

inline Classification classify(const TensorGrid& grid) {
  Classification cls;
  cls.nx = grid.nx();
  cls.ny = grid.ny();
  cls.cell.assign(static_cast<std::size_t>(cls.nx) * cls.ny, CellClass::inactive);

  // vertex status: count active cells around each lattice vertex
  auto active_around = [&](int vi, int vj) {
    int n = 0;
    for (int di = -1; di <= 0; ++di)
      for (int dj = -1; dj <= 0; ++dj)
        if (grid.is_active({vi + di, vj + dj})) ++n;
    return n;
  };
  std::vector<std::uint8_t> vertex_boundary(static_cast<std::size_t>(cls.nx + 1) * (cls.ny + 1), 0);
  auto vflat = [&](int vi, int vj) { return static_cast<std::size_t>(vj) * (cls.nx + 1) + vi; };
  for (int vj = 0; vj <= cls.ny; ++vj)
    for (int vi = 0; vi <= cls.nx; ++vi) {
      const int n = active_around(vi, vj);
      if (n == 0) continue;
      if (n == 4) {
        cls.interior_vertices.push_back({vi, vj});
      } else {
        vertex_boundary[vflat(vi, vj)] = 1;
        cls.boundary_vertices.push_back({vi, vj});
      }
    }

  // cells: interior iff no vertex on the boundary
  for (CellIndex c : grid.active_cells()) {
    const bool b = vertex_boundary[vflat(c.i, c.j)] || vertex_boundary[vflat(c.i + 1, c.j)] ||
                   vertex_boundary[vflat(c.i, c.j + 1)] || vertex_boundary[vflat(c.i + 1, c.j + 1)];
    cls.cell[static_cast<std::size_t>(c.j) * cls.nx + c.i] =
        b ? CellClass::boundary : CellClass::interior;
    (b ? cls.boundary_cells : cls.interior_cells).push_back(c);
  }

  // edges: boundary iff exactly one adjacent active cell
  auto edge_boundary = [&](const EdgeId& e) {
    const CellIndex a = e.horizontal ? CellIndex{e.i, e.j - 1} : CellIndex{e.i - 1, e.j};
    const CellIndex b{e.i, e.j};
    return static_cast<int>(grid.is_active(a)) + static_cast<int>(grid.is_active(b)) == 1;
  };
  std::vector<EdgeId> boundary_edges;
  for (int j = 0; j <= cls.ny; ++j)
    for (int i = 0; i < cls.nx; ++i) {
      const EdgeId e{true, i, j};
      const int n = static_cast<int>(grid.is_active({i, j - 1})) + static_cast<int>(grid.is_active({i, j}));
      if (n == 2) cls.interior_edges.push_back(e);
      else if (n == 1) boundary_edges.push_back(e);
    }
  for (int i = 0; i <= cls.nx; ++i)
    for (int j = 0; j < cls.ny; ++j) {
      const EdgeId e{false, i, j};
      const int n = static_cast<int>(grid.is_active({i - 1, j})) + static_cast<int>(grid.is_active({i, j}));
      if (n == 2) cls.interior_edges.push_back(e);
      else if (n == 1) boundary_edges.push_back(e);
    }

  // corner nodes: boundary vertices with both a horizontal and a vertical
  // incident boundary edge
  auto is_boundary_edge = [&](bool horizontal, int i, int j) {
    if (horizontal) {
      if (i < 0 || i >= cls.nx || j < 0 || j > cls.ny) return false;
    } else {
      if (i < 0 || i > cls.nx || j < 0 || j >= cls.ny) return false;
    }
    return edge_boundary({horizontal, i, j});
  };
  std::vector<std::uint8_t> vertex_corner(vertex_boundary.size(), 0);
  for (auto [vi, vj] : cls.boundary_vertices) {
    const bool h = is_boundary_edge(true, vi - 1, vj) || is_boundary_edge(true, vi, vj);
    const bool v = is_boundary_edge(false, vi, vj - 1) || is_boundary_edge(false, vi, vj);
    if (!(h && v)) continue;
    const int n = active_around(vi, vj);
    if (n == 2) throw Error("classify: pinched domain at a corner node");
    cls.corner_nodes.push_back({vi, vj, n == 3});
    vertex_corner[vflat(vi, vj)] = 1;
  }

  // standing assumption of the basis construction
  for (CellIndex c : grid.active_cells()) {
    const int n = vertex_corner[vflat(c.i, c.j)] + vertex_corner[vflat(c.i + 1, c.j)] +
                  vertex_corner[vflat(c.i, c.j + 1)] + vertex_corner[vflat(c.i + 1, c.j + 1)];
    if (n >= 2) throw CornerAdjacencyViolation("classify: two corner nodes share a cell");
  }

  for (const EdgeId& e : boundary_edges) {
    const bool corner = e.horizontal
                            ? (vertex_corner[vflat(e.i, e.j)] || vertex_corner[vflat(e.i + 1, e.j)])
                            : (vertex_corner[vflat(e.i, e.j)] || vertex_corner[vflat(e.i, e.j + 1)]);
    (corner ? cls.corner_edges : cls.noncorner_boundary_edges).push_back(e);
  }

  // exterior expansion cells: around each corner node, the inactive cells of
  // its 2x2 neighborhood; across each non-corner boundary edge, the inactive
  // mirror cell
  std::set<CellIndex> expansion;
  for (const CornerNode& cn : cls.corner_nodes)
    for (int di = -1; di <= 0; ++di)
      for (int dj = -1; dj <= 0; ++dj) {
        const CellIndex c{cn.vi + di, cn.vj + dj};
        if (!grid.is_active(c)) expansion.insert(c);
      }
  for (const EdgeId& e : cls.noncorner_boundary_edges) {
    const CellIndex a = e.horizontal ? CellIndex{e.i, e.j - 1} : CellIndex{e.i - 1, e.j};
    const CellIndex b{e.i, e.j};
    expansion.insert(grid.is_active(a) ? b : a);
  }
  cls.expansion_cells.assign(expansion.begin(), expansion.end());
  return cls;
}

/// A cell with its 3x3 neighborhood: six neighbor dimensions and the patch
/// origin, with ghost rows/columns synthesized by the grid's mirror rule.
struct Patch3x3 {
  CellIndex center;
  std::array<double, 3> lengths{};   // L_{K,-1}, L_K, L_{K,1}
  std::array<double, 3> heights{};   // H_{K,-1}, H_K, H_{K,1}
  double origin_x = 0, origin_y = 0; // lower-left corner of the patch

  CellIndex cell_at(int a, int b) const { return {center.i - 1 + a, center.j - 1 + b}; }

  Rect cell_rect(int a, int b) const {
    double x = origin_x, y = origin_y;
    for (int t = 0; t < a; ++t) x += lengths[t];
    for (int t = 0; t < b; ++t) y += heights[t];
    return {x, y, x + lengths[a], y + heights[b]};
  }
  Rect center_rect() const { return cell_rect(1, 1); }
};

/// 3x3 patch centered at `c`; `c` must be active or a registered expansion cell.
inline Patch3x3 make_patch(const TensorGrid& grid, const Classification& cls, CellIndex c) {
  if (!grid.is_active(c) && !cls.is_expansion(c))
    throw Error("make_patch: cell is neither active nor a registered expansion");
  Patch3x3 p;
  p.center = c;
  for (int t = 0; t < 3; ++t) {
    p.lengths[t] = grid.width(c.i - 1 + t);
    p.heights[t] = grid.height(c.j - 1 + t);
  }
  p.origin_x = grid.line_x(c.i - 1);
  p.origin_y = grid.line_y(c.j - 1);
  return p;
}

}  // namespace rrm
