#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace rrm {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Two corner nodes of the domain boundary share a cell; the patch
/// expansion rules require them to be separated.
struct CornerAdjacencyViolation : Error {
  using Error::Error;
};

/// Morley degrees of freedom admit no quadratic polynomial within tolerance.
struct InconsistentDofs : Error {
  using Error::Error;
};

/// A basis set or linear system was requested on a grid without interior cells.
struct EmptySpace : Error {
  using Error::Error;
};

/// Neither the direct nor the iterative linear solver reached the tolerance.
struct SolveFailure : Error {
  using Error::Error;
};

/// A subdomain with zero area was passed to a projectivity test.
struct DegenerateSubdomain : Error {
  using Error::Error;
};

/// Lattice coordinates of a cell. Indices outside the grid's tensor range
/// address ghost cells synthesized by the mirror rule.
struct CellIndex {
  int i = 0;
  int j = 0;

  friend bool operator==(CellIndex a, CellIndex b) { return a.i == b.i && a.j == b.j; }
  friend bool operator!=(CellIndex a, CellIndex b) { return !(a == b); }
  friend bool operator<(CellIndex a, CellIndex b) {
    return a.j != b.j ? a.j < b.j : a.i < b.i;
  }
};

struct CellIndexHash {
  std::size_t operator()(CellIndex c) const {
    auto h = static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.i));
    h = (h << 32) | static_cast<std::uint32_t>(c.j);
    return std::hash<std::uint64_t>{}(h);
  }
};

/// Axis-aligned rectangle.
struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  double xc() const { return 0.5 * (x0 + x1); }
  double yc() const { return 0.5 * (y0 + y1); }
  /// Cell size h_K = max extent.
  double size() const { return std::max(width(), height()); }
  bool contains(double x, double y) const {
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  }
};

/// Scalar field given as a plain callable; evaluability on ghost cells is the
/// caller's responsibility where an operation requires it.
using ScalarFn = std::function<double(double, double)>;

/// Checkerboard sign (-1)^(i+j) of a lattice cell, valid for ghost indices.
inline int parity_sign(CellIndex c) {
  const int p = (c.i + c.j) % 2;
  return p == 0 ? 1 : -1;
}

}  // namespace rrm
