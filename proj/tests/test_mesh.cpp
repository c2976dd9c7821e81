#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <sstream>

#include "rrm/mesh.hpp"

using namespace rrm;

TEST_CASE("uniform grid splits the extent evenly", "[mesh]") {
  const TensorGrid g = build_uniform({0, 0, 1, 1}, 4);
  REQUIRE(g.num_active() == 16);
  for (CellIndex c : g.active_cells()) {
    const Rect r = g.cell_rect(c);
    CHECK(r.width() == Catch::Approx(0.25));
    CHECK(r.height() == Catch::Approx(0.25));
  }
  CHECK(build_uniform({0, 0, 1, 1}, 64).mesh_size() == Catch::Approx(std::pow(2.0, -6)));
  CHECK_THROWS_AS(build_uniform({0, 0, 1, 1}, 0), Error);
}

TEST_CASE("degenerate grids", "[mesh]") {
  // a single cell puts all four corner nodes in one cell
  CHECK_THROWS_AS(classify(build_uniform({0, 0, 1, 1}, 1)), CornerAdjacencyViolation);
  // 2x2 is the smallest classifiable square: no interior cells
  const Classification cls = classify(build_uniform({0, 0, 1, 1}, 2));
  CHECK(cls.interior_cells.empty());
  CHECK(cls.boundary_cells.size() == 4);
}

TEST_CASE("pattern grid mesh sizes match the study levels", "[mesh]") {
  CHECK(build_pattern(1, 0.65).mesh_size() == Catch::Approx(0.325));
  CHECK(build_pattern(5, 0.65).mesh_size() == Catch::Approx(0.0203125));
  const TensorGrid half = build_pattern(1, 0.5);
  REQUIRE(half.num_active() == 16);
  CHECK(half.mesh_size() == Catch::Approx(0.25));
  CHECK_THROWS_AS(build_pattern(1, 0.0), Error);
  CHECK_THROWS_AS(build_pattern(1, 1.0), Error);
  CHECK_THROWS_AS(build_pattern(0, 0.65), Error);
}

TEST_CASE("L-shape cell count and corner taxonomy", "[mesh]") {
  const TensorGrid g = build_lshape(8, LshapeKind::uniform);
  CHECK(g.num_active() == 192);
  const Classification cls = classify(g);
  int concave = 0, convex = 0;
  bool reentrant_found = false;
  for (const CornerNode& cn : cls.corner_nodes) {
    (cn.concave ? concave : convex)++;
    const double x = g.xs()[cn.vi], y = g.ys()[cn.vj];
    if (cn.concave) {
      CHECK(x == Catch::Approx(1.0));
      CHECK(y == Catch::Approx(1.0));
      reentrant_found = true;
    }
  }
  CHECK(concave == 1);
  CHECK(convex == 5);
  CHECK(reentrant_found);

  std::set<std::pair<double, double>> convex_pts;
  for (const CornerNode& cn : cls.corner_nodes)
    if (!cn.concave) convex_pts.insert({g.xs()[cn.vi], g.ys()[cn.vj]});
  const std::set<std::pair<double, double>> expected{{0, 0}, {2, 0}, {0, 2}, {1, 2}, {2, 1}};
  CHECK(convex_pts == expected);
}

TEST_CASE("adjacent corner nodes are rejected", "[mesh]") {
  const TensorGrid g = build_lshape(1, LshapeKind::uniform);
  CHECK_THROWS_AS(classify(g), CornerAdjacencyViolation);
}

TEST_CASE("interior cell counts on uniform squares", "[mesh]") {
  {
    const Classification cls = classify(build_uniform({0, 0, 1, 1}, 4));
    REQUIRE(cls.interior_cells.size() == 4);
    for (CellIndex c : cls.interior_cells) {
      CHECK((c.i == 1 || c.i == 2));
      CHECK((c.j == 1 || c.j == 2));
    }
  }
  CHECK(classify(build_uniform({0, 0, 1, 1}, 64)).interior_cells.size() == 62 * 62);
}

TEST_CASE("classification is deterministic", "[mesh]") {
  const TensorGrid g = build_lshape(4, LshapeKind::uniform);
  const Classification a = classify(g), b = classify(g);
  CHECK(a.interior_cells == b.interior_cells);
  CHECK(a.boundary_cells == b.boundary_cells);
  CHECK(a.expansion_cells == b.expansion_cells);
}

TEST_CASE("patches of interior cells are real and uniform", "[mesh]") {
  const TensorGrid g = build_uniform({0, 0, 1, 1}, 6);
  const Classification cls = classify(g);
  for (CellIndex c : cls.interior_cells) {
    const Patch3x3 p = make_patch(g, cls, c);
    for (int t = 0; t < 3; ++t) {
      CHECK(p.lengths[t] == Catch::Approx(1.0 / 6));
      CHECK(p.heights[t] == Catch::Approx(1.0 / 6));
    }
    for (int b = 0; b < 3; ++b)
      for (int a = 0; a < 3; ++a) CHECK(g.is_active(p.cell_at(a, b)));
  }
}

TEST_CASE("boundary patches mirror the nearest real dimension", "[mesh]") {
  const TensorGrid g = build_uniform({0, 0, 1, 1}, 4);
  const Classification cls = classify(g);
  const Patch3x3 p = make_patch(g, cls, {3, 2});  // right-edge boundary cell
  CHECK(p.lengths[2] == Catch::Approx(0.25));     // ghost column
  CHECK(p.cell_at(2, 1).i == 4);
  CHECK_FALSE(g.is_active(p.cell_at(2, 1)));
}

TEST_CASE("pattern patch lengths at the right boundary", "[mesh]") {
  const TensorGrid g = build_pattern(1, 0.65);  // widths 0.325, 0.175, 0.325, 0.175
  const Classification cls = classify(g);
  const Patch3x3 p = make_patch(g, cls, {3, 1});
  CHECK(p.lengths[0] == Catch::Approx(0.325));
  CHECK(p.lengths[1] == Catch::Approx(0.175));
  CHECK(p.lengths[2] == Catch::Approx(0.175));  // mirrored ghost
}

TEST_CASE("patch centers must be active or registered expansions", "[mesh]") {
  const TensorGrid g = build_lshape(4, LshapeKind::uniform);
  const Classification cls = classify(g);
  // deep inside the cut-out corner: inactive and not an expansion cell
  CHECK_THROWS_AS(make_patch(g, cls, {7, 7}), Error);
  CHECK_FALSE(cls.is_expansion({7, 7}));
  // every expansion cell yields a patch
  for (CellIndex c : cls.expansion_cells) CHECK_NOTHROW(make_patch(g, cls, c));
}

TEST_CASE("regularity of uniform and pattern grids", "[mesh]") {
  CHECK(regularity(build_uniform({0, 0, 1, 1}, 5)) == Catch::Approx(2.0));
  CHECK(regularity(build_pattern(2, 0.65)) == Catch::Approx(2.0 * 0.65 / 0.35));
  CHECK(regularity(build_pattern(1, 0.99)) > 10.0);  // flagged against gamma_0
}

TEST_CASE("grid text round trip", "[mesh]") {
  const TensorGrid g = build_lshape(2, LshapeKind::pattern);
  std::stringstream ss;
  g.write_text(ss);
  const TensorGrid r = TensorGrid::read_text(ss);
  REQUIRE(r.nx() == g.nx());
  REQUIRE(r.ny() == g.ny());
  CHECK(r.xs() == g.xs());
  CHECK(r.ys() == g.ys());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) CHECK(r.is_active({i, j}) == g.is_active({i, j}));
}

TEST_CASE("ghost scale affects only ghost geometry", "[mesh]") {
  const TensorGrid g = build_pattern(1, 0.65);
  const TensorGrid s = g.with_ghost_scale(1.3);
  for (CellIndex c : g.active_cells()) {
    const Rect a = g.cell_rect(c), b = s.cell_rect(c);
    CHECK(a.x0 == b.x0);
    CHECK(a.y1 == b.y1);
  }
  CHECK(s.width(-1) == Catch::Approx(1.3 * g.width(-1)));
  CHECK(s.width(g.nx()) == Catch::Approx(1.3 * g.width(g.nx())));
}
