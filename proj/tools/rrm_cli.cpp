// Command-line driver: convergence studies, property verification, and the
// local-projectivity analysis.
//
// Exit codes: 0 success, 1 usage error, 2 numerical failure,
// 3 table check failure (--check-tables).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "rrm/golden_tables.hpp"
#include "rrm/projection.hpp"

namespace {

constexpr int kExitNumerical = 2;
constexpr int kExitTableCheck = 3;

double parse_eps_token(const std::string& tok) {
  if (const auto caret = tok.find('^'); caret != std::string::npos) {
    const double base = std::stod(tok.substr(0, caret));
    const double expo = std::stod(tok.substr(caret + 1));
    return std::pow(base, expo);
  }
  return std::stod(tok);
}

std::vector<double> parse_eps_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(parse_eps_token(tok));
  return out;
}

std::vector<int> parse_levels(const std::string& s) {
  std::vector<int> out;
  if (const auto dots = s.find(".."); dots != std::string::npos) {
    const int lo = std::stoi(s.substr(0, dots));
    const int hi = std::stoi(s.substr(dots + 2));
    for (int l = lo; l <= hi; ++l) out.push_back(l);
    return out;
  }
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stoi(tok));
  return out;
}

struct CheckPrinter {
  int failures = 0;

  void operator()(const std::string& name, double value, double bound) {
    const bool ok = value <= bound;
    if (!ok) ++failures;
    std::printf("%-58s %11.3e <= %.1e  %s\n", name.c_str(), value, bound, ok ? "ok" : "FAIL");
  }
  void expect(const std::string& name, bool ok) {
    if (!ok) ++failures;
    std::printf("%-58s %24s\n", name.c_str(), ok ? "ok" : "FAIL");
  }
};

std::vector<std::pair<std::string, rrm::TensorGrid>> verification_grids() {
  using namespace rrm;
  std::vector<std::pair<std::string, TensorGrid>> grids;
  grids.emplace_back("uniform 6x6", build_uniform({0, 0, 1, 1}, 6));
  grids.emplace_back("uniform 9x9", build_uniform({0, 0, 1, 1}, 9));
  grids.emplace_back("pattern level 2", build_pattern(2, 0.65));
  grids.emplace_back("lshape 4/unit", build_lshape(4, LshapeKind::uniform));
  grids.emplace_back("lshape pattern level 2", build_lshape(2, LshapeKind::pattern));
  return grids;
}

int run_verify_basis(CheckPrinter& check) {
  using namespace rrm;
  for (const auto& [name, grid] : verification_grids()) {
    const Classification cls = classify(grid);
    const BasisSet ext = build_extended_set(grid, cls);
    int bad = 0;
    for (CellIndex c : grid.active_cells())
      if (ext.cover[grid.ordinal(c)].size() != 9) ++bad;
    check.expect("coverage by nine functions (" + name + ")", bad == 0);
    check("identity residuals (" + name + ")", verify_identities(grid, ext).max_all(), 1e-10);
    const TensorGrid scaled = grid.with_ghost_scale(1.3);
    const BasisSet ext2 = build_extended_set(scaled, classify(scaled));
    check("identities, ghosts scaled 1.3x (" + name + ")",
          verify_identities(scaled, ext2).max_all(), 1e-10);
  }
  return 0;
}

int run_verify_interp(CheckPrinter& check) {
  using namespace rrm;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dim(0.3, 1.7), coef(-2, 2);
  double worst_cert = 0;
  for (int trial = 0; trial < 50; ++trial) {
    Patch3x3 p;
    p.center = {0, 0};
    for (int t = 0; t < 3; ++t) {
      p.lengths[t] = dim(rng);
      p.heights[t] = dim(rng);
    }
    p.origin_x = coef(rng);
    p.origin_y = coef(rng);
    const FiveCellStencil s = stencil(p);
    const std::array<double, 6> c{coef(rng), coef(rng), coef(rng),
                                  coef(rng), coef(rng), coef(rng)};
    auto poly = [&](double x, double y) {
      return c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y;
    };
    const Rect K = s.rects[4];
    double lambda = 0;
    for (int mu = 0; mu < 5; ++mu)
      lambda += s.weights[mu] * integrate(s.rects[mu], 2, poly) / s.rects[mu].area();
    const double t_K = integrate(K, 2, poly) / K.area() -
                       (K.width() * K.width() * 2 * c[3] + K.height() * K.height() * 2 * c[5]) / 6.0;
    worst_cert = std::max(worst_cert, std::abs(lambda - t_K));
  }
  check("stencil exactness certificate, 50 random patches", worst_cert, 1e-12);

  const TensorGrid grid = build_pattern(2, 0.65);
  const Classification cls = classify(grid);
  const BasisSet ext = build_extended_set(grid, cls);
  auto q = [](double x, double y) { return 0.7 - 1.3 * x + 0.4 * y + 2.1 * x * x - 0.8 * x * y + 1.6 * y * y; };
  const Interpolant ip = interpolate_extended(grid, ext, q, 2);
  double worst = 0;
  for (CellIndex c : grid.active_cells()) {
    const Rect r = grid.cell_rect(c);
    const P2Poly& p = ip.field.on_ordinal(grid.ordinal(c));
    for (int sy = 0; sy < 3; ++sy)
      for (int sx = 0; sx < 3; ++sx) {
        const double x = r.x0 + r.width() * sx / 2.0, y = r.y0 + r.height() * sy / 2.0;
        worst = std::max(worst, std::abs(p.value(x, y) - q(x, y)));
      }
  }
  check("extended interpolation reproduces a quadratic", worst, 1e-11);
  return 0;
}

int run_verify_assembly(CheckPrinter& check) {
  using namespace rrm;
  const TensorGrid grid = build_uniform({0, 0, 1, 1}, 8);
  const Classification cls = classify(grid);
  const BasisSet basis = build_interior_set(grid, cls);
  const ExampleSpec ex = example(1);
  const SparseSPDSystem sys = assemble(grid, basis, ex.rhs(0.25));
  check("A symmetry (relative)",
        (Eigen::MatrixXd(sys.A) - Eigen::MatrixXd(sys.A).transpose()).norm() /
            Eigen::MatrixXd(sys.A).norm(),
        1e-12);
  check("B symmetry (relative)",
        (Eigen::MatrixXd(sys.B) - Eigen::MatrixXd(sys.B).transpose()).norm() /
            Eigen::MatrixXd(sys.B).norm(),
        1e-12);
  for (double eps : {1.0, 1.0 / 64, 1.0 / 4096, 0.0}) {
    bool ok = true;
    double galerkin = 0;
    try {
      const Coefficients c = solve(sys, eps);
      Eigen::VectorXd cv = Eigen::Map<const Eigen::VectorXd>(c.values.data(), c.size());
      galerkin = ((eps * eps * sys.A + sys.B) * cv - sys.F).lpNorm<Eigen::Infinity>();
    } catch (const Error&) {
      ok = false;
    }
    check.expect("solve at eps = " + std::to_string(eps), ok);
    check("Galerkin residual at eps = " + std::to_string(eps), galerkin, 1e-10 * sys.F.norm());
  }
  int pattern_bad = 0;
  for (int a = 0; a < sys.dim; ++a)
    for (int b = 0; b < sys.dim; ++b) {
      const CellIndex ca = basis.fns[a].center, cb = basis.fns[b].center;
      const bool adjacent = std::abs(ca.i - cb.i) <= 2 && std::abs(ca.j - cb.j) <= 2;
      if (adjacent != (sys.B.coeff(a, b) != 0 || sys.A.coeff(a, b) != 0 ||
                       Eigen::MatrixXd(sys.B)(a, b) != 0))
        ++pattern_bad;
    }
  check.expect("sparsity pattern equals lattice distance <= 2", pattern_bad == 0);
  return 0;
}

int run_verify_projection(CheckPrinter& check) {
  using namespace rrm;
  const TensorGrid grid = build_uniform({0, 0, 1, 1}, 8);
  const Classification cls = classify(grid);
  const BasisSet ext = build_extended_set(grid, cls);
  const BasisSet interior = build_interior_set(grid, cls);
  const CellIndex k0{3, 3};
  std::vector<CellIndex> patch_cells;
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) patch_cells.push_back({k0.i + di, k0.j + dj});
  check.expect("patch is a completely subdomain",
               completely_subdomain_check(grid, cls, patch_cells));
  const RrmFamily fam(grid, ext);
  const ProjectivityResult res =
      projectivity_test(fam, subdomain_from_cells(grid, patch_cells), ext.index_of.at(k0));
  check.expect("restriction to the patch is representable", res.representable);
  check("representability residual (relative)", res.residual / res.norm_k, 1e-10);

  Eigen::VectorXd expected(res.members.size());
  for (std::size_t m = 0; m < res.members.size(); ++m) {
    const PatchBasisFn& fn = ext.fns[res.members[m]];
    const Rect r = grid.cell_rect(fn.center);
    expected(m) = parity_sign(fn.center) * r.area();
  }
  expected.normalize();
  Eigen::VectorXd got = res.witness.normalized();
  const double dev = std::min((got - expected).norm(), (got + expected).norm());
  check("witness vs checkerboard coefficients", dev, 1e-9);

  const RrmFamily fam_i(grid, interior);
  Subdomain omega = subdomain_from_cells(grid, grid.active_cells());
  bool all_not = true;
  for (int k = 0; k < interior.size(); ++k)
    if (projectivity_test(fam_i, omega, k).representable) all_not = false;
  check.expect("interior family independent on the whole domain", all_not);

  const auto rows = cr_dual_demo(4);
  for (const auto& row : rows)
    check("CR dual duality residual", row.duality_residual, 1e-9);
  return 0;
}

int cmd_verify(const std::string& suite) {
  CheckPrinter check;
  try {
    if (suite == "all" || suite == "basis") run_verify_basis(check);
    if (suite == "all" || suite == "interp") run_verify_interp(check);
    if (suite == "all" || suite == "assembly") run_verify_assembly(check);
    if (suite == "all" || suite == "projection") run_verify_projection(check);
  } catch (const std::exception& e) {
    std::cerr << "verification aborted: " << e.what() << "\n";
    return kExitNumerical;
  }
  if (check.failures > 0) {
    std::printf("%d check(s) failed\n", check.failures);
    return kExitNumerical;
  }
  std::printf("all checks passed\n");
  return 0;
}

void dump_system(const rrm::SparseSPDSystem& sys, const std::string& prefix) {
  auto dump_matrix = [](const Eigen::SparseMatrix<double>& M, const std::string& path) {
    std::ofstream os(path);
    os.precision(17);
    for (int col = 0; col < M.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(M, col); it; ++it)
        os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  };
  dump_matrix(sys.A, prefix + "_A.txt");
  dump_matrix(sys.B, prefix + "_B.txt");
  std::ofstream os(prefix + "_F.txt");
  os.precision(17);
  for (int k = 0; k < sys.F.size(); ++k) os << k << ' ' << sys.F(k) << '\n';
}

void dump_basis_fn(const rrm::TensorGrid& grid, const rrm::BasisSet& set, rrm::CellIndex c) {
  using namespace rrm;
  const auto it = set.index_of.find(c);
  if (it == set.index_of.end()) throw Error("--dump-basis: no basis function centered there");
  const PatchBasisFn& fn = set.fns[it->second];
  std::printf("phi centered at cell (%d, %d), anchor value %.17g\n", c.i, c.j, fn.anchor_value);
  for (int b = 0; b < 3; ++b)
    for (int a = 0; a < 3; ++a) {
      const CellIndex cell = fn.patch.cell_at(a, b);
      const P2Poly& p = fn.poly(a, b);
      std::printf("cell (%d, %d)%s frame(xc=%.17g yc=%.17g scale=%.17g)\n  coeffs", cell.i,
                  cell.j, grid.is_active(cell) ? "" : " [ghost]", p.xc, p.yc, p.scale);
      for (double v : p.c) std::printf(" %.17g", v);
      std::printf("\n");
    }
}

int cmd_convergence(int example_id, const std::string& mesh_name, double ratio,
                    std::string eps_arg, std::string levels_arg, const std::string& out_path,
                    bool check_tables, const std::string& dump_mesh_path,
                    const std::string& dump_basis_arg, const std::string& dump_system_prefix) {
  using namespace rrm;
  const MeshKind mesh = mesh_name == "pattern" ? MeshKind::pattern : MeshKind::uniform;

  std::vector<double> eps;
  std::vector<int> levels;
  if (eps_arg.empty() || levels_arg.empty()) {
    const GoldenTable& gold = golden_table(example_id, mesh);
    if (eps_arg.empty()) eps = gold.eps;
    if (levels_arg.empty()) levels = gold.levels;
  }
  if (!eps_arg.empty()) eps = parse_eps_list(eps_arg);
  if (!levels_arg.empty()) levels = parse_levels(levels_arg);
  if (eps.empty() || levels.empty()) {
    std::cerr << "convergence: empty eps or level list\n";
    return 1;
  }

  try {
    {
      const TensorGrid probe = study_grid(example_id, mesh, levels.front(), ratio);
      if (const double gamma = regularity(probe); gamma > kRegularityBound)
        std::cerr << "warning: shape regularity " << gamma << " exceeds the bound "
                  << kRegularityBound << "\n";
    }
    if (!dump_mesh_path.empty() || !dump_basis_arg.empty() || !dump_system_prefix.empty()) {
      const TensorGrid grid = study_grid(example_id, mesh, levels.front(), ratio);
      const Classification cls = classify(grid);
      if (!dump_mesh_path.empty()) {
        std::ofstream os(dump_mesh_path);
        grid.write_text(os);
      }
      if (!dump_basis_arg.empty()) {
        int ci = 0, cj = 0;
        if (std::sscanf(dump_basis_arg.c_str(), "%d,%d", &ci, &cj) != 2)
          throw Error("--dump-basis expects i,j");
        dump_basis_fn(grid, build_extended_set(grid, cls), {ci, cj});
      }
      if (!dump_system_prefix.empty()) {
        const BasisSet basis = build_interior_set(grid, cls);
        dump_system(assemble(grid, basis, example(example_id).rhs(eps.front())),
                    dump_system_prefix);
      }
    }

    const ConvergenceStudy study = run_convergence(example_id, mesh, eps, levels, ratio);
    if (out_path.empty()) {
      write_csv(std::cout, study);
    } else {
      std::ofstream os(out_path);
      write_csv(os, study);
      std::cout << "wrote " << out_path << "\n";
    }
    if (check_tables) {
      const GoldenTable& gold = golden_table(example_id, mesh);
      if (eps != gold.eps || levels != gold.levels) {
        std::cerr << "--check-tables requires the table's eps and level lattice "
                     "(omit --eps/--levels to use it)\n";
        return 1;
      }
      const TableCheck chk = check_against_golden(study, gold);
      std::printf("table check: %s (worst abs %.2e, worst rel %.2e, worst rate dev %.3f%s)\n",
                  chk.passed ? "pass" : "FAIL", chk.worst_abs, chk.worst_rel, chk.worst_rate_dev,
                  chk.rates_only ? ", rates gated only" : "");
      if (!chk.passed) return kExitTableCheck;
    }
  } catch (const std::exception& e) {
    std::cerr << "convergence failed: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}

int cmd_projection(const std::string& family, const std::string& selection, int n) {
  using namespace rrm;
  try {
    if (family == "rrm") {
      const TensorGrid grid = build_uniform({0, 0, 1, 1}, n);
      const Classification cls = classify(grid);
      if (selection == "patch") {
        const BasisSet ext = build_extended_set(grid, cls);
        const CellIndex k0{n / 2, n / 2};
        std::vector<CellIndex> cells;
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) cells.push_back({k0.i + di, k0.j + dj});
        if (!completely_subdomain_check(grid, cls, cells)) {
          std::cerr << "projection: central patch is not a completely subdomain; "
                       "use a larger grid\n";
          return 1;
        }
        const RrmFamily fam(grid, ext);
        const ProjectivityResult res =
            projectivity_test(fam, subdomain_from_cells(grid, cells), ext.index_of.at(k0));
        std::printf("family rrm, 3x3 patch at (%d, %d): %s (residual %.3e of norm %.3e)\n", k0.i,
                    k0.j, res.representable ? "Representable" : "NotRepresentable", res.residual,
                    res.norm_k);
        std::printf("witness (member center : coefficient, -1 marks the tested function):\n");
        for (std::size_t m = 0; m < res.members.size(); ++m) {
          const CellIndex c = ext.fns[res.members[m]].center;
          std::printf("  (%2d,%2d) : %+.12f\n", c.i, c.j, res.witness(m));
        }
        std::printf("no locally-defined projective interpolation exists for this basis.\n");
      } else if (selection == "omega") {
        const BasisSet interior = build_interior_set(grid, cls);
        const RrmFamily fam(grid, interior);
        const Subdomain omega = subdomain_from_cells(grid, grid.active_cells());
        int representable = 0;
        double min_rel = 1e300;
        for (int k = 0; k < interior.size(); ++k) {
          const ProjectivityResult res = projectivity_test(fam, omega, k);
          if (res.representable) ++representable;
          min_rel = std::min(min_rel, res.residual / res.norm_k);
        }
        std::printf("family rrm, D = Omega for all %d members: %d representable "
                    "(min relative residual %.3e)\n",
                    interior.size(), representable, min_rel);
        std::printf("global functionals always exist for an independent basis.\n");
      } else {
        std::cerr << "projection: rrm family supports selections patch, omega\n";
        return 1;
      }
      return 0;
    }
    // Crouzeix-Raviart demonstrations
    const CrMesh mesh(n);
    if (selection == "s3") {
      std::printf("CR dual coefficients on quarter-point rectangles, times h^2:\n");
      for (const auto& row : cr_dual_demo(n)) {
        const char* kind = row.kind == CrMesh::EdgeKind::horizontal  ? "horizontal"
                           : row.kind == CrMesh::EdgeKind::vertical ? "vertical"
                                                                    : "diagonal";
        std::printf("  %-10s edge %3d, quarter %.2f: [", kind, row.edge, row.quarter);
        for (int m = 0; m < row.coeffs_h2.size(); ++m)
          std::printf("%s%.6f", m ? ", " : "", row.coeffs_h2(m));
        std::printf("]  (duality residual %.2e)\n", row.duality_residual);
      }
      return 0;
    }
    if (selection == "s1" || selection == "s2") {
      const CrFamily fam(mesh);
      int representable = 0;
      for (int e = 0; e < mesh.num_edges(); ++e) {
        Subdomain d;
        if (selection == "s1") {
          d = quarter_rect(mesh, e, 0.5);  // midpoint neighborhood
        } else {
          const auto [A, B] = mesh.endpoints(e);
          const Vec2 dir = (B - A).normalized(), nrm(-dir.y(), dir.x());
          const double w = mesh.h() / 16.0;
          d.polys.push_back({{A - w * nrm, B - w * nrm, B + w * nrm, A + w * nrm}});
        }
        if (projectivity_test(fam, d, e).representable) ++representable;
      }
      std::printf("family cr, selection %s: %d of %d members representable\n", selection.c_str(),
                  representable, mesh.num_edges());
      std::printf("none representable: the %s interpolation is a projection.\n",
                  selection == "s1" ? "midpoint-value" : "edge-mean");
      return 0;
    }
    std::cerr << "projection: cr family supports selections s1, s2, s3\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "projection failed: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced rectangular Morley solver for eps^2 biharmonic - Laplace problems"};
  app.require_subcommand(1);

  auto* conv = app.add_subcommand("convergence", "manufactured-solution convergence study");
  int example_id = 1;
  std::string mesh_name = "uniform", eps_arg, levels_arg, out_path;
  double ratio = 0.65;
  bool check_tables = false;
  std::string dump_mesh_path, dump_basis_arg, dump_system_prefix;
  conv->add_option("--example", example_id, "example id")->check(CLI::IsMember({1, 2, 3}));
  conv->add_option("--mesh", mesh_name, "mesh family")
      ->check(CLI::IsMember({"uniform", "pattern"}));
  conv->add_option("--ratio", ratio, "pattern split ratio in (0,1)");
  conv->add_option("--eps", eps_arg, "comma list of eps values; 2^-k accepted");
  conv->add_option("--levels", levels_arg, "level range l1..l2 or comma list");
  conv->add_option("--out", out_path, "CSV output path (default stdout)");
  conv->add_flag("--check-tables", check_tables, "compare against the golden table");
  conv->add_option("--dump-mesh", dump_mesh_path, "write the first level's grid as text");
  conv->add_option("--dump-basis", dump_basis_arg, "print phi at cell i,j of the first level");
  conv->add_option("--dump-system", dump_system_prefix,
                   "write A/B/F of the first level and eps in coordinate text format");

  auto* verify = app.add_subcommand("verify", "run the property suites");
  std::string suite = "all";
  verify->add_option("--suite", suite, "which suite")
      ->check(CLI::IsMember({"all", "basis", "interp", "assembly", "projection"}));

  auto* proj = app.add_subcommand("projection", "local projectivity analysis");
  std::string family = "rrm", selection = "patch";
  int proj_n = 0;
  proj->add_option("--family", family, "basis family")->check(CLI::IsMember({"rrm", "cr"}));
  proj->add_option("--selection", selection, "subdomain selection")
      ->check(CLI::IsMember({"patch", "omega", "s1", "s2", "s3"}));
  proj->add_option("--n", proj_n, "grid resolution (default 8 for rrm, 4 for cr)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;  // help exits 0, usage errors exit 1
  }

  if (conv->parsed())
    return cmd_convergence(example_id, mesh_name, ratio, eps_arg, levels_arg, out_path,
                           check_tables, dump_mesh_path, dump_basis_arg, dump_system_prefix);
  if (verify->parsed()) return cmd_verify(suite);
  if (proj->parsed()) return cmd_projection(family, selection, proj_n ? proj_n : (family == "rrm" ? 8 : 4));
  return 1;
}
