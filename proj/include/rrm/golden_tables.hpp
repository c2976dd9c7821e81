#pragma once

#include <vector>

#include "rrm/study.hpp"

namespace rrm {

/// Golden reference values of the six convergence studies (relative energy
/// errors to four decimals and fitted rates), used by the acceptance suite
/// and the CLI `--check-tables` mode.
struct GoldenTable {
  int example_id;
  MeshKind mesh;
  std::vector<double> eps;
  std::vector<int> levels;
  std::vector<double> h;
  std::vector<std::vector<double>> rel_energy;  // [eps][level]
  std::vector<double> rate;
};

inline const std::vector<GoldenTable>& golden_tables() {
  auto uniform_levels = std::vector<int>{2, 3, 4, 5, 6};
  auto pattern_levels = std::vector<int>{1, 2, 3, 4, 5};
  auto uniform_h = std::vector<double>{0.25, 0.125, 0.0625, 0.03125, 0.015625};
  auto pattern_h = std::vector<double>{0.325, 0.1625, 0.08125, 0.040625, 0.0203125};
  const double e0 = 1.0, e2 = 0.25, e4 = 0.0625, e6 = 1.0 / 64, e8 = 1.0 / 256,
               e10 = 1.0 / 1024, e12 = 1.0 / 4096;
  static const std::vector<GoldenTable> tables = {
      {1,
       MeshKind::pattern,
       {e0, e2, e4, e6, e8, e10},
       pattern_levels,
       pattern_h,
       {{0.6196, 0.3127, 0.1556, 0.0776, 0.0388},
        {0.5691, 0.2798, 0.1380, 0.0686, 0.0343},
        {0.3691, 0.1597, 0.0699, 0.0330, 0.0162},
        {0.2825, 0.1318, 0.0553, 0.0192, 0.0064},
        {0.2746, 0.1337, 0.0664, 0.0311, 0.0127},
        {0.2741, 0.1339, 0.0676, 0.0338, 0.0166}},
       {1.00, 1.01, 1.13, 1.37, 1.10, 1.01}},
      {1,
       MeshKind::uniform,
       {e0, e2, e4, e6, e8, e10},
       uniform_levels,
       uniform_h,
       {{0.5403, 0.2754, 0.1376, 0.0688, 0.0344},
        {0.4890, 0.2448, 0.1218, 0.0608, 0.0304},
        {0.2926, 0.1238, 0.0585, 0.0288, 0.0144},
        {0.2080, 0.0585, 0.0199, 0.0084, 0.0040},
        {0.2002, 0.0502, 0.0130, 0.0037, 0.0013},
        {0.1996, 0.0496, 0.0124, 0.0031, 0.0008}},
       {0.99, 1.00, 1.08, 1.42, 1.84, 1.99}},
      {2,
       MeshKind::pattern,
       {e0, e2, e4, e6, e8, e10},
       pattern_levels,
       pattern_h,
       {{0.6236, 0.3142, 0.1558, 0.0776, 0.0388},
        {0.5722, 0.2812, 0.1382, 0.0687, 0.0343},
        {0.3711, 0.1610, 0.0700, 0.0330, 0.0162},
        {0.2863, 0.1349, 0.0556, 0.0192, 0.0064},
        {0.2787, 0.1373, 0.0668, 0.0312, 0.0127},
        {0.2782, 0.1375, 0.0681, 0.0338, 0.0166}},
       {1.00, 1.02, 1.13, 1.38, 1.11, 1.02}},
      {2,
       MeshKind::uniform,
       {e0, e2, e4, e6, e8, e10},
       uniform_levels,
       uniform_h,
       {{0.5463, 0.2763, 0.1377, 0.0688, 0.0344},
        {0.4938, 0.2456, 0.1219, 0.0608, 0.0304},
        {0.2937, 0.1242, 0.0586, 0.0288, 0.0144},
        {0.2077, 0.0585, 0.0200, 0.0084, 0.0040},
        {0.1997, 0.0502, 0.0130, 0.0037, 0.0013},
        {0.1991, 0.0496, 0.0124, 0.0031, 0.0008}},
       {1.00, 1.01, 1.08, 1.42, 1.84, 1.98}},
      {3,
       MeshKind::pattern,
       {e8, e10, e12},
       pattern_levels,
       pattern_h,
       {{0.5846, 0.3945, 0.2755, 0.1995, 0.1555},
        {0.5843, 0.3934, 0.2725, 0.1912, 0.1358},
        {0.5843, 0.3933, 0.2723, 0.1907, 0.1343}},
       {0.48, 0.53, 0.53}},
      {3,
       MeshKind::uniform,
       {e8, e10, e12},
       uniform_levels,
       uniform_h,
       {{0.5731, 0.3896, 0.2743, 0.1992, 0.1549},
        {0.5728, 0.3886, 0.2714, 0.1913, 0.1362},
        {0.5728, 0.3885, 0.2712, 0.1908, 0.1347}},
       {0.47, 0.52, 0.52}}};
  return tables;
}

inline const GoldenTable& golden_table(int example_id, MeshKind mesh) {
  for (const GoldenTable& t : golden_tables())
    if (t.example_id == example_id && t.mesh == mesh) return t;
  throw Error("golden_table: no table for this example/mesh combination");
}

/// Outcome of comparing one study against its golden table.
struct TableCheck {
  int cells_checked = 0;
  int cells_failed = 0;        // gated on uniform tables only
  double worst_abs = 0;
  double worst_rel = 0;
  int rates_failed = 0;
  double worst_rate_dev = 0;
  bool rates_only = false;     // pattern tables gate on rates alone
  bool passed = false;
};

/// Uniform tables gate each cell at |err - golden| <= 5e-4 or 2% relative and
/// rates at +-0.05; pattern tables gate rates at +-0.1 only (the pattern
/// proportions are inferred, so magnitudes are reported, not gated).
inline TableCheck check_against_golden(const ConvergenceStudy& study, const GoldenTable& gold) {
  if (study.eps.size() != gold.eps.size() || study.levels != gold.levels)
    throw Error("check_against_golden: study lattice does not match the table");
  TableCheck chk;
  chk.rates_only = gold.mesh == MeshKind::pattern;
  const double rate_tol = chk.rates_only ? 0.1 : 0.05;
  for (std::size_t e = 0; e < gold.eps.size(); ++e) {
    for (std::size_t l = 0; l < gold.levels.size(); ++l) {
      const double got = study.rows[e][l].rel_energy;
      const double want = gold.rel_energy[e][l];
      const double abs_dev = std::abs(got - want);
      const double rel_dev = abs_dev / want;
      ++chk.cells_checked;
      chk.worst_abs = std::max(chk.worst_abs, abs_dev);
      chk.worst_rel = std::max(chk.worst_rel, rel_dev);
      const double rel_gate = chk.rates_only ? 0.25 : 0.02;
      const bool ok = rel_dev <= rel_gate || (!chk.rates_only && abs_dev <= 5e-4);
      if (!ok && !chk.rates_only) ++chk.cells_failed;
    }
    const double rate_dev = std::abs(study.rates[e].energy - gold.rate[e]);
    chk.worst_rate_dev = std::max(chk.worst_rate_dev, rate_dev);
    if (rate_dev > rate_tol) ++chk.rates_failed;
  }
  chk.passed = chk.cells_failed == 0 && chk.rates_failed == 0;
  return chk;
}

}  // namespace rrm
