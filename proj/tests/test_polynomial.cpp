#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rrm/polynomial.hpp"

using namespace rrm;

TEST_CASE("one-point rule is the midpoint rule", "[polynomial]") {
  const Rect cell{0, 0, 1, 1};
  const QuadRule q = gauss_rect(cell, 1);
  REQUIRE(q.size() == 1);
  CHECK(q.x[0] == Catch::Approx(0.5));
  CHECK(q.y[0] == Catch::Approx(0.5));
  CHECK(q.w[0] == Catch::Approx(1.0));
}

TEST_CASE("tensor Gauss integrates x^2 y^2 exactly at order 2", "[polynomial]") {
  const double v = integrate({0, 0, 1, 1}, 2, [](double x, double y) { return x * x * y * y; });
  CHECK(v == Catch::Approx(1.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("order 10 handles the trigonometric load", "[polynomial]") {
  const double v = integrate({0, 0, 1, 1}, 10, [](double x, double y) {
    const double sx = std::sin(M_PI * x), sy = std::sin(M_PI * y);
    return sx * sx * sy * sy;
  });
  CHECK(std::abs(v - 0.25) < 1e-12);
}

TEST_CASE("order-2 exactness for random biquadratics", "[polynomial]") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> coef(-3, 3);
  for (int trial = 0; trial < 50; ++trial) {
    std::array<double, 16> c;
    for (double& v : c) v = coef(rng);
    const Rect cell{coef(rng), coef(rng), 0, 0};
    Rect r{cell.x0, cell.y0, cell.x0 + std::abs(coef(rng)) + 0.1,
           cell.y0 + std::abs(coef(rng)) + 0.1};
    auto f = [&](double x, double y) {
      double s = 0;
      for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) s += c[4 * p + q] * std::pow(x, p) * std::pow(y, q);
      return s;
    };
    // monomial antiderivatives give the exact value
    double exact = 0;
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q)
        exact += c[4 * p + q] * (std::pow(r.x1, p + 1) - std::pow(r.x0, p + 1)) / (p + 1) *
                 (std::pow(r.y1, q + 1) - std::pow(r.y0, q + 1)) / (q + 1);
    const double got = integrate(r, 2, f);
    CHECK(std::abs(got - exact) <= 1e-13 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("constant dofs recover the constant", "[polynomial]") {
  MorleyDofs d;
  d.vertex_values = {1, 1, 1, 1};
  d.edge_normal_means = {0, 0, 0, 0};
  const P2Fit fit = fit_p2_from_morley({0.2, -0.4, 1.1, 0.6}, d);
  CHECK(fit.residual < 1e-13);
  CHECK(fit.poly.value(0.37, 0.11) == Catch::Approx(1.0));
}

TEST_CASE("dofs of x^2 on the unit cell recover x^2", "[polynomial]") {
  MorleyDofs d;
  d.vertex_values = {0, 1, 0, 1};               // LL, LR, UL, UR
  d.edge_normal_means = {0, 0, -0, 2};          // bottom, top, left, right outward
  const Rect cell{0, 0, 1, 1};
  const P2Fit fit = fit_p2_from_morley(cell, d);
  CHECK(fit.residual < 1e-12);
  for (double x : {0.0, 0.3, 0.71, 1.0})
    for (double y : {0.0, 0.5, 1.0})
      CHECK(fit.poly.value(x, y) == Catch::Approx(x * x).margin(1e-12));
}

TEST_CASE("perturbed dofs are rejected", "[polynomial]") {
  MorleyDofs d;
  d.vertex_values = {0, 1, 0, 1};
  d.edge_normal_means = {0, 0, 0, 2};
  d.vertex_values[0] += 1.0;
  CHECK_THROWS_AS(fit_p2_from_morley({0, 0, 1, 1}, d), InconsistentDofs);
}

TEST_CASE("fit is the inverse of dof extraction", "[polynomial]") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> coef(-2, 2), pos(-5, 5), len(0.05, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    Rect cell;
    cell.x0 = pos(rng);
    cell.y0 = pos(rng);
    cell.x1 = cell.x0 + len(rng);
    cell.y1 = cell.y0 + len(rng);
    P2Poly p = P2Poly::zero(cell);
    for (double& c : p.c) c = coef(rng);
    const MorleyDofs d = morley_dofs_of(
        cell, [&](double x, double y) { return p.value(x, y); },
        [&](double x, double y) { return p.gradient(x, y); });
    const P2Fit fit = fit_p2_from_morley(cell, d);
    for (int k = 0; k < 6; ++k) CHECK(std::abs(fit.poly.c[k] - p.c[k]) < 1e-12);
  }
}

TEST_CASE("value, gradient, and Hessian in the local frame", "[polynomial]") {
  P2Poly p = P2Poly::zero({0, 0, 2, 2});  // xc = yc = 1, scale = 2
  p.c = {0, 0, 0, 1, 0, 0};               // xi^2
  CHECK(p.value(1, 1) == 0.0);
  CHECK(p.gradient(1, 1)[0] == 0.0);
  CHECK(p.hessian()[0] == Catch::Approx(2.0 / 4.0));

  P2Poly q = P2Poly::zero({0, 0, 2, 2});
  q.c = {0, 0, 0, 0, 1, 0};  // xi * eta
  CHECK(q.hessian()[1] == Catch::Approx(1.0 / 4.0));
}

TEST_CASE("gradient matches central differences", "[polynomial]") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> coef(-2, 2);
  P2Poly p = P2Poly::zero({-0.5, 0.25, 0.75, 1.5});
  for (double& c : p.c) c = coef(rng);
  const double step = 1e-6;
  for (double x : {-0.3, 0.2, 0.6})
    for (double y : {0.3, 0.9, 1.4}) {
      const auto g = p.gradient(x, y);
      const double fdx = (p.value(x + step, y) - p.value(x - step, y)) / (2 * step);
      const double fdy = (p.value(x, y + step) - p.value(x, y - step)) / (2 * step);
      CHECK(std::abs(g[0] - fdx) < 1e-8);
      CHECK(std::abs(g[1] - fdy) < 1e-8);
    }
}

TEST_CASE("derivatives are frame independent", "[polynomial]") {
  // same quadratic expressed in two local frames
  auto build = [](const Rect& frame) {
    // v(x, y) = 3 + x - 2y + 0.5 x^2 - xy + 2 y^2 via dof fit on the frame
    const auto value = [](double x, double y) {
      return 3 + x - 2 * y + 0.5 * x * x - x * y + 2 * y * y;
    };
    const auto grad = [](double x, double y) -> std::array<double, 2> {
      return {1 + x - y, -2 - x + 4 * y};
    };
    return fit_p2_from_morley(frame, morley_dofs_of(frame, value, grad)).poly;
  };
  const P2Poly a = build({0, 0, 1, 1});
  const P2Poly b = build({-2, -3, 6, 1});
  for (double x : {0.1, 0.8})
    for (double y : {0.2, 0.9}) {
      CHECK(a.value(x, y) == Catch::Approx(b.value(x, y)).epsilon(1e-12));
      CHECK(a.gradient(x, y)[0] == Catch::Approx(b.gradient(x, y)[0]).epsilon(1e-12));
      CHECK(a.gradient(x, y)[1] == Catch::Approx(b.gradient(x, y)[1]).epsilon(1e-12));
      CHECK(a.hessian()[0] == Catch::Approx(b.hessian()[0]).epsilon(1e-12));
      CHECK(a.hessian()[1] == Catch::Approx(b.hessian()[1]).epsilon(1e-12));
      CHECK(a.hessian()[2] == Catch::Approx(b.hessian()[2]).epsilon(1e-12));
    }
}
