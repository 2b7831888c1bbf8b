#include <doctest.h>

#include <cmath>
#include <memory>

#include "riskvi/benchmark.hpp"

using namespace riskvi;

namespace {

// Straight transcriptions of the construction, kept apart from the library.
double g(double t) { return t * t * t - t * t + 0.25 * t; }
double yhat_ref(double a, double b) {
  return (a > 0 && a < 0.5 && b > 0 && b < 0.5) ? 160.0 * g(a) * g(b) : 0.0;
}
double zhat_ref(double a, double b) {
  return std::max(0.0, -2 * std::abs(a - 0.8) - 2 * std::abs(a * b - 0.3) + 0.5);
}

}  // namespace

TEST_CASE("benchmark data: point values") {
  CHECK(y_hat({0.25, 0.25}) == doctest::Approx(0.0390625).epsilon(1e-15));
  CHECK(y_hat({0.75, 0.25}) == 0.0);
  CHECK(zeta_hat({0.8, 0.375}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(lap_y_hat({0.25, 0.25}) == doctest::Approx(-2.5).epsilon(1e-14));
  CHECK(lap_y_hat({0.6, 0.6}) == 0.0);
  // interior maximum of 160 g g at (1/6, 1/6)
  CHECK(y_hat({1.0 / 6, 1.0 / 6}) == doctest::Approx(160.0 / (54.0 * 54.0)).epsilon(1e-14));
  for (int i = 0; i <= 40; ++i)
    for (int j = 0; j <= 40; ++j) {
      const double a = i / 40.0, b = j / 40.0;
      CHECK(y_hat({a, b}) == doctest::Approx(yhat_ref(a, b)).epsilon(1e-14));
      CHECK(zeta_hat({a, b}) == doctest::Approx(zhat_ref(a, b)).epsilon(1e-14));
      CHECK(y_hat({a, b}) >= 0.0);
      CHECK(zeta_hat({a, b}) >= 0.0);
    }
}

TEST_CASE("lap_y_hat matches a five-point stencil") {
  // y_hat is bicubic inside its support, so the stencil is exact up to roundoff
  for (double h : {1e-2, 5e-3, 2.5e-3}) {
    double worst = 0.0;
    for (double a : {0.1, 0.2, 0.3, 0.4})
      for (double b : {0.1, 0.25, 0.4}) {
        const double fd = (yhat_ref(a + h, b) + yhat_ref(a - h, b) + yhat_ref(a, b + h) +
                           yhat_ref(a, b - h) - 4 * yhat_ref(a, b)) / (h * h);
        worst = std::max(worst, std::abs(fd - lap_y_hat({a, b})));
      }
    CHECK(worst < 50 * h * h);
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("interpolated y_hat on a 64x64 mesh") {
  const auto mesh = std::make_shared<const Mesh>(build_mesh(64, 64));
  const auto inst = make_instance(mesh, NoiseModel::MeanZero);
  double best = 0.0;
  for (std::size_t i = 0; i < mesh->node_count(); ++i) {
    const auto p = mesh->nodes[i];
    if (p.x1 == 0.25 && p.x2 == 0.25) CHECK(inst.y_hat[i] == doctest::Approx(0.0390625));
    best = std::max(best, inst.y_hat[i]);
  }
  // grid scan oracle
  double scan = 0.0;
  for (int i = 0; i <= 64; ++i)
    for (int j = 0; j <= 64; ++j) scan = std::max(scan, yhat_ref(i / 64.0, j / 64.0));
  CHECK(best == doctest::Approx(scan).epsilon(1e-14));
  CHECK(best <= 160.0 / (54.0 * 54.0));
}

TEST_CASE("rhs and target") {
  const auto mesh = std::make_shared<const Mesh>(build_mesh(20, 20));
  for (auto model : {NoiseModel::MeanZero, NoiseModel::Lognormal}) {
    const auto inst = make_instance(mesh, model);
    const auto& yd = inst.y_d;
    const auto target = build_target(inst);
    for (std::size_t i = 0; i < mesh->node_count(); ++i) {
      CHECK(yd[i] == inst.y_hat[i] + inst.zeta_hat[i] - inst.lap_y_hat[i]);
      CHECK(target[i] == yd[i]);
      const auto p = mesh->nodes[i];
      if (p.x1 > 0.5 || p.x2 > 0.5) CHECK(yd[i] == doctest::Approx(inst.zeta_hat[i]));
    }
    std::vector<double> xi(inst.expansion.size(), 0.0);
    if (model == NoiseModel::MeanZero) {
      const auto f = build_rhs(inst, xi);
      for (std::size_t i = 0; i < mesh->node_count(); ++i) {
        CHECK(f[i] == doctest::Approx(-inst.lap_y_hat[i] - inst.y_hat[i] - inst.zeta_hat[i]).epsilon(1e-15));
        const auto p = mesh->nodes[i];
        if (p.x1 == 0.25 && p.x2 == 0.25) {
          CHECK(f[i] == doctest::Approx(2.5 - 0.0390625 - zhat_ref(0.25, 0.25)));
          CHECK(yd[i] == doctest::Approx(0.0390625 + zhat_ref(0.25, 0.25) + 2.5));
        }
      }
    }
    Rng rng(1);
    for (auto& v : xi) v = rng.uniform(-0.2, 0.2);
    const auto f = build_rhs(inst, xi);
    for (std::size_t i = 0; i < mesh->node_count(); ++i) {
      const auto p = mesh->nodes[i];
      if (p.x1 == 0.9 && p.x2 == 0.9) CHECK(f[i] == doctest::Approx(-zhat_ref(0.9, 0.9)));
    }
    CHECK_THROWS_AS(build_rhs(inst, std::vector<double>(3)), std::invalid_argument);
  }
}

TEST_CASE("biactive region of the construction has positive area") {
  // {y_hat = 0} and {zeta_hat = 0}: both the state and the multiplier vanish
  const int n = 512;
  int count = 0, strict = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double a = (i + 0.5) / n, b = (j + 0.5) / n;
      if (yhat_ref(a, b) == 0.0 && zhat_ref(a, b) == 0.0) ++count;
      if (yhat_ref(a, b) == 0.0 && zhat_ref(a, b) > 0.0) ++strict;
    }
  CHECK(static_cast<double>(count) / (n * n) > 0.05);
  CHECK(static_cast<double>(strict) / (n * n) > 0.05);
}
