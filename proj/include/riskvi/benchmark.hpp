#pragma once

#include <memory>
#include <span>

#include "riskvi/fem.hpp"
#include "riskvi/random_field.hpp"
#include "riskvi/risk.hpp"

namespace riskvi {

/// Smooth part of the construction: 160 g(x1) g(x2) on [0, 1/2]^2 with
/// g(t) = t^3 - t^2 + t/4 = t (t - 1/2)^2, zero elsewhere. C^1 across the
/// edge of its support.
double y_hat(Point x);
double zeta_hat(Point x);
/// Piecewise classical Laplacian of y_hat. Evaluated with the inside formula
/// on the closed square [0, 1/2]^2; no interface term.
double lap_y_hat(Point x);

/// The fixed test instance: deterministic data, noise model and risk level.
/// The obstacle is identically zero.
struct BenchmarkInstance {
  FemSystem system;
  FemFunction y_hat;
  FemFunction zeta_hat;
  FemFunction lap_y_hat;
  FemFunction y_d;
  /// -lap_y_hat - y_hat - zeta_hat, the noise-free part of f
  FemFunction f_base;
  KlExpansion expansion;
  FieldTabulation field;
  RiskParams risk;

  const Mesh& mesh() const { return *system.mesh; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return system.mesh; }
};

BenchmarkInstance make_instance(std::shared_ptr<const Mesh> mesh, NoiseModel model,
                                RiskParams risk = {});
BenchmarkInstance make_instance(std::shared_ptr<const Mesh> mesh, KlExpansion expansion,
                                RiskParams risk = {});

/// f(., xi) = -lap y_hat - y_hat - zeta_hat - b(., xi), nodally.
FemFunction build_rhs(const BenchmarkInstance& instance, std::span<const double> xi);
/// y_d = y_hat + zeta_hat - lap y_hat, nodally.
FemFunction build_target(const BenchmarkInstance& instance);

}  // namespace riskvi
