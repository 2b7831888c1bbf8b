#include "riskvi/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace riskvi {

namespace {

double g(double t) { return t * t * t - t * t + 0.25 * t; }

bool in_square(Point x) { return x.x1 >= 0.0 && x.x1 <= 0.5 && x.x2 >= 0.0 && x.x2 <= 0.5; }

}  // namespace

double y_hat(Point x) { return in_square(x) ? 160.0 * g(x.x1) * g(x.x2) : 0.0; }

double zeta_hat(Point x) {
  return std::max(0.0, -2.0 * std::abs(x.x1 - 0.8) - 2.0 * std::abs(x.x1 * x.x2 - 0.3) + 0.5);
}

double lap_y_hat(Point x) {
  if (!in_square(x)) return 0.0;
  return 160.0 * ((6.0 * x.x1 - 2.0) * g(x.x2) + g(x.x1) * (6.0 * x.x2 - 2.0));
}

BenchmarkInstance make_instance(std::shared_ptr<const Mesh> mesh, KlExpansion expansion,
                                RiskParams risk) {
  risk.validate();
  BenchmarkInstance inst;
  inst.system = FemSystem::build(std::move(mesh));
  const auto& m = inst.system.mesh;
  inst.y_hat = interpolate(m, y_hat);
  inst.zeta_hat = interpolate(m, zeta_hat);
  inst.lap_y_hat = interpolate(m, lap_y_hat);
  inst.field = FieldTabulation(expansion, *m);
  inst.expansion = std::move(expansion);
  inst.risk = risk;
  inst.y_d = build_target(inst);
  inst.f_base = FemFunction(m);
  for (std::size_t i = 0; i < m->node_count(); ++i) {
    inst.f_base[i] = -inst.lap_y_hat[i] - inst.y_hat[i] - inst.zeta_hat[i];
  }
  return inst;
}

BenchmarkInstance make_instance(std::shared_ptr<const Mesh> mesh, NoiseModel model,
                                RiskParams risk) {
  return make_instance(std::move(mesh), make_expansion(model), risk);
}

FemFunction build_rhs(const BenchmarkInstance& instance, std::span<const double> xi) {
  if (xi.size() != instance.expansion.size()) {
    throw std::invalid_argument("build_rhs: xi length does not match the expansion");
  }
  const auto b = instance.field.evaluate(xi);
  FemFunction f(instance.mesh_ptr());
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = -instance.lap_y_hat[i] - instance.y_hat[i] - instance.zeta_hat[i] - b[i];
  }
  return f;
}

FemFunction build_target(const BenchmarkInstance& instance) {
  FemFunction yd(instance.mesh_ptr());
  for (std::size_t i = 0; i < yd.size(); ++i) {
    yd[i] = instance.y_hat[i] + instance.zeta_hat[i] - instance.lap_y_hat[i];
  }
  return yd;
}

}  // namespace riskvi
