#include "riskvi/run.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "riskvi/benchmark.hpp"
#include "riskvi/io.hpp"

namespace riskvi {

namespace fs = std::filesystem;

FemFunction read_field_csv(const std::string& path, const std::shared_ptr<const Mesh>& mesh) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "x1,x2,value") {
    throw std::runtime_error(path + ": expected header x1,x2,value");
  }
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double x1 = 0, x2 = 0, v = 0;
    char c1 = 0, c2 = 0;
    std::istringstream row(line);
    if (!(row >> x1 >> c1 >> x2 >> c2 >> v) || c1 != ',' || c2 != ',') {
      throw std::runtime_error(path + ": malformed row '" + line + "'");
    }
    const std::size_t i = values.size();
    if (i >= mesh->node_count() || std::abs(mesh->nodes[i].x1 - x1) > 1e-12 ||
        std::abs(mesh->nodes[i].x2 - x2) > 1e-12) {
      throw std::runtime_error(path + ": field does not match the configured mesh");
    }
    values.push_back(v);
  }
  if (values.size() != mesh->node_count()) {
    throw std::runtime_error(path + ": field does not match the configured mesh");
  }
  return FemFunction(mesh, std::move(values));
}

namespace {

std::string join(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

std::string manifest_text(const RunConfig& config) {
  std::string out = "# riskvi " + std::string(kVersion) + "\n";
  out += "# compiler " + std::string(__VERSION__) + "\n";
  out += "# seed " + std::to_string(config.svrg.seed) + "\n";
  return out + config.to_text();
}

BenchmarkInstance instance_for(const RunConfig& config) {
  auto mesh = std::make_shared<const Mesh>(build_mesh(config.nx, config.ny, config.order));
  return make_instance(mesh, config.noise, config.risk);
}

void write_terminal_fields(const RunConfig& config, const BenchmarkInstance& inst,
                           const RunReport& rep) {
  const auto& dir = config.output;
  write_field_csv(join(dir, "control.csv"), rep.control.z);
  write_field_csv(join(dir, "mean_state.csv"), rep.mean_y);
  write_field_csv(join(dir, "mean_multiplier.csv"), rep.mean_zeta);
  const NamedField fields[] = {
      {"control", rep.control.z.values()},
      {"mean_state", rep.mean_y.values()},
      {"mean_multiplier", rep.mean_zeta.values()},
      {"y_hat", inst.y_hat.values()},
      {"zeta_hat", inst.zeta_hat.values()},
  };
  write_fields_vtk(join(dir, "fields.vtk"), inst.mesh(), fields);
}

int run_optimize(const RunConfig& config, std::ostream& log) {
  const auto inst = instance_for(config);
  const auto start = std::chrono::steady_clock::now();
  auto on_row = [&](const HistoryRow& r) {
    log << "tau=" << format_double(r.tau) << " epoch=" << r.epoch
        << " objective=" << format_double(r.objective) << " residual=" << format_double(r.residual)
        << " pde_solves=" << r.pde_solves << '\n'
        << std::flush;
  };
  const auto rep = run_path_following(inst, config.svrg, on_row);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto& dir = config.output;
  write_file_atomic(join(dir, "history.csv"), history_csv(rep));
  write_file_atomic(join(dir, "timing.csv"), timing_csv(rep));
  write_file_atomic(join(dir, "stationarity.csv"), stationarity_csv(rep));
  write_terminal_fields(config, inst, rep);

  nlohmann::ordered_json summary;
  summary["objective"] = rep.objective;
  summary["s"] = rep.control.s;
  summary["residual"] = rep.residual;
  summary["tol"] = rep.tol;
  summary["h"] = inst.mesh().h;
  summary["converged"] = rep.converged;
  summary["epochs"] = rep.epochs;
  summary["inner_steps"] = rep.inner_steps;
  summary["full_grad_count"] = rep.full_grad_count;
  summary["pde_solves"] = rep.pde_solves;
  summary["report_pde_solves"] = rep.report_pde_solves;
  summary["wall_seconds"] = wall;
  write_file_atomic(join(dir, "summary.json"), summary.dump(2) + "\n");
  write_file_atomic(join(dir, "manifest.txt"), manifest_text(config));

  log << "objective " << format_double(rep.objective) << ", s " << format_double(rep.control.s)
      << ", " << (rep.converged ? "converged" : "NOT converged") << '\n';
  return 0;
}

// Recomputes the stationarity table of a finished run along the whole ladder,
// warm-starting each tau from the previous one.
int run_stationarity(const RunConfig& config, std::ostream& log) {
  const auto inst = instance_for(config);
  Control u;
  u.z = read_field_csv(join(config.from, "control.csv"), inst.mesh_ptr());
  const auto summary = nlohmann::json::parse(read_file(join(config.from, "summary.json")));
  u.s = summary.at("s").get<double>();
  const auto samples = draw_run_samples(inst, config.svrg);
  WarmStarts warm;
  std::string out = StationarityReport::csv_header() + "\n";
  for (const double tau : config.svrg.tau_ladder()) {
    const auto rep = stationarity_report(inst, u, samples, PenaltyParams{tau}, config.svrg.gradient,
                                         &warm);
    out += rep.csv_row() + "\n";
    log << "tau=" << format_double(tau) << " comp_state=" << format_double(rep.comp_state)
        << " sign_lambda_p=" << format_double(rep.sign_lambda_p)
        << " violation=" << format_double(rep.constraint_violation) << '\n';
  }
  write_file_atomic(join(config.output, "stationarity.csv"), out);
  write_file_atomic(join(config.output, "manifest.txt"), manifest_text(config));
  return 0;
}

// One realization b(., xi_1) per noise model, xi_1 the first sample drawn
// from the configured seed.
int run_field_preview(const RunConfig& config, std::ostream& log) {
  auto mesh = std::make_shared<const Mesh>(build_mesh(config.nx, config.ny, config.order));
  std::vector<std::vector<double>> fields;
  for (const auto model : {NoiseModel::MeanZero, NoiseModel::Lognormal}) {
    const auto expansion = make_expansion(model);
    const auto set = sample_xi(expansion, 1, config.svrg.seed);
    fields.push_back(FieldTabulation(expansion, *mesh).evaluate(set.samples.front()));
    const auto name = "field_" + to_string(model) + ".csv";
    write_file_atomic(join(config.output, name.c_str()), field_csv(*mesh, fields.back()));
    log << "wrote " << name << '\n';
  }
  const NamedField named[] = {{"field_mean_zero", fields[0]}, {"field_lognormal", fields[1]}};
  write_fields_vtk(join(config.output, "fields.vtk"), *mesh, named);
  write_file_atomic(join(config.output, "manifest.txt"), manifest_text(config));
  return 0;
}

}  // namespace

int run(const RunConfig& config, std::ostream& log) {
  config.validate();
  switch (config.mode) {
    case RunMode::Optimize: return run_optimize(config, log);
    case RunMode::StationarityOnly: return run_stationarity(config, log);
    case RunMode::FieldPreview: return run_field_preview(config, log);
  }
  return 1;
}

}  // namespace riskvi
