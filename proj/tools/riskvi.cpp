// Batch front end: riskvi run | preview-fields | check-stationarity.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "riskvi/run.hpp"

namespace {

// Applies trailing `--key value` / `--key=value` overrides.
void apply_overrides(riskvi::RunConfig& config, const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) throw std::invalid_argument("unexpected argument '" + a + "'");
    const auto eq = a.find('=');
    if (eq != std::string::npos) {
      config.set(a.substr(2, eq - 2), a.substr(eq + 1));
    } else {
      if (i + 1 == args.size()) throw std::invalid_argument("missing value for " + a);
      config.set(a.substr(2), args[++i]);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-averse optimal control of a random obstacle problem"};
  app.set_version_flag("--version", riskvi::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string from;
  std::string output;

  auto* run = app.add_subcommand("run", "Solve with path-following SVRG; extra --key value pairs override the config");
  run->add_option("--config", config_path, "Flat key=value config file")->check(CLI::ExistingFile);
  run->allow_extras();

  auto* preview = app.add_subcommand("preview-fields", "Write one noise realization per model");
  preview->add_option("--config", config_path, "Flat key=value config file")->check(CLI::ExistingFile);
  preview->allow_extras();

  auto* check = app.add_subcommand("check-stationarity", "Recompute stationarity residuals of a finished run");
  check->add_option("--from", from, "Output directory of an optimize run")->required()->check(CLI::ExistingDirectory);
  check->add_option("--output", output, "Where to write stationarity.csv (default: --from)");

  CLI11_PARSE(app, argc, argv);

  riskvi::RunConfig config;
  try {
    if (*check) {
      config = riskvi::load_config((std::filesystem::path(from) / "manifest.txt").string());
      config.mode = riskvi::RunMode::StationarityOnly;
      config.from = from;
      config.output = output.empty() ? from : output;
    } else {
      auto* sub = *run ? run : preview;
      if (!config_path.empty()) config = riskvi::load_config(config_path);
      apply_overrides(config, sub->remaining());
      config.mode = *run ? riskvi::RunMode::Optimize : riskvi::RunMode::FieldPreview;
    }
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "riskvi: " << e.what() << '\n';
    return 2;
  }

  try {
    return riskvi::run(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "riskvi: " << e.what() << '\n';
    return 1;
  }
}
