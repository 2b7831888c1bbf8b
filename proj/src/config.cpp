#include "riskvi/config.hpp"

#include <charconv>
#include <stdexcept>
#include <string>

#include "riskvi/io.hpp"

namespace riskvi {

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Optimize: return "optimize";
    case RunMode::StationarityOnly: return "stationarity_only";
    case RunMode::FieldPreview: return "field_preview";
  }
  return "optimize";
}

RunMode parse_run_mode(std::string_view text) {
  if (text == "optimize") return RunMode::Optimize;
  if (text == "stationarity_only") return RunMode::StationarityOnly;
  if (text == "field_preview") return RunMode::FieldPreview;
  throw std::invalid_argument("unknown mode '" + std::string(text) + "'");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("bad value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw std::invalid_argument("bad value '" + std::string(text) + "' for " + std::string(key));
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k{
      "mode",  "noise",      "beta",           "epsilon",         "nx",        "ny",
      "order", "n",          "seed",           "tau_initial",     "tau_final", "gamma",
      "r",     "tol",        "max_epochs",     "z_initial",       "s_initial", "strict",
      "stop_rule", "workers", "newton_rel_tol", "adjoint_rel_tol", "output",   "from"};
  return k;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "mode") mode = parse_run_mode(value);
  else if (key == "noise") noise = parse_noise_model(std::string(value));
  else if (key == "beta") risk.beta = parse_number<double>(key, value);
  else if (key == "epsilon") risk.epsilon = parse_number<double>(key, value);
  else if (key == "nx") nx = parse_number<int>(key, value);
  else if (key == "ny") ny = parse_number<int>(key, value);
  else if (key == "order") order = parse_number<int>(key, value);
  else if (key == "n") svrg.n = parse_number<std::size_t>(key, value);
  else if (key == "seed") svrg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "tau_initial") svrg.tau_initial = parse_number<double>(key, value);
  else if (key == "tau_final") svrg.tau_final = parse_number<double>(key, value);
  else if (key == "gamma") svrg.gamma = parse_number<double>(key, value);
  else if (key == "r") svrg.update_frequency = parse_number<long>(key, value);
  else if (key == "tol") svrg.tol = parse_number<double>(key, value);
  else if (key == "max_epochs") svrg.max_epochs = parse_number<long>(key, value);
  else if (key == "z_initial") svrg.z_initial = parse_number<double>(key, value);
  else if (key == "s_initial") svrg.s_initial = parse_number<double>(key, value);
  else if (key == "strict") svrg.strict = parse_bool(key, value);
  else if (key == "stop_rule") svrg.stop_rule = parse_stop_rule(value);
  else if (key == "workers") svrg.gradient.workers = parse_number<std::size_t>(key, value);
  else if (key == "newton_rel_tol") svrg.gradient.newton_rel_tol = parse_number<double>(key, value);
  else if (key == "adjoint_rel_tol") svrg.gradient.adjoint_rel_tol = parse_number<double>(key, value);
  else if (key == "output") output = std::string(value);
  else if (key == "from") from = std::string(value);
  else throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

void RunConfig::validate() const {
  risk.validate();
  if (nx < 2 || ny < 2) throw std::invalid_argument("nx and ny must be >= 2");
  if (order != 1 && order != 2) throw std::invalid_argument("order must be 1 or 2");
  svrg.validate();
  if (!(svrg.gradient.newton_rel_tol > 0.0 && svrg.gradient.newton_rel_tol < 1.0)) {
    throw std::invalid_argument("newton_rel_tol must be in (0, 1)");
  }
  if (!(svrg.gradient.adjoint_rel_tol > 0.0 && svrg.gradient.adjoint_rel_tol < 1.0)) {
    throw std::invalid_argument("adjoint_rel_tol must be in (0, 1)");
  }
  if (output.empty()) throw std::invalid_argument("output directory must not be empty");
  if (mode == RunMode::StationarityOnly && from.empty()) {
    throw std::invalid_argument("stationarity_only mode needs 'from'");
  }
}

std::string RunConfig::to_text() const {
  std::string out;
  auto put = [&](const char* key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  put("mode", to_string(mode));
  put("noise", to_string(noise));
  put("beta", format_double(risk.beta));
  put("epsilon", format_double(risk.epsilon));
  put("nx", std::to_string(nx));
  put("ny", std::to_string(ny));
  put("order", std::to_string(order));
  put("n", std::to_string(svrg.n));
  put("seed", std::to_string(svrg.seed));
  put("tau_initial", format_double(svrg.tau_initial));
  put("tau_final", format_double(svrg.tau_final));
  put("gamma", format_double(svrg.gamma));
  put("r", std::to_string(svrg.update_frequency));
  put("tol", format_double(svrg.tol));
  put("max_epochs", std::to_string(svrg.max_epochs));
  put("z_initial", format_double(svrg.z_initial));
  put("s_initial", format_double(svrg.s_initial));
  put("strict", svrg.strict ? "true" : "false");
  put("stop_rule", to_string(svrg.stop_rule));
  put("newton_rel_tol", format_double(svrg.gradient.newton_rel_tol));
  put("adjoint_rel_tol", format_double(svrg.gradient.adjoint_rel_tol));
  put("output", output);
  if (!from.empty()) put("from", from);
  return out;
}

RunConfig parse_config_text(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    base.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  return parse_config_text(read_file(path), std::move(base));
}

}  // namespace riskvi
