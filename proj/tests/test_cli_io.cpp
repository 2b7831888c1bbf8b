#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <sstream>

#include "riskvi/io.hpp"
#include "riskvi/run.hpp"

using namespace riskvi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("config defaults") {
  const auto c = parse_config_text("");
  CHECK(c.risk.beta == 0.0);
  CHECK(c.risk.epsilon == 0.05);
  CHECK(c.svrg.gamma == 0.1);
  CHECK(c.svrg.update_frequency == 1000);
  CHECK(c.svrg.tau_initial == 0.1);
  CHECK(c.svrg.tau_final == 1e-6);
  CHECK(c.svrg.z_initial == 1.0);
  CHECK(c.svrg.s_initial == 1.0);
  CHECK(c.svrg.max_epochs == 200);
  CHECK(c.noise == NoiseModel::MeanZero);
  CHECK(c.mode == RunMode::Optimize);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config parsing and errors") {
  auto c = parse_config_text("# table column four\nbeta=0.95\n noise = lognormal \n\n");
  CHECK(c.noise == NoiseModel::Lognormal);
  CHECK(c.risk.beta == 0.95);
  CHECK_NOTHROW(c.validate());
  CHECK_THROWS_AS(parse_config_text("beta=1.0").validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("colour=blue"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("nx=ten"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("nx=10.5"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("beta"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("noise=gaussian"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("gamma=1.5").validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("nx=1").validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("mode=stationarity_only").validate(), std::invalid_argument);
  CHECK_THROWS(load_config("/nonexistent/riskvi.cfg"));

  // layering: file values, then overrides
  const auto dir = scratch("riskvi_cfg_test");
  write_file_atomic((dir / "a.cfg").string(), "beta=0.5\nn=20\n");
  c = load_config((dir / "a.cfg").string());
  c.set("n", "30");
  CHECK(c.risk.beta == 0.5);
  CHECK(c.svrg.n == 30);
  // resolved text reads back to the same config
  CHECK(parse_config_text(c.to_text()).to_text() == c.to_text());
  fs::remove_all(dir);
}

TEST_CASE("atomic writes leave no temp files") {
  const auto dir = scratch("riskvi_atomic_test");
  write_file_atomic((dir / "sub" / "x.txt").string(), "one");
  write_file_atomic((dir / "sub" / "x.txt").string(), "two");
  CHECK(read_file((dir / "sub" / "x.txt").string()) == "two");
  int count = 0;
  for (const auto& e : fs::directory_iterator(dir / "sub")) {
    (void)e;
    ++count;
  }
  CHECK(count == 1);
  fs::remove_all(dir);
}

TEST_CASE("field preview") {
  const auto dir = scratch("riskvi_preview_test");
  auto c = parse_config_text("mode=field_preview\nnx=16\nny=16");
  c.output = dir.string();
  std::ostringstream log;
  CHECK(run(c, log) == 0);
  for (const char* f : {"field_mean_zero.csv", "field_lognormal.csv", "fields.vtk", "manifest.txt"}) {
    CHECK(fs::exists(dir / f));
  }
  CHECK(read_file((dir / "field_lognormal.csv").string()).rfind("x1,x2,value\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("optimize, replay from the manifest, and stationarity check") {
  const auto dir = scratch("riskvi_run_test");
  auto c = parse_config_text("nx=16\nny=16\nn=50\nseed=3");
  c.output = (dir / "a").string();
  std::ostringstream log;
  const auto t0 = std::chrono::steady_clock::now();
  CHECK(run(c, log) == 0);
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::minutes(5));
  for (const char* f : {"history.csv", "timing.csv", "stationarity.csv", "control.csv", "mean_state.csv",
                        "mean_multiplier.csv", "fields.vtk", "summary.json", "manifest.txt"}) {
    CHECK(fs::exists(dir / "a" / f));
  }
  auto replay = load_config((dir / "a" / "manifest.txt").string());
  replay.output = (dir / "b").string();
  CHECK(run(replay, log) == 0);
  CHECK(read_file((dir / "a" / "history.csv").string()) == read_file((dir / "b" / "history.csv").string()));

  auto check = replay;
  check.mode = RunMode::StationarityOnly;
  check.from = (dir / "a").string();
  check.output = (dir / "c").string();
  CHECK(run(check, log) == 0);
  const auto table = read_file((dir / "c" / "stationarity.csv").string());
  CHECK(std::count(table.begin(), table.end(), '\n') == 7);
  // the last row matches the run's own report at tau_final
  const auto own = read_file((dir / "a" / "stationarity.csv").string());
  auto last_row = [](const std::string& s) {
    const auto end = s.find_last_of('\n', s.size() - 2);
    return s.substr(end + 1);
  };
  CHECK(last_row(table).substr(0, 12) == last_row(own).substr(0, 12));
  fs::remove_all(dir);
}
