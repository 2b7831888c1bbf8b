// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Optional arguments select criteria by
// number, e.g. `riskvi_acceptance 1 3`.
#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "riskvi/svrg.hpp"

using namespace riskvi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::shared_ptr<const Mesh> square(int n) { return std::make_shared<const Mesh>(build_mesh(n, n)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

const std::vector<double> kLadder{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

// ---------------------------------------------------------------- 1

Outcome gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  GradientOptions tight;
  tight.newton_rel_tol = 1e-12;
  tight.adjoint_rel_tol = 1e-13;
  tight.workers = 1;
  const PenaltyParams p{1e-2};
  Rng rng(77);
  double worst = 0.0;
  int pairs = 0;
  for (auto model : {NoiseModel::MeanZero, NoiseModel::Lognormal}) {
    for (double beta : {0.0, 0.95}) {
      const auto inst = make_instance(square(16), model, RiskParams{beta, 0.05});
      const auto samples = sample_xi(inst.expansion, 20, rng, 0);
      auto noise = [&](double amp) {
        FemFunction f(inst.mesh_ptr());
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.uniform(-amp, amp);
        return f;
      };
      for (const auto& xi : samples.samples) {
        Control u{noise(2.0), 0.0};
        // put s near the misfit so that all branches of v_eps are visited
        u.s = evaluate_sample(inst, u, xi, p, tight).misfit + rng.uniform(-0.06, 0.04);
        const auto g = stochastic_gradient(inst, u, xi, p, tight);
        const auto dz = noise(1.0);
        const double ds = rng.uniform(-1, 1);
        const double exact = inst.system.l2_inner(g.dz.values(), dz.values()) + g.ds * ds;
        const double h = 1e-6;
        Control plus = u, minus = u;
        for (std::size_t i = 0; i < dz.size(); ++i) {
          plus.z[i] += h * dz[i];
          minus.z[i] -= h * dz[i];
        }
        plus.s += h * ds;
        minus.s -= h * ds;
        const double fd = (sample_objective(inst, plus, xi, p, tight) -
                           sample_objective(inst, minus, xi, p, tight)) / (2 * h);
        worst = std::max(worst, std::abs(fd - exact) / std::abs(exact));
        ++pairs;
      }
    }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-4 && t <= 120,
          std::to_string(pairs) + " pairs, max relative error " + fmt(worst) + ", " + fmt(t) + " s"};
}

// ---------------------------------------------------------------- 2

Outcome penalty_consistency() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto inst = make_instance(square(32), NoiseModel::MeanZero);
  const std::vector<double> xi(inst.expansion.size(), 0.0);
  const auto oracle_y = solve_obstacle_reference(inst, inst.y_hat, xi);
  std::vector<double> gaps;
  std::vector<double> warm;
  for (double tau : kLadder) {
    const auto s = solve_state(inst, inst.y_hat, xi, PenaltyParams{tau}, 1e-10, warm);
    warm = s.y.vector();
    std::vector<double> d(warm.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = warm[i] - oracle_y[i];
    gaps.push_back(inst.system.h1_norm(d));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < gaps.size(); ++i) monotone = monotone && gaps[i] < gaps[i - 1];
  std::string detail = "H1 gaps";
  for (double g : gaps) detail += " " + fmt(g);
  const double t = seconds_since(t0);
  detail += ", " + fmt(t) + " s";
  return {monotone && gaps.back() <= 1e-3 && t <= 60, detail};
}

// ---------------------------------------------------------------- 3

// v_eps written out branch by branch
double smooth_plus(double t, double beta, double eps) {
  if (t <= -eps) return -eps / 2;
  if (t < eps * beta / (1 - beta)) return t * t / (2 * eps) + t;
  return (t - eps * beta * beta / (2 * (1 - beta))) / (1 - beta);
}

// CVaR as the average of the upper (1 - beta) tail, with a fractional atom
double tail_cvar(std::vector<double> x, double beta) {
  std::sort(x.begin(), x.end(), std::greater<>());
  const double mass = (1 - beta) * x.size();
  double acc = 0.0, used = 0.0;
  for (double v : x) {
    const double w = std::min(1.0, mass - used);
    if (w <= 0) break;
    acc += w * v;
    used += w;
  }
  return acc / mass;
}

// convex in s: ternary search on a bracket that contains the minimizer
double smoothed_min_oracle(const std::vector<double>& x, double beta, double eps) {
  auto f = [&](double s) {
    double acc = 0.0;
    for (double v : x) acc += smooth_plus(v - s, beta, eps);
    return s + acc / x.size();
  };
  double a = *std::min_element(x.begin(), x.end()) - 1.0;
  double b = *std::max_element(x.begin(), x.end()) + 1.0;
  for (int i = 0; i < 300; ++i) {
    const double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
    if (f(m1) < f(m2)) {
      b = m2;
    } else {
      a = m1;
    }
  }
  return f(0.5 * (a + b));
}

Outcome cvar_fidelity() {
  const double eps = 0.05;
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> ud;
  std::normal_distribution<double> nd;
  bool pass = true;
  std::string detail;
  for (double beta : {0.0, 0.5, 0.95}) {
    const double bound = eps * std::max(0.5, beta * beta / (2 * (1 - beta)));
    double worst = 0.0, agree = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<double> x(100);
      for (auto& v : x) v = rep % 2 ? ud(gen) : nd(gen);
      const double smoothed = smoothed_risk_min(x, RiskParams{beta, eps}).value;
      worst = std::max(worst, std::abs(smoothed - tail_cvar(x, beta)));
      agree = std::max(agree, std::abs(smoothed - smoothed_min_oracle(x, beta, eps)));
    }
    pass = pass && worst <= bound && agree <= 1e-9;
    detail += "beta " + fmt(beta) + ": gap " + fmt(worst) + " (bound " + fmt(bound) + "); ";
  }
  return {pass, detail};
}

// ---------------------------------------------------------------- 4-8

struct Case {
  const char* name;
  NoiseModel model;
  double beta;
  double expected;
};

const Case kCases[] = {
    {"mean-zero beta=0", NoiseModel::MeanZero, 0.0, 1.3952056},
    {"mean-zero beta=0.95", NoiseModel::MeanZero, 0.95, 1.3954905},
    {"lognormal beta=0", NoiseModel::Lognormal, 0.0, 1.3965497},
    {"lognormal beta=0.95", NoiseModel::Lognormal, 0.95, 1.3969087},
};

SvrgConfig desk_config() {
  SvrgConfig c;
  c.n = 500;
  c.seed = 1;
  return c;
}

struct DeskRun {
  BenchmarkInstance instance;
  RunReport report;
  double seconds;
};

std::map<int, DeskRun>& desk_runs() {
  static std::map<int, DeskRun> runs;
  if (runs.empty()) {
    for (int i = 0; i < 4; ++i) {
      const auto& c = kCases[i];
      auto inst = make_instance(square(32), c.model, RiskParams{c.beta, 0.05});
      const auto t0 = std::chrono::steady_clock::now();
      auto rep = run_path_following(inst, desk_config());
      runs.emplace(i, DeskRun{std::move(inst), std::move(rep), seconds_since(t0)});
    }
  }
  return runs;
}

Outcome table_objectives() {
  bool pass = true;
  std::string detail;
  double total = 0.0;
  for (auto& [i, run] : desk_runs()) {
    const double diff = run.report.objective - kCases[i].expected;
    pass = pass && std::abs(diff) <= 0.01 && run.report.converged;
    total += run.seconds;
    detail += std::string(kCases[i].name) + " " + fmt(run.report.objective, 8) + " (" +
              (diff >= 0 ? "+" : "") + fmt(diff) + (run.report.converged ? "" : ", not converged") + "); ";
  }
  detail += fmt(total) + " s";
  return {pass && total <= 1800, detail};
}

Outcome biactivity() {
  bool pass = true;
  std::string detail = "biactive area";
  for (auto& [i, run] : desk_runs()) {
    const auto& inst = run.instance;
    const auto& y = run.report.mean_y;
    const auto& zeta = run.report.mean_zeta;
    double ymax = 0.0, zmax = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      ymax = std::max(ymax, y[k]);
      zmax = std::max(zmax, zeta[k]);
    }
    double area = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const auto x = inst.mesh().nodes[k];
      // region where neither the state nor the multiplier of the construction is active
      const bool construction = y_hat(x) == 0.0 && zeta_hat(x) == 0.0;
      if (construction && y[k] < 1e-3 * ymax && zeta[k] < 1e-3 * zmax) area += inst.system.lumped_mass[k];
    }
    pass = pass && area > 0.01;
    detail += " " + fmt(area);
  }
  return {pass, detail};
}

Outcome stationarity() {
  bool pass = true;
  std::string detail;
  for (auto& [i, run] : desk_runs()) {
    const auto& s = run.report.stationarity.back();
    const double comp = std::abs(s.comp_state) / (s.zeta_norm * s.y_norm);
    const double sign = s.sign_lambda_p / (s.lambda_norm * s.p_norm);
    pass = pass && comp <= 1e-3 && sign >= -1e-3;
    detail += std::string(kCases[i].name) + ": |<zeta,y>|/norms " + fmt(comp) + ", <lambda,p>/norms " +
              fmt(sign) + "; ";
  }
  return {pass, detail};
}

Outcome determinism() {
  auto& runs = desk_runs();
  const auto& base = runs.at(0);
  auto cfg = desk_config();
  cfg.gradient.workers = 1;
  const auto serial = history_csv(run_path_following(base.instance, cfg));
  const auto again = history_csv(run_path_following(base.instance, cfg));
  cfg.gradient.workers = 4;
  const auto parallel = history_csv(run_path_following(base.instance, cfg));
  const bool repeat_ok = serial == again;
  const bool workers_ok = serial == parallel;
  // the acceptance run used the default worker count
  const bool default_ok = serial == history_csv(base.report);
  return {repeat_ok && workers_ok && default_ok,
          std::string("repeat ") + (repeat_ok ? "identical" : "differs") + ", 1 vs 4 workers " +
              (workers_ok ? "identical" : "differs") + ", default workers " + (default_ok ? "identical" : "differs")};
}

Outcome estimates_and_cost() {
  bool pass = true;
  std::string detail;
  for (auto model : {NoiseModel::MeanZero, NoiseModel::Lognormal}) {
    const auto inst = make_instance(square(16), model);
    const auto& sys = inst.system;
    const auto [kd, unused] = apply_dirichlet(sys.stiffness, std::vector<double>(sys.size(), 0.0), *sys.mesh);
    const Eigen::LDLT<Eigen::MatrixXd> kinv(oracle::dense(kd));
    Rng rng(model == NoiseModel::MeanZero ? 31 : 32);
    const auto samples = sample_xi(inst.expansion, 100, rng, 0);
    auto random_control = [&] {
      FemFunction z(inst.mesh_ptr());
      const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3), c = rng.uniform(0.5, 4);
      for (std::size_t i = 0; i < z.size(); ++i) {
        const auto x = inst.mesh().nodes[i];
        z[i] = a * std::sin(c * x.x1) + b * std::cos(c * x.x2) + rng.uniform(-0.5, 0.5);
      }
      return z;
    };
    for (double tau : {1e-2, 1e-4}) {
      std::vector<double> ratios;
      for (const auto& xi : samples.samples) {
        const auto z = random_control();
        const auto y = solve_state(inst, z, xi, PenaltyParams{tau}).y;
        auto fload = sys.mass * build_rhs(inst, xi).values();
        for (auto i : sys.mesh->boundary_nodes) fload[i] = 0.0;
        const double f_dual = std::sqrt(oracle::vec(fload).dot(kinv.solve(oracle::vec(fload))));
        ratios.push_back(sys.h1_norm(y.values()) / (f_dual + sys.l2_norm(z.values())));
      }
      std::sort(ratios.begin(), ratios.end());
      const double median = 0.5 * (ratios[49] + ratios[50]);
      pass = pass && ratios.back() < 10 * median;
      detail += "max/median " + fmt(ratios.back() / median) + "; ";
    }
    // ||dy||_{H1}^2 <= (dz, dy) and the Poincare constant 2 pi^2
    const double pi = std::numbers::pi;
    const double lip = std::sqrt(1 + 1 / (2 * pi * pi)) / (std::sqrt(2.0) * pi);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const auto& xi = samples.samples[k];
      const auto z1 = random_control(), z2 = random_control();
      const PenaltyParams p{1e-3};
      const auto y1 = solve_state(inst, z1, xi, p, 1e-12).y;
      const auto y2 = solve_state(inst, z2, xi, p, 1e-12).y;
      std::vector<double> dy(y1.size()), dz(y1.size());
      for (std::size_t i = 0; i < dy.size(); ++i) {
        dy[i] = y1[i] - y2[i];
        dz[i] = z1[i] - z2[i];
      }
      worst = std::max(worst, sys.h1_norm(dy) / sys.l2_norm(dz));
    }
    pass = pass && worst <= lip;
    detail += "Lipschitz " + fmt(worst) + " <= " + fmt(lip) + "; ";
  }
  auto& runs = desk_runs();
  auto solves = [&](int i) { return runs.at(i).report.pde_solves; };
  detail += "PDE solves";
  for (int i = 0; i < 4; ++i) detail += " " + std::to_string(solves(i));
  const bool ordered = solves(1) > solves(0) && solves(3) > solves(2) && solves(2) > solves(0) && solves(3) > solves(1);
  if (!ordered) detail += " (cost ordering differs)";
  return {pass && ordered, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, gradient_check},   {2, penalty_consistency}, {3, cvar_fidelity}, {4, table_objectives},
      {5, biactivity},       {6, stationarity},        {7, determinism},   {8, estimates_and_cost},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& [id, check] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome out;
    try {
      out = check();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    if (!out.pass) ++failures;
    std::cout << "criterion " << id << ": " << (out.pass ? "PASS" : "FAIL") << "  " << out.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
