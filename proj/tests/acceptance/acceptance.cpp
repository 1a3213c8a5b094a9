// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "mvdyn/analysis.hpp"
#include "mvdyn/picard.hpp"
#include "mvdyn/scenario.hpp"
#include "oracles.hpp"

using namespace mvdyn;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

StepControl fixed(double dt, double t_end) {
  StepControl c;
  c.dt = dt;
  c.t_end = t_end;
  return c;
}

Scenario random_scenario(std::uint64_t seed, double t_end, double dt, std::size_t max_atoms = 20,
                         bool pure_selection = false) {
  RandomScenarioOptions o;
  o.t_end = t_end;
  o.dt = dt;
  o.max_atoms = max_atoms;
  o.pure_selection = pure_selection;
  return parse_scenario(random_scenario_json(seed, o));
}

double state_gap(const SystemState& a, const SystemState& b) {
  return std::abs(a.substrate - b.substrate) + flat_distance(a.population, b.population);
}

constexpr std::uint64_t kFirstSeed = 1;
constexpr int kRandomScenarios = 20;

// 1 and 2 share the same trajectories.
struct RandomRuns {
  double worst_excess = -1e300;       // max_t M(t) - max{M(0), bound}
  double worst_final_excess = -1e300; // M(200) - bound
  double min_value = 1e300;           // lowest weight or substrate
  double seconds = 0.0;
  std::string error;
};

RandomRuns run_random_scenarios() {
  RandomRuns r;
  const auto start = std::chrono::steady_clock::now();
  try {
    for (int k = 0; k < kRandomScenarios; ++k) {
      const auto sc = random_scenario(kFirstSeed + k, 200.0, 1e-2);
      const auto prep = sc.prepare();
      const auto traj = integrate(sc.initial, prep.model, sc.control);
      // The bound uses the floor of the rates over all S >= 0.
      const double bound = dissipativity_bound(sc.rates);
      const double m0 = traj.mass(0);
      double max_mass = 0.0;
      for (std::size_t t = 0; t < traj.size(); ++t) {
        max_mass = std::max(max_mass, traj.mass(t));
        r.min_value = std::min(r.min_value, traj.substrate(t));
        for (double w : traj.weights(t)) r.min_value = std::min(r.min_value, w);
      }
      r.worst_excess = std::max(r.worst_excess, max_mass - std::max(m0, bound));
      r.worst_final_excess = std::max(r.worst_final_excess, traj.mass(traj.size() - 1) - bound);
    }
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = seconds_since(start);
  return r;
}

Outcome dissipativity(const RandomRuns& r) {
  if (!r.error.empty()) return {false, r.error};
  const bool ok = r.worst_excess <= 1e-6 && r.worst_final_excess <= 0.01 && r.seconds < 60.0;
  return {ok, fmt("20 scenarios; max excess over max{M0,bound} %.3g, M(200)-bound %.3g, %.1f s",
                  r.worst_excess, r.worst_final_excess, r.seconds)};
}

Outcome positivity(const RandomRuns& r) {
  if (!r.error.empty()) return {false, r.error};
  return {r.min_value >= -1e-9, fmt("20 scenarios; min weight or substrate %.3g", r.min_value)};
}

Outcome mass_balance() {
  double worst = 0.0;
  for (int k = 0; k < kRandomScenarios; ++k) {
    const auto sc = random_scenario(kFirstSeed + k, 200.0, 1e-3);
    const auto prep = sc.prepare();
    const auto traj = integrate(sc.initial, prep.model, sc.control);
    worst = std::max(worst, mass_balance_residual(traj, prep.model));
  }
  return {worst <= 1e-6, fmt("20 scenarios on [0, 200], dt 1e-3; max relative residual %.3g", worst)};
}

Outcome semiflow_law() {
  std::vector<Scenario> scenarios;
  scenarios.push_back(load_scenario(MVDYN_SCENARIO_DIR "/desk_chemostat.json"));
  for (std::uint64_t seed = 101; scenarios.size() < 5; ++seed) scenarios.push_back(random_scenario(seed, 2.0, 1e-3));
  double worst = 0.0;
  for (const auto& sc : scenarios) {
    const auto prep = sc.prepare();
    worst = std::max(worst, semiflow_residual(sc.initial, prep.model, fixed(1e-3, 2.0), 0.5, 1.5));
  }
  return {worst <= 1e-6, fmt("5 scenarios, (s,t) = (0.5,1.5); max residual %.3g", worst)};
}

Outcome unification() {
  oracle::Gen g(2024);
  double worst = 0.0;
  for (std::size_t n : {1u, 3u, 1u, 3u}) {
    const Interval b[] = {{0.0, 1.0}};
    const std::size_t c[] = {n};
    const auto space = share(StrategySpace::grid(b, c));
    const VitalRates rates(g.uniform(0.2, 2.0), g.uniform(0.2, 1.5),
                           UptakeSpec{UptakeFamily::kMonod, g.vec(n, 0.5, 2.0), g.vec(n, 0.5, 2.0)},
                           MortalitySpec{MortalityFamily::kDecreasing, g.vec(n, 0.1, 0.5), g.vec(n, 0.0, 0.3)});
    const SystemState x{g.uniform(0.0, 3.0), DiscreteMeasure(space, g.vec(n, 0.05, 1.0))};
    const auto prep = prepare_model(rates, pure_selection_kernel(space), x);
    worst = std::max(worst, compare_to_ode(x, prep.model, fixed(1e-2, 50.0)).max_deviation);
  }
  return {worst <= 1e-12, fmt("n = 1 and 3; max component deviation %.3g", worst)};
}

Outcome flat_norm() {
  oracle::Gen g(77);
  double dirac_err = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double d = std::pow(10.0, -2.0 + 4.0 * k / 9.0);
    const auto s = share(StrategySpace::from_distances({{0, d}, {d, 0}}));
    dirac_err = std::max(dirac_err, std::abs(flat_distance(DiscreteMeasure::dirac(s, 0), DiscreteMeasure::dirac(s, 1)) -
                                             oracle::dirac_pair_flat(d)));
  }
  auto random_space = [&g](std::size_t n) {
    std::vector<std::vector<double>> pts(n);
    for (auto& p : pts) p = g.vec(2, 0.0, 3.0);
    std::vector<std::vector<double>> d(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
    return share(StrategySpace::from_distances(d, pts));
  };
  double mass_err = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto s = random_space(g.index(1, 15));
    const DiscreteMeasure mu(s, g.vec(s->size(), 0.0, 2.0));
    mass_err = std::max(mass_err, std::abs(bl_dual_norm(mu) - mu.total_mass()));
  }
  double slack = 1e300;
  for (int k = 0; k < 100; ++k) {
    const auto s = random_space(g.index(1, 10));
    const DiscreteMeasure a(s, g.vec(s->size(), 0.0, 1.0));
    const DiscreteMeasure b(s, g.vec(s->size(), 0.0, 1.0));
    const DiscreteMeasure c(s, g.vec(s->size(), 0.0, 1.0));
    slack = std::min(slack, flat_distance(a, b) + flat_distance(b, c) - flat_distance(a, c));
  }
  double grid_err = 0.0;
  for (int k = 0; k < 8; ++k) {
    const auto s = random_space(k < 4 ? 2 : 3);
    const DiscreteMeasure mu(s, g.vec(s->size(), -1.0, 1.0));
    std::vector<std::vector<double>> d(s->size(), std::vector<double>(s->size()));
    for (std::size_t i = 0; i < s->size(); ++i)
      for (std::size_t j = 0; j < s->size(); ++j) d[i][j] = s->distance(i, j);
    const std::vector<double> w(mu.weights().begin(), mu.weights().end());
    grid_err = std::max(grid_err, std::abs(bl_dual_norm(mu) - oracle::grid_search_dual_norm(w, d)));
  }
  const bool ok = dirac_err <= 1e-8 && mass_err <= 1e-8 && slack >= -1e-9 && grid_err <= 1e-4;
  char buf[256];
  std::snprintf(buf, sizeof buf, "dirac err %.3g, mass err %.3g, triangle slack %.3g, grid err %.3g", dirac_err,
                mass_err, slack, grid_err);
  return {ok, buf};
}

Outcome picard_vs_rk() {
  std::vector<Scenario> scenarios;
  scenarios.push_back(load_scenario(MVDYN_SCENARIO_DIR "/desk_chemostat.json"));
  for (std::uint64_t seed = 201; scenarios.size() < 5; ++seed) scenarios.push_back(random_scenario(seed, 1.0, 1e-3, 8));
  double worst_gap = 0.0;
  double worst_ratio = 0.0;
  for (const auto& sc : scenarios) {
    const auto prep = sc.prepare();
    PicardOptions o;
    o.horizon = 1.0;
    const auto pic = picard_solve(sc.initial, prep.model, o);
    const auto rk = semiflow(1.0, sc.initial, prep.model, fixed(1e-3, 1.0));
    worst_gap = std::max(worst_gap, state_gap(pic.trajectory.back(), rk));
    worst_ratio = std::max(worst_ratio, pic.contraction_ratio());
  }
  return {worst_gap <= 1e-5 && worst_ratio < 1.0,
          fmt("5 scenarios on [0, 1]; max endpoint gap %.3g, max contraction ratio %.3g", worst_gap, worst_ratio)};
}

Outcome bullet_inequalities() {
  oracle::Gen g(88);
  double slack = 1e300;
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = g.index(1, 8);
    std::vector<std::vector<double>> pts(n);
    for (auto& p : pts) p = g.vec(1, 0.0, 4.0);
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < n; ++i) pts[i][0] = std::max(pts[i][0], pts[i - 1][0] + 1e-3);
    std::vector<std::vector<double>> d(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::abs(pts[i][0] - pts[j][0]);
    const auto s = share(StrategySpace::from_distances(d, pts));
    const AtomFunction f{g.vec(n, -2.0, 2.0)};
    const MutationKernel gamma(s, g.stochastic(n), true);
    const DiscreteMeasure mu(s, g.vec(n, -1.0, 1.0));
    const DiscreteMeasure pos(s, g.vec(n, 0.0, 1.0));

    // ||f . mu|| <= ||f||_BL ||mu||
    slack = std::min(slack, bl_norm(f, *s) * bl_dual_norm(mu) - bl_dual_norm(bullet(f, mu)));
    // ||gamma . mu|| <= ||gamma||*_inf ||mu|| for mu >= 0
    double sup_row = 0.0;
    for (std::size_t i = 0; i < n; ++i) sup_row = std::max(sup_row, bl_dual_norm(gamma.row_measure(i)));
    slack = std::min(slack, sup_row * bl_dual_norm(pos) - bl_dual_norm(bullet(gamma, pos)));
    // ||gamma . mu|| <= ||gamma||_BL ||mu|| for signed mu
    const double gamma_bl = sup_row + kernel_lipschitz_bound(gamma);
    slack = std::min(slack, gamma_bl * bl_dual_norm(mu) - bl_dual_norm(bullet(gamma, mu)));
  }
  return {slack >= -1e-9, fmt("200 instances; min slack %.3g", slack)};
}

// Independent RK4 for S' = L - D S - sum B_j I_j, I_j' = (B_j - D_j) I_j.
std::vector<double> three_ode(const std::vector<double>& y0, double inflow, double dil, const std::vector<double>& b,
                              const std::vector<double>& a, const std::vector<double>& death, double dt, double t_end) {
  auto rhs = [&](const std::vector<double>& y) {
    std::vector<double> dy(3);
    const double s = std::max(y[0], 0.0);
    double use = 0.0;
    for (int j = 0; j < 2; ++j) {
      const double up = b[j] * s / (a[j] + s);
      use += up * y[1 + j];
      dy[1 + j] = (up - death[j]) * y[1 + j];
    }
    dy[0] = inflow - dil * y[0] - use;
    return dy;
  };
  std::vector<double> y = y0;
  const long steps = std::lround(t_end / dt);
  for (long k = 0; k < steps; ++k) {
    const auto k1 = rhs(y);
    std::vector<double> t(3);
    for (int i = 0; i < 3; ++i) t[i] = y[i] + 0.5 * dt * k1[i];
    const auto k2 = rhs(t);
    for (int i = 0; i < 3; ++i) t[i] = y[i] + 0.5 * dt * k2[i];
    const auto k3 = rhs(t);
    for (int i = 0; i < 3; ++i) t[i] = y[i] + dt * k3[i];
    const auto k4 = rhs(t);
    for (int i = 0; i < 3; ++i) y[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return y;
}

Outcome concentration_under_selection() {
  const auto start = std::chrono::steady_clock::now();
  const auto sc = load_scenario(MVDYN_SCENARIO_DIR "/two_strategy.json");
  const auto prep = sc.prepare();
  const auto end = semiflow(500.0, sc.initial, prep.model, sc.control);
  const auto c = concentration(end.population);

  const auto& u = sc.rates.uptake_spec();
  const auto& m = sc.rates.mortality_spec();
  const auto oracle_end = three_ode({sc.initial.substrate, sc.initial.population[0], sc.initial.population[1]},
                                    sc.rates.inflow(), sc.rates.dilution(), u.b, u.a, m.d0, 0.01, 500.0);
  const std::size_t oracle_winner = oracle_end[1] >= oracle_end[2] ? 0 : 1;
  // Lower break-even from the closed form a D / (b - D).
  const double s0 = u.a[0] * m.d0[0] / (u.b[0] - m.d0[0]);
  const double s1 = u.a[1] * m.d0[1] / (u.b[1] - m.d0[1]);
  const std::size_t lower = s0 <= s1 ? 0 : 1;
  const double secs = seconds_since(start);
  const bool ok = c.distance < 0.05 && c.winner == oracle_winner && c.winner == lower && secs < 30.0;
  char buf[256];
  std::snprintf(buf, sizeof buf, "distance %.3g at t=500, winner %zu, 3-ODE winner %zu, lower break-even %zu, %.1f s",
                c.distance, c.winner, oracle_winner, lower, secs);
  return {ok, buf};
}

Outcome order_and_truncation() {
  const auto sc = load_scenario(MVDYN_SCENARIO_DIR "/desk_chemostat.json");
  const auto prep = sc.prepare();
  const double horizon = 2.0;
  const double dt = 0.1;
  const auto ref = semiflow(horizon, sc.initial, prep.model, fixed(dt / 8, horizon));
  const double e1 = state_gap(semiflow(horizon, sc.initial, prep.model, fixed(dt, horizon)), ref);
  const double e2 = state_gap(semiflow(horizon, sc.initial, prep.model, fixed(dt / 2, horizon)), ref);
  const double ratio = e1 / e2;

  const double level = prep.truncation_level;
  ModelOptions wide;
  wide.truncation = 2.0 * level;
  const auto prep2 = prepare_model(sc.rates, sc.kernel, sc.initial, wide);
  const auto a = integrate(sc.initial, prep.model, sc.control);
  const auto b = integrate(sc.initial, prep2.model, sc.control);
  double s_max = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s_max = std::max(s_max, a.substrate(k));
  const double dev = max_deviation(a, b);
  const bool ok = ratio >= 8.0 && ratio <= 32.0 && s_max <= level && dev <= 1e-10;
  char buf[256];
  std::snprintf(buf, sizeof buf, "error ratio %.3f (e=%.3g, %.3g); N=%.3g, max S %.3g, N vs 2N deviation %.3g",
                ratio, e1, e2, level, s_max, dev);
  return {ok, buf};
}

Outcome guarded(const std::function<Outcome()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main() {
  const RandomRuns runs = run_random_scenarios();
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"dissipativity", [&] { return dissipativity(runs); }},
      {"positivity", [&] { return positivity(runs); }},
      {"mass balance", mass_balance},
      {"semiflow law", semiflow_law},
      {"unification", unification},
      {"flat norm", flat_norm},
      {"picard vs rk4", picard_vs_rk},
      {"bullet inequalities", bullet_inequalities},
      {"concentration", concentration_under_selection},
      {"rk4 order and truncation", order_and_truncation},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    const Outcome o = guarded(criteria[i].second);
    std::printf("%s %2zu %-26s %s [%.1f s]\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
    if (!o.passed) ++failed;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
