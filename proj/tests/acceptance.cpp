// Acceptance criteria A1-A9. Usage: acceptance [A1 ... A9 | all]
// Prints one PASS/FAIL line per criterion; exit status is nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bregman/bregman.hpp"
#include "oracles.hpp"

using namespace bregman;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  double time_limit_s;
  std::function<Outcome()> run;
};

std::string fmt(double x, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << x;
  return s.str();
}

double slope_of(const RateReport& r, Measure m) {
  const MeasureFit* f = r.fit_for(m);
  return f && f->fit ? f->fit->slope : std::nan("");
}

double r2_of(const RateReport& r, Measure m) {
  const MeasureFit* f = r.fit_for(m);
  return f && f->fit ? f->fit->r_squared : std::nan("");
}

std::string flagged(const RateReport& r) {
  int n = 0;
  for (const auto& p : r.points) n += p.iteration_limit ? 1 : 0;
  return n ? " (" + std::to_string(n) + " points hit the iteration limit)" : "";
}

// Sweep configurations shared by A1-A4 and A9.

ExperimentConfig a1_config(double nu) {
  ExperimentConfig cfg;
  cfg.op = preset::DiagonalDecay{100, 1.0};
  cfg.spec = quadratic();
  cfg.nu = nu;
  if (nu <= 0.5) cfg.regime = regime::PConvex{2.0};
  else cfg.regime = regime::QCoconvex{2.0};
  cfg.measures = {Measure::Norm, Measure::Residual};
  return cfg;
}

ExperimentConfig a2_config() {
  ExperimentConfig cfg;
  cfg.op = preset::DiagonalDecay{100, 1.0};
  cfg.spec = huber(1.0);
  cfg.nu = 0.3;
  cfg.regime = regime::Basic{};
  cfg.measures = {Measure::Bregman, Measure::Norm};
  return cfg;
}

ExperimentConfig a3_config() {
  ExperimentConfig cfg;
  cfg.op = preset::DiagonalDecay{100, 1.0};
  cfg.spec = power_sum(1.5);
  cfg.nu = 0.3;
  cfg.regime = regime::PConvex{2.0};
  cfg.measures = {Measure::Bregman, Measure::Norm};
  return cfg;
}

ExperimentConfig a4a_config() {
  ExperimentConfig cfg;
  cfg.op = preset::DiagonalDecay{100, 1.0};
  cfg.spec = huber(1.0);
  cfg.nu = 0.75;
  cfg.regime = regime::QCoconvex{2.0};
  cfg.measures = {Measure::SymBregman, Measure::Norm};
  return cfg;
}

ExperimentConfig a4b_config() {
  ExperimentConfig cfg;
  cfg.op = preset::DiagonalDecay{100, 1.0};
  cfg.spec = power_sum(1.5);
  cfg.nu = 0.8;
  cfg.regime = regime::QCoconvex{3.0};
  cfg.measures = {Measure::SymBregman, Measure::Norm};
  return cfg;
}

Outcome a1() {
  Outcome out{true, {}};
  for (double nu : {0.25, 0.5, 1.0}) {
    const auto rep = run_sweep(a1_config(nu));
    const double target = 2.0 * nu / (1.0 + 2.0 * nu);
    const double slope = slope_of(rep, Measure::Norm);
    const bool ok = std::abs(slope - target) <= 0.10;
    out.pass = out.pass && ok;
    out.detail += "nu=" + fmt(nu) + " norm slope " + fmt(slope) + " vs " + fmt(target) + "+/-0.10 " +
                  (ok ? "ok" : "MISS") + "; ";
  }
  return out;
}

Outcome a2() {
  const auto rep = run_sweep(a2_config());
  const double slope = slope_of(rep, Measure::Bregman);
  const double r2 = r2_of(rep, Measure::Bregman);
  const bool ok = slope >= 0.6 - 0.15 && r2 >= 0.95;
  return {ok, "bregman slope " + fmt(slope) + " (>= 0.45), r2 " + fmt(r2) + " (>= 0.95)" + flagged(rep)};
}

Outcome a3() {
  const auto rep = run_sweep(a3_config());
  const double theta = rep.theory.theta_alpha;
  const double sb = slope_of(rep, Measure::Bregman);
  const double sn = slope_of(rep, Measure::Norm);
  const bool ok_b = sb >= 0.75 - 0.15;
  const bool ok_n = sn >= 0.375 - 0.10;
  return {ok_b && ok_n, "theta " + fmt(theta) + "; bregman slope " + fmt(sb) + " (>= 0.60) " +
                            (ok_b ? "ok" : "MISS") + "; norm slope " + fmt(sn) + " (>= 0.275) " +
                            (ok_n ? "ok" : "MISS") + flagged(rep)};
}

Outcome a4() {
  const auto ra = run_sweep(a4a_config());
  const auto rb = run_sweep(a4b_config());
  const double sa = slope_of(ra, Measure::SymBregman);
  const double sb = slope_of(rb, Measure::SymBregman);
  const bool ok_a = sa >= 1.2 - 0.15;
  const bool ok_b = sb >= 8.0 / 7.0 - 0.15;
  return {ok_a && ok_b, "(a) huber sym-bregman slope " + fmt(sa) + " (>= 1.05) " + (ok_a ? "ok" : "MISS") +
                            "; (b) power_sum sym-bregman slope " + fmt(sb) + " (>= " + fmt(8.0 / 7.0 - 0.15) +
                            ") " + (ok_b ? "ok" : "MISS") + flagged(ra) + flagged(rb)};
}

Outcome a5() {
  const auto r = verify::interpolation(1000);
  return {r.ok(), std::to_string(r.passed) + "/" + std::to_string(r.total) + " within 1e-9 relative slack; " +
                      r.detail};
}

Outcome a6() {
  std::mt19937_64 gen(606);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  double worst_solve = 0.0;
  int solve_fail = 0;
  for (int c = 0; c < 100; ++c) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(unit(gen) * 14);
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(unit(gen) * 14);
    const Matrix a = oracle::gaussian(gen, m, n);
    const auto op = factorize(a);
    const Vector v = oracle::gaussian(gen, m);
    const double alpha = std::pow(10.0, -2.0 + 3.0 * unit(gen));
    const auto sol = solve(op, v, alpha, quadratic());
    const double d1 = (sol.u - direct_quadratic_solve(op, v, alpha)).norm();
    const double d2 = (sol.u - oracle::normal_equations(a, v, alpha)).norm();
    worst_solve = std::max({worst_solve, d1, d2});
    if (!sol.converged() || d1 > 1e-6 || d2 > 1e-6) ++solve_fail;
  }

  double worst_prox = 0.0;
  int prox_fail = 0;
  const auto sgn_pow = [](double x, double e) { return std::copysign(std::pow(std::abs(x), e), x); };
  for (int c = 0; c < 1000; ++c) {
    const double u = 8.0 * (unit(gen) - 0.5);
    const double tau = std::pow(10.0, -3.0 + 4.0 * unit(gen));
    double got = 0.0, ref = 0.0;
    Vector x(1);
    x(0) = u;
    switch (c % 5) {
      case 0:
        got = prox(quadratic(), x, tau)(0);
        ref = oracle::scalar_prox([](double w) { return w; }, u, tau);
        break;
      case 1: {
        const double p = 1.05 + 0.9 * unit(gen);
        const double h = 0.2 + 2.0 * unit(gen);
        got = prox(power_sum(p, h), x, tau)(0);
        ref = oracle::scalar_prox([&](double w) { return h * sgn_pow(w, p - 1.0); }, u, tau);
        break;
      }
      case 2: {
        const double p = 2.1 + 3.0 * unit(gen);
        const double h = 0.2 + 2.0 * unit(gen);
        got = prox(power_sum_high(p, h), x, tau)(0);
        ref = oracle::scalar_prox([&](double w) { return h * sgn_pow(w, p - 1.0); }, u, tau);
        break;
      }
      case 3: {
        const double g = 0.2 + 2.0 * unit(gen);
        got = prox(huber(g), x, tau)(0);
        ref = oracle::scalar_prox([&](double w) { return std::clamp(w, -g, g); }, u, tau);
        break;
      }
      default: {
        // Two-sample TV prox reduces to a scalar problem in the difference d:
        // d_out + 2 tau sign(d_out) = d_in, i.e. soft thresholding at 2 tau.
        Vector y(2);
        y << 0.0, u;
        const Vector w = prox(total_variation(), y, tau);
        got = w(1) - w(0);
        const auto sgn = [](double d) { return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0); };
        ref = oracle::bisect([&](double d) { return d + 2.0 * tau * sgn(d) - u; }, -std::abs(u) - 1.0,
                             std::abs(u) + 1.0);
        break;
      }
    }
    worst_prox = std::max(worst_prox, std::abs(got - ref));
    if (!(std::abs(got - ref) <= 1e-8)) ++prox_fail;
  }
  return {solve_fail == 0 && prox_fail == 0,
          "solver vs direct/normal equations: " + std::to_string(100 - solve_fail) + "/100, max diff " +
              fmt(worst_solve, 3) + " (<= 1e-6); prox vs bisection: " + std::to_string(1000 - prox_fail) +
              "/1000, max diff " + fmt(worst_prox, 3) + " (<= 1e-8)"};
}

Outcome a7() {
  const auto co = verify::coconvexity(1000);
  const auto tv = verify::tv_witness();
  return {co.ok() && tv.ok(), "huber 2-coconvexity " + std::to_string(co.passed) + "/" + std::to_string(co.total) +
                                  "; tv witness " + tv.detail + " (<= 1e-10)"};
}

Outcome a8() {
  int bad_sum = 0;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double nu_low = 0.005 * (i + 1);
    const double nu_high = 0.5 + 0.005 * (i + 1);
    const double p = 1.0 + 0.5 * (i % 10);
    const double q = 1.0 + 0.5 * (i / 10);
    const double sums[] = {
        theoretical_exponents(regime::Basic{}, nu_low).theta_alpha + theoretical_exponents(regime::Basic{}, nu_low).rate,
        theoretical_exponents(regime::PConvex{p}, nu_low).theta_alpha +
            theoretical_exponents(regime::PConvex{p}, nu_low).rate,
        theoretical_exponents(regime::QCoconvex{q}, nu_high).theta_alpha +
            theoretical_exponents(regime::QCoconvex{q}, nu_high).rate};
    for (double s : sums) {
      worst = std::max(worst, std::abs(s - 2.0));
      if (std::abs(s - 2.0) > 1e-14) ++bad_sum;
    }
  }

  bool seam = true;
  for (const Regime& r : {Regime{regime::Basic{}}, Regime{regime::PConvex{2.0}}, Regime{regime::QCoconvex{2.0}}}) {
    const auto e = theoretical_exponents(r, 0.5);
    seam = seam && std::abs(e.theta_alpha - 1.0) <= 1e-14 && std::abs(e.rate - 1.0) <= 1e-14;
  }
  seam = seam && std::abs(norm_rate_from(theoretical_exponents(regime::PConvex{2.0}, 0.5), 2.0) - 0.5) <= 1e-14 &&
         std::abs(norm_rate_from(theoretical_exponents(regime::QCoconvex{2.0}, 0.5), 2.0) - 0.5) <= 1e-14;

  bool mono = true;
  for (double p : {1.1, 1.5, 2.0, 3.0, 5.0}) {
    for (int k = 1; k < 100; ++k) {
      const double a = 0.5 * k / 100.0, b = 0.5 * (k + 1) / 100.0;
      mono = mono && theoretical_exponents(regime::Basic{}, b).rate > theoretical_exponents(regime::Basic{}, a).rate;
      mono = mono &&
             theoretical_exponents(regime::PConvex{p}, b).rate > theoretical_exponents(regime::PConvex{p}, a).rate;
      const double c = 0.5 + a, d = 0.5 + b;
      mono = mono && theoretical_exponents(regime::QCoconvex{p}, d).rate >
                         theoretical_exponents(regime::QCoconvex{p}, c).rate;
    }
  }
  return {bad_sum == 0 && seam && mono, "theta + r = 2 on 300 regime points, max error " + fmt(worst, 3) +
                                            "; seam " + (seam ? "ok" : "MISS") + "; monotone " +
                                            (mono ? "ok" : "MISS")};
}

Outcome a9() {
  std::vector<std::pair<std::string, ExperimentConfig>> runs{
      {"A1 nu=0.25", a1_config(0.25)}, {"A1 nu=0.5", a1_config(0.5)}, {"A1 nu=1", a1_config(1.0)},
      {"A2", a2_config()},           {"A3", a3_config()},           {"A4a", a4a_config()},
      {"A4b", a4b_config()}};
  int points = 0, bad = 0;
  double worst_obj = -1e300, worst_val = -1e300;
  std::string where;
  for (const auto& [label, cfg] : runs) {
    for (const auto& p : run_sweep(cfg).points) {
      ++points;
      worst_obj = std::max(worst_obj, p.objective - p.objective_bound);
      worst_val = std::max(worst_val, p.reg_value - p.reg_value_bound);
      if (!p.minimizer_inequality_holds(1e-9) || !p.value_bound_holds(1e-9)) {
        ++bad;
        where += " " + label + "@" + fmt(p.delta, 3);
      }
    }
  }
  return {bad == 0, std::to_string(points - bad) + "/" + std::to_string(points) +
                        " points; max T - bound " + fmt(worst_obj, 3) + ", max R - bound " + fmt(worst_val, 3) +
                        (bad ? "; violations at" + where : "")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, Criterion> criteria{
      {"A1", {10.0, a1}}, {"A2", {60.0, a2}}, {"A3", {120.0, a3}}, {"A4", {240.0, a4}}, {"A5", {5.0, a5}},
      {"A6", {10.0, a6}}, {"A7", {5.0, a7}},  {"A8", {1.0, a8}},   {"A9", {430.0, a9}},
  };

  std::vector<std::string> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "all") {
      for (const auto& [name, _] : criteria) wanted.push_back(name);
    } else if (criteria.count(arg)) {
      wanted.push_back(arg);
    } else {
      std::fprintf(stderr, "unknown criterion '%s'\n", arg.c_str());
      return 2;
    }
  }
  if (wanted.empty())
    for (const auto& [name, _] : criteria) wanted.push_back(name);

  int failures = 0;
  for (const auto& name : wanted) {
    const Criterion& c = criteria.at(name);
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.time_limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s %s  %s | %.2fs (limit %.0fs)%s\n", pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs,
                c.time_limit_s, in_time ? "" : " TOO SLOW");
  }
  return failures == 0 ? 0 : 1;
}
