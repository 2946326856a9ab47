#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bregman/error.hpp"
#include "bregman/linalg.hpp"
#include "bregman/rates.hpp"
#include "bregman/regularisers.hpp"
#include "bregman/source_lab.hpp"
#include "bregman/tikhonov.hpp"

namespace bregman {

/// count log-spaced noise levels from delta_max down to delta_min.
struct DeltaGrid {
  int count = 10;
  double delta_max = 1e-2;
  double delta_min = 1e-5;

  std::vector<double> values() const {
    std::vector<double> out(static_cast<std::size_t>(std::max(count, 0)));
    const double ratio = std::log(delta_min / delta_max);
    for (int i = 0; i < count; ++i) {
      out[static_cast<std::size_t>(i)] =
          count == 1 ? delta_max : delta_max * std::exp(ratio * i / static_cast<double>(count - 1));
    }
    if (count > 1) {
      out.front() = delta_max;
      out.back() = delta_min;
    }
    return out;
  }
};

enum class SolverKind { Auto, Iterative, Direct };

/// Slope tolerances per measure. One-sided unless two_sided resolves to true.
struct SlopeTolerances {
  double bregman = 0.15;
  double sym_bregman = 0.15;
  double norm = 0.10;
  std::optional<double> min_r_squared;
  /// Defaults to true for the quadratic regulariser only.
  std::optional<bool> two_sided;

  double for_measure(Measure m) const {
    switch (m) {
      case Measure::Bregman: return bregman;
      case Measure::SymBregman: return sym_bregman;
      case Measure::Norm: return norm;
      case Measure::Residual: return 0.0;
    }
    return 0.0;
  }
};

struct ExperimentConfig {
  OperatorPreset op = preset::DiagonalDecay{100, 1.0};
  RegulariserSpec spec = reg::Quadratic{};
  double nu = 0.5;
  Regime regime = regime::Basic{};
  DeltaGrid grid;
  double alpha_constant = 1.0;
  std::uint64_t seed = 0;
  /// Defaults to the grid without its first and last point.
  std::optional<FitWindow> fit_window;
  std::vector<Measure> measures{Measure::Bregman, Measure::SymBregman, Measure::Norm, Measure::Residual};
  /// Random unit source element instead of the default alternating one.
  std::optional<std::uint64_t> omega_seed;
  /// Observational mode: u_dagger given directly, nothing certified.
  std::optional<Vector> u_dagger;
  SolverKind solver = SolverKind::Auto;
  SolveOptions solve_options;
  SlopeTolerances tolerances;

  FitWindow window() const {
    if (fit_window) return *fit_window;
    const auto n = static_cast<std::size_t>(grid.count);
    return n >= 3 ? FitWindow{1, n - 2} : FitWindow{0, 0};
  }

  bool wants(Measure m) const { return std::find(measures.begin(), measures.end(), m) != measures.end(); }
};

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.grid.count < 4) throw Error(ErrorKind::InvalidConfig, "delta grid needs at least 4 points");
  if (!(cfg.grid.delta_min > 0.0) || !(cfg.grid.delta_max > cfg.grid.delta_min) ||
      !std::isfinite(cfg.grid.delta_max)) {
    throw Error(ErrorKind::InvalidConfig, "delta grid must be strictly decreasing and positive");
  }
  const FitWindow w = cfg.window();
  if (w.last >= static_cast<std::size_t>(cfg.grid.count) || w.first > w.last || w.size() < 3) {
    throw Error(ErrorKind::InvalidConfig, "fit window must hold at least 3 grid points");
  }
  if (!(cfg.alpha_constant > 0.0)) throw Error(ErrorKind::InvalidConfig, "alpha constant must be positive");
  if (cfg.measures.empty()) throw Error(ErrorKind::InvalidConfig, "no error measures requested");
  validate(cfg.solve_options);
  require_admissible(cfg.regime, cfg.nu);
  if (cfg.u_dagger) {
    for (Measure m : cfg.measures) {
      if (m == Measure::Bregman || m == Measure::SymBregman) {
        throw Error(ErrorKind::InvalidConfig,
                    "observational sweeps have no certified subgradient; only norm and residual apply");
      }
    }
  } else if (std::holds_alternative<reg::TotalVariation1D>(cfg.spec)) {
    throw Error(ErrorKind::Unsupported, "TV source synthesis");
  }
}

struct RatePoint {
  double delta = 0.0;
  double alpha = 0.0;
  int iterations = 0;
  bool iteration_limit = false;
  double kkt_residual = 0.0;
  std::optional<double> bregman;
  std::optional<double> sym_bregman;
  std::optional<double> norm;
  std::optional<double> residual;
  /// T_alpha(u_alpha, v_delta) against delta^2/2 + alpha R(u_dagger).
  double objective = 0.0;
  double objective_bound = 0.0;
  /// R(u_alpha) against delta^2/(2 alpha) + R(u_dagger).
  double reg_value = 0.0;
  double reg_value_bound = 0.0;

  std::optional<double> error(Measure m) const {
    switch (m) {
      case Measure::Bregman: return bregman;
      case Measure::SymBregman: return sym_bregman;
      case Measure::Norm: return norm;
      case Measure::Residual: return residual;
    }
    return std::nullopt;
  }

  bool minimizer_inequality_holds(double slack = 1e-9) const { return objective <= objective_bound + slack; }
  bool value_bound_holds(double slack = 1e-9) const { return reg_value <= reg_value_bound + slack; }
};

struct MeasureFit {
  Measure measure = Measure::Norm;
  std::optional<SlopeFit> fit;
  std::size_t points_used = 0;
  std::string note;
};

struct Verdict {
  Measure measure = Measure::Norm;
  double target = 0.0;
  double slope = 0.0;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool two_sided = false;
  std::optional<double> min_r_squared;
  double r_squared = 0.0;
  bool pass = false;
};

struct RateReport {
  std::vector<RatePoint> points;
  std::vector<MeasureFit> fits;
  ExponentPair theory;
  std::optional<double> norm_rate;
  std::vector<Verdict> verdicts;
  std::vector<std::string> notes;
  bool observational = false;

  bool passed() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
  }

  const MeasureFit* fit_for(Measure m) const {
    for (const auto& f : fits)
      if (f.measure == m) return &f;
    return nullptr;
  }
};

/// Everything a sweep needs before the first solve.
struct SweepSetup {
  SpectralOperator op;
  Vector u_dagger;
  Vector v_dagger;
  std::optional<Vector> xi_dagger;
  ExponentPair theory;
  bool observational = false;
};

inline SweepSetup prepare_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  SpectralOperator op = preset_operator(cfg.op);
  ExponentPair theory = theoretical_exponents(cfg.regime, cfg.nu);
  if (cfg.u_dagger) {
    require_same_size(op.cols(), cfg.u_dagger->size(), "u_dagger");
    Vector v = apply(op, *cfg.u_dagger);
    return SweepSetup{std::move(op), *cfg.u_dagger, std::move(v), std::nullopt, theory, true};
  }
  const Vector omega = cfg.omega_seed ? random_omega(op.cols(), *cfg.omega_seed) : default_omega(op.cols());
  SourceInstance inst = synthesize(op, cfg.spec, cfg.nu, omega);
  return SweepSetup{std::move(op), std::move(inst.u_dagger), std::move(inst.v_dagger),
                    std::move(inst.xi_dagger), theory, false};
}

inline RatePoint evaluate_point(const ExperimentConfig& cfg, const SweepSetup& setup, std::size_t index,
                                double delta) {
  const NoisyData data = add_noise(setup.v_dagger, delta, cfg.seed ^ static_cast<std::uint64_t>(index));
  RatePoint pt;
  pt.delta = delta;
  pt.alpha = cfg.alpha_constant * std::pow(delta, setup.theory.theta_alpha);

  const bool direct = cfg.solver == SolverKind::Direct ||
                      (cfg.solver == SolverKind::Auto && is_quadratic(cfg.spec));
  if (direct && !is_quadratic(cfg.spec)) {
    throw Error(ErrorKind::InvalidConfig, "direct solver applies to the quadratic regulariser only");
  }
  Vector u;
  Vector xi;
  if (direct) {
    u = direct_quadratic_solve(setup.op, data.v_delta, pt.alpha);
    xi = dual_certificate(setup.op, data.v_delta, pt.alpha, u).xi;
    pt.kkt_residual = kkt_residual(setup.op, data.v_delta, pt.alpha, cfg.spec, u);
    pt.objective = objective(setup.op, data.v_delta, pt.alpha, cfg.spec, u);
  } else {
    SolveResult res = solve(setup.op, data.v_delta, pt.alpha, cfg.spec, cfg.solve_options);
    pt.iterations = res.iterations;
    pt.iteration_limit = !res.converged();
    pt.kkt_residual = res.kkt_residual;
    pt.objective = res.objective;
    u = std::move(res.u);
    xi = std::move(res.xi);
  }

  const double r_dagger = value(cfg.spec, setup.u_dagger);
  pt.objective_bound = 0.5 * delta * delta + pt.alpha * r_dagger;
  pt.reg_value = value(cfg.spec, u);
  pt.reg_value_bound = delta * delta / (2.0 * pt.alpha) + r_dagger;

  if (setup.xi_dagger) {
    if (cfg.wants(Measure::Bregman)) pt.bregman = bregman(cfg.spec, u, setup.u_dagger, *setup.xi_dagger);
    if (cfg.wants(Measure::SymBregman)) pt.sym_bregman = sym_bregman(xi, *setup.xi_dagger, u, setup.u_dagger);
  }
  if (cfg.wants(Measure::Norm)) pt.norm = (u - setup.u_dagger).norm();
  if (cfg.wants(Measure::Residual)) pt.residual = (apply(setup.op, u) - data.v_delta).norm();
  return pt;
}

/// Fits one measure on the window, skipping flagged or non-positive points.
inline MeasureFit fit_measure(const std::vector<RatePoint>& points, Measure m, FitWindow window) {
  MeasureFit out;
  out.measure = m;
  std::vector<std::pair<double, double>> data;
  std::size_t skipped = 0;
  for (std::size_t i = window.first; i <= window.last && i < points.size(); ++i) {
    const auto e = points[i].error(m);
    if (!e) continue;
    if (points[i].iteration_limit || !(*e > 0.0)) {
      ++skipped;
      continue;
    }
    data.emplace_back(points[i].delta, *e);
  }
  out.points_used = data.size();
  if (skipped > 0) out.note = std::to_string(skipped) + " point(s) excluded (iteration limit or non-positive)";
  if (data.size() >= 3) out.fit = fit_slope(data);
  else if (out.note.empty()) out.note = "fewer than 3 usable points";
  return out;
}

/**
 * Runs the full noise-level sweep for one configuration.
 *
 * Point i uses noise seed (seed XOR i), so the report does not depend on
 * how many worker threads share the grid.
 */
inline RateReport run_sweep(const ExperimentConfig& cfg, unsigned jobs = 1) {
  const SweepSetup setup = prepare_sweep(cfg);
  const std::vector<double> deltas = cfg.grid.values();

  RateReport report;
  report.theory = setup.theory;
  report.observational = setup.observational;
  report.points.resize(deltas.size());

  std::vector<std::exception_ptr> failures(deltas.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < deltas.size(); i = next++) {
      try {
        report.points[i] = evaluate_point(cfg, setup, i, deltas[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  jobs = std::clamp<unsigned>(jobs, 1u, static_cast<unsigned>(deltas.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  const FitWindow window = cfg.window();
  for (Measure m : cfg.measures) report.fits.push_back(fit_measure(report.points, m, window));

  const ConvexityProfile profile = convexity_profile(cfg.spec);
  if (profile.p_convex) report.norm_rate = norm_rate_from(setup.theory, *profile.p_convex);
  if (std::holds_alternative<regime::PConvex>(cfg.regime)) {
    report.notes.emplace_back(
        "pconvex alpha exponent uses the balanced denominator p-1+2nu (not p-1+nu)");
  }
  if (report.observational) {
    report.notes.emplace_back("observational sweep: source condition not certified, no verdicts");
    return report;
  }

  const bool two_sided = cfg.tolerances.two_sided.value_or(is_quadratic(cfg.spec));
  auto add_verdict = [&](Measure m, double target, bool apply_r2) {
    if (!cfg.wants(m)) return;
    Verdict v;
    v.measure = m;
    v.target = target;
    v.tolerance = cfg.tolerances.for_measure(m);
    v.two_sided = two_sided;
    if (apply_r2) v.min_r_squared = cfg.tolerances.min_r_squared;
    const MeasureFit* f = report.fit_for(m);
    if (f && f->fit) {
      v.slope = f->fit->slope;
      v.r_squared = f->fit->r_squared;
      v.deviation = v.slope - target;
      const bool slope_ok = two_sided ? std::abs(v.deviation) <= v.tolerance : v.deviation >= -v.tolerance;
      const bool r2_ok = !v.min_r_squared || v.r_squared >= *v.min_r_squared;
      v.pass = slope_ok && r2_ok;
    } else {
      v.slope = std::nan("");
      v.deviation = std::nan("");
      v.pass = false;
    }
    report.verdicts.push_back(v);
  };
  add_verdict(setup.theory.measure, setup.theory.rate, true);
  if (report.norm_rate) add_verdict(Measure::Norm, *report.norm_rate, false);
  return report;
}

}  // namespace bregman
