// Command-line front end: exponent tables, noise-level sweeps, single solves
// and the seeded property suites.
//
// Exit codes: 0 success, 1 scientific failure (slope verdict or solver),
// 2 usage or configuration error.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "bregman/bregman.hpp"

namespace {

namespace fs = std::filesystem;
using namespace bregman;

constexpr int kOk = 0;
constexpr int kScientificFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_usage_kind(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidConfig:
    case ErrorKind::InadmissibleNu:
    case ErrorKind::Unsupported:
    case ErrorKind::InvalidAlpha:
    case ErrorKind::InvalidExponent:
    case ErrorKind::InvalidNoise:
    case ErrorKind::InvalidOperator:
    case ErrorKind::DimensionError:
    case ErrorKind::OutOfDomain:
      return true;
    default:
      return false;
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw UsageError("cannot parse " + what + " from '" + s + "'");
  }
}

Eigen::Index to_index(const std::string& s, const std::string& what) {
  const double x = to_double(s, what);
  if (x != std::floor(x) || x < 1) throw UsageError(what + " must be a positive integer");
  return static_cast<Eigen::Index>(x);
}

Vector parse_list(const std::string& s, const std::string& what) {
  const auto parts = split(s, ',');
  if (parts.empty()) throw UsageError(what + " is empty");
  Vector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<Eigen::Index>(i)) = to_double(parts[i], what);
  return v;
}

Vector read_json_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read '" + path + "'");
  const auto j = io::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_array() || j.empty()) throw UsageError("'" + path + "' must hold a JSON array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw UsageError("'" + path + "' must hold numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix read_json_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read '" + path + "'");
  const auto j = io::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_array() || j.empty() || !j[0].is_array()) {
    throw UsageError("'" + path + "' must hold a JSON array of rows");
  }
  const auto m = static_cast<Eigen::Index>(j.size());
  const auto n = static_cast<Eigen::Index>(j[0].size());
  Matrix a(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) throw UsageError("ragged matrix rows");
    for (Eigen::Index k = 0; k < n; ++k) a(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return a;
}

/// identity:N | diag:a,b,... | diagonal_decay:N:A | integration:N | random_gaussian:M:N[:SEED] | matrix:PATH
SpectralOperator parse_operator_flag(const std::string& s) {
  const auto colon = s.find(':');
  const std::string head = s.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);
  const auto args = split(rest, ':');
  if (head == "identity" && args.size() == 1) return identity_operator(to_index(args[0], "identity size"));
  if (head == "diag" && args.size() == 1) return diagonal_operator(parse_list(args[0], "diagonal"));
  if (head == "diagonal_decay" && args.size() == 2) {
    return preset_operator(preset::DiagonalDecay{to_index(args[0], "n"), to_double(args[1], "a")});
  }
  if (head == "integration" && args.size() == 1) return preset_operator(preset::Integration{to_index(args[0], "n")});
  if (head == "random_gaussian" && (args.size() == 2 || args.size() == 3)) {
    const std::uint64_t seed = args.size() == 3 ? static_cast<std::uint64_t>(to_index(args[2], "seed")) : 0;
    return preset_operator(preset::RandomGaussian{to_index(args[0], "m"), to_index(args[1], "n"), seed});
  }
  if (head == "matrix" && !rest.empty()) return factorize(read_json_matrix(rest));
  throw UsageError("unrecognised operator '" + s + "'");
}

/// quadratic | huber[:gamma] | power_sum:p[:weight] | power_sum_high:p[:weight] | tv
RegulariserSpec parse_spec_flag(const std::string& s, Eigen::Index n) {
  const auto parts = split(s, ':');
  if (parts.empty()) throw UsageError("empty regulariser");
  const std::string& head = parts[0];
  if (head == "quadratic" && parts.size() == 1) return quadratic();
  if ((head == "tv" || head == "total_variation") && parts.size() == 1) return total_variation();
  if (head == "huber" && parts.size() <= 2) return huber(parts.size() == 2 ? to_double(parts[1], "gamma") : 1.0);
  if (head == "power_sum" && (parts.size() == 2 || parts.size() == 3)) {
    return power_sum(to_double(parts[1], "p"), parts.size() == 3 ? to_double(parts[2], "weight") : 1.0);
  }
  if (head == "power_sum_high" && (parts.size() == 2 || parts.size() == 3)) {
    const double w = parts.size() == 3 ? to_double(parts[2], "weight") : 1.0 / static_cast<double>(n);
    return power_sum_high(to_double(parts[1], "p"), w);
  }
  throw UsageError("unrecognised regulariser '" + s + "'");
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

// ---------------------------------------------------------------- exponents

struct ExponentsArgs {
  std::string regime;
  double nu = 0.0;
  std::optional<double> p;
  std::optional<double> q;
};

int cmd_exponents(const ExponentsArgs& a) {
  Regime r;
  if (a.regime == "basic") {
    r = regime::Basic{};
  } else if (a.regime == "pconvex") {
    if (!a.p) throw UsageError("--p is required for the pconvex regime");
    r = regime::PConvex{*a.p};
  } else if (a.regime == "qco" || a.regime == "qcoconvex") {
    if (!a.q) throw UsageError("--q is required for the qco regime");
    r = regime::QCoconvex{*a.q};
  } else {
    throw UsageError("unknown regime '" + a.regime + "'");
  }
  const ExponentPair e = theoretical_exponents(r, a.nu);
  std::cout << std::setprecision(17);
  std::cout << "regime   " << regime_name(r) << "\n"
            << "nu       " << a.nu << "\n"
            << "theta    " << e.theta_alpha << "   (alpha ~ delta^theta)\n"
            << "rate     " << e.rate << "   (" << to_string(e.measure) << " ~ delta^rate)\n"
            << "measure  " << to_string(e.measure) << "\n";
  if (a.p) std::cout << "norm     " << norm_rate_from(e, *a.p) << "   (||u - u_dagger|| ~ delta^norm, p = " << *a.p << ")\n";
  return kOk;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
};

int cmd_sweep(const SweepArgs& a) {
  io::RunConfig rc;
  try {
    rc = io::load_run_config(a.config);
    if (const char* env = std::getenv("BREGMAN_RATES_SEED")) {
      const std::string s(env);
      if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        throw UsageError("BREGMAN_RATES_SEED must be a non-negative integer");
      }
      rc.experiment.seed = std::stoull(s);
    }
    if (a.seed) rc.experiment.seed = *a.seed;
    if (a.out) rc.output.dir = *a.out;
    validate(rc.experiment);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }

  const RateReport report = run_sweep(rc.experiment, a.jobs);
  const fs::path dir(rc.output.dir);
  write_file(dir / rc.output.csv, io::results_csv(report));
  write_file(dir / rc.output.report, io::report_json(report).dump(2) + "\n");

  std::cout << "theory: alpha ~ delta^" << report.theory.theta_alpha << ", " << to_string(report.theory.measure)
            << " ~ delta^" << report.theory.rate << "\n";
  for (const auto& f : report.fits) {
    std::cout << "  " << std::left << std::setw(12) << to_string(f.measure);
    if (f.fit) {
      std::cout << " slope " << std::setw(10) << f.fit->slope << " r2 " << f.fit->r_squared;
    } else {
      std::cout << " no fit";
    }
    if (!f.note.empty()) std::cout << "  (" << f.note << ")";
    std::cout << "\n";
  }
  for (const auto& v : report.verdicts) {
    std::cout << (v.pass ? "PASS " : "FAIL ") << to_string(v.measure) << " slope " << v.slope << " target "
              << v.target << (v.two_sided ? " +/- " : " - ") << v.tolerance << "\n";
  }
  for (const auto& n : report.notes) std::cout << "note: " << n << "\n";
  std::cout << "wrote " << (dir / rc.output.csv).string() << " and " << (dir / rc.output.report).string() << "\n";
  return report.passed() ? kOk : kScientificFailure;
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  std::string op;
  std::string spec;
  double alpha = 0.0;
  std::optional<std::string> v;
  std::optional<std::string> data;
  bool synthetic = false;
  double nu = 0.5;
  double delta = 1e-3;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
  int max_iterations = SolveOptions{}.max_iterations;
  double kkt_tolerance = SolveOptions{}.kkt_tolerance;
};

int cmd_solve(const SolveArgs& a) {
  SpectralOperator op = parse_operator_flag(a.op);
  const RegulariserSpec spec = parse_spec_flag(a.spec, op.cols());
  require_positive_alpha(a.alpha);

  const int sources = (a.v ? 1 : 0) + (a.data ? 1 : 0) + (a.synthetic ? 1 : 0);
  if (sources != 1) throw UsageError("give exactly one of --v, --data, --synthetic");
  Vector v;
  if (a.v) v = parse_list(*a.v, "--v");
  else if (a.data) v = read_json_vector(*a.data);
  else {
    const SourceInstance inst = synthesize(op, spec, a.nu, default_omega(op.cols()));
    v = add_noise(inst.v_dagger, a.delta, a.seed).v_delta;
  }
  require_same_size(op.rows(), v.size(), "data");

  SolveOptions opts;
  opts.max_iterations = a.max_iterations;
  opts.kkt_tolerance = a.kkt_tolerance;
  const SolveResult res = solve(op, v, a.alpha, spec, opts);
  const std::string text = io::solve_json(res).dump(2) + "\n";
  if (a.out) write_file(fs::path(*a.out) / "solution.json", text);
  std::cout << text;
  if (!res.converged()) {
    std::cerr << "error: iteration limit reached, kkt residual " << res.kkt_residual << "\n";
    return kScientificFailure;
  }
  return kOk;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const std::string& suite) {
  static const std::vector<std::string> known{"interpolation", "prox", "kkt", "coconvexity", "tv-witness", "all"};
  if (std::find(known.begin(), known.end(), suite) == known.end()) {
    throw UsageError("unknown suite '" + suite + "'");
  }
  bool all_ok = true;
  for (const auto& r : verify::run(suite)) {
    std::cout << (r.ok() ? "PASS " : "FAIL ") << r.name << ": " << r.passed << "/" << r.total << " pass";
    if (!r.detail.empty()) std::cout << "  [" << r.detail << "]";
    std::cout << "\n";
    all_ok = all_ok && r.ok();
  }
  return all_ok ? kOk : kScientificFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convergence-rate laboratory for convex Tikhonov regularisation"};
  app.require_subcommand(1);

  ExponentsArgs ea;
  auto* exponents = app.add_subcommand("exponents", "Print parameter-choice and rate exponents");
  exponents->add_option("--regime", ea.regime, "basic | pconvex | qco")->required();
  exponents->add_option("--nu", ea.nu, "Source exponent")->required();
  exponents->add_option("--p", ea.p, "p-convexity exponent");
  exponents->add_option("--q", ea.q, "q-coconvexity exponent");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Run a noise-level sweep from a JSON config");
  sweep->add_option("--config", sa.config, "Config file")->required();
  sweep->add_option("--out", sa.out, "Output directory (overrides the config)");
  sweep->add_option("--seed", sa.seed, "Noise seed (overrides config and BREGMAN_RATES_SEED)");
  sweep->add_option("--jobs", sa.jobs, "Worker threads")->check(CLI::PositiveNumber);

  SolveArgs so;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one Tikhonov problem and print the certificate");
  solve_cmd->add_option("--operator", so.op, "identity:N | diag:a,b | diagonal_decay:N:A | integration:N | "
                                             "random_gaussian:M:N[:SEED] | matrix:PATH")->required();
  solve_cmd->add_option("--spec", so.spec, "quadratic | huber[:g] | power_sum:p[:w] | power_sum_high:p[:w] | tv")
      ->required();
  solve_cmd->add_option("--alpha", so.alpha, "Regularisation parameter")->required();
  solve_cmd->add_option("--v", so.v, "Data as comma separated numbers");
  solve_cmd->add_option("--data", so.data, "Data as a JSON array file");
  solve_cmd->add_flag("--synthetic", so.synthetic, "Synthesize source data with noise");
  solve_cmd->add_option("--nu", so.nu, "Source exponent for --synthetic");
  solve_cmd->add_option("--delta", so.delta, "Noise level for --synthetic");
  solve_cmd->add_option("--seed", so.seed, "Noise seed for --synthetic");
  solve_cmd->add_option("--out", so.out, "Directory for solution.json");
  solve_cmd->add_option("--max-iterations", so.max_iterations, "Iteration budget");
  solve_cmd->add_option("--kkt-tolerance", so.kkt_tolerance, "Relative KKT tolerance");

  std::string suite;
  auto* verify_cmd = app.add_subcommand("verify", "Run seeded property suites");
  verify_cmd->add_option("suite", suite, "interpolation | prox | kkt | coconvexity | tv-witness | all")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*exponents) return cmd_exponents(ea);
    if (*sweep) return cmd_sweep(sa);
    if (*solve_cmd) return cmd_solve(so);
    if (*verify_cmd) return cmd_verify(suite);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_usage_kind(e.kind()) ? kUsage : kScientificFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kScientificFailure;
  }
  return kUsage;
}
