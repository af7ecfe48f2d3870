// piag: generate test problems, run PIAG, verify the descent inequalities
// along a run, and fit convergence rates.
//
// Exit codes: 0 success / converged, 1 input error, 2 max_iters reached,
// 3 diverged, 4 inequality violation found by `verify`.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "piag/diagnostics.hpp"
#include "piag/io.hpp"
#include "piag/problems.hpp"
#include "piag/solver.hpp"

namespace fs = std::filesystem;
using piag::io::Json;

namespace {

enum Exit { kOk = 0, kInput = 1, kMaxIters = 2, kDiverged = 3, kViolation = 4 };

struct Globals {
  std::uint64_t seed = 0;
  std::string out = ".";
  bool quiet = false;
};

class CliError : public std::runtime_error {
 public:
  CliError(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

void say(const Globals& g, const std::string& line) {
  if (!g.quiet) std::cout << line << '\n';
}

fs::path prepare_out(const Globals& g) {
  fs::path out(g.out);
  fs::create_directories(out);
  return out;
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw CliError("missing_file", what + " not found: " + p.string());
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string family = "quadratic_box";
  std::size_t components = 4;
  std::size_t dim = 2;
  double negative_curvature = 0.5;
  double lambda = 0.1;
  std::optional<double> half_width;
};

int cmd_generate(const Globals& g, const GenerateArgs& a) {
  piag::Problem problem = [&] {
    const auto d = static_cast<piag::Index>(a.dim);
    if (a.family == "quadratic_box") {
      return piag::make_quadratic_box(a.components, d, g.seed,
                                      a.negative_curvature, a.half_width);
    }
    if (a.family == "quadratic_l1") {
      return piag::make_quadratic_l1(a.components, d, g.seed, a.lambda);
    }
    throw CliError("invalid_argument", "unknown family '" + a.family + "'");
  }();

  const fs::path out = prepare_out(g);
  piag::io::write_file(out / "problem.json", dump(piag::io::problem_to_json(problem)));

  Json meta;
  meta["family"] = a.family;
  meta["seed"] = g.seed;
  meta["components"] = a.components;
  meta["dimension"] = a.dim;
  Json Li = Json::array(), li = Json::array();
  for (const auto& c : problem.components()) {
    Li.push_back(c.lipschitz());
    li.push_back(c.concave_modulus());
  }
  const auto totals = piag::smoothness_totals(problem);
  meta["L_i"] = Li;
  meta["l_i"] = li;
  meta["L"] = totals.lipschitz;
  meta["l"] = totals.concave_modulus;
  try {
    const piag::ReferenceSolution ref = piag::reference_solution(problem);
    meta["reference_solution"] = piag::io::reference_to_json(ref);
    const double fitted = piag::fit_error_bound_constant(problem, ref, g.seed);
    meta["c0_fitted"] = fitted;
    meta["c0"] = 2.0 * std::max(fitted, 1e-12);
    const double sep = piag::stationary_value_separation(ref);
    meta["stationary_value_separation"] =
        std::isfinite(sep) ? Json(sep) : Json(nullptr);
  } catch (const piag::NotAvailable& e) {
    meta["reference_solution"] = nullptr;
    meta["reference_note"] = e.what();
  }
  piag::io::write_file(out / "problem.meta.json", dump(meta));
  say(g, "wrote " + (out / "problem.json").string());
  return kOk;
}

// ------------------------------------------------------------------- solve

struct SolveArgs {
  std::string problem;
  std::string config;
  std::optional<std::size_t> tau;
  bool forward_backward = false;
  bool full_log = false;
};

Json summary_json(const piag::Trace& trace, const piag::SolverConfig& cfg,
                  const piag::Problem& problem, bool forward_backward) {
  const auto totals = piag::smoothness_totals(problem);
  const std::size_t tau = cfg.schedule.tau();
  Json s;
  s["method"] = forward_backward ? "forward_backward" : "piag";
  s["termination"] = piag::to_string(trace.termination);
  s["iterations"] = trace.iterations;
  s["final_F"] = trace.final_objective;
  s["final_residual"] = std::isfinite(trace.final_residual)
                            ? Json(trace.final_residual)
                            : Json(nullptr);
  s["diverged_at"] = trace.diverged_at ? Json(*trace.diverged_at) : Json(nullptr);
  s["alpha"] = cfg.alpha;
  s["tau"] = tau;
  Json sched;
  sched["kind"] = piag::to_string(cfg.schedule.kind());
  if (cfg.schedule.kind() == piag::ScheduleKind::cyclic) {
    sched["block"] = cfg.schedule.block();
  }
  if (cfg.schedule.kind() == piag::ScheduleKind::uniform_random) {
    sched["seed"] = cfg.schedule.seed();
  }
  s["schedule"] = sched;
  s["L"] = totals.lipschitz;
  s["l"] = totals.concave_modulus;
  s["alpha_lemma2"] =
      piag::stepsize_threshold(totals.lipschitz, totals.concave_modulus, tau);
  s["c0"] = cfg.c0 ? Json(*cfg.c0) : Json(nullptr);
  if (cfg.c0) {
    s["constants"] = piag::io::constants_to_json(piag::theorem1_constants(
        totals.lipschitz, totals.concave_modulus, tau, *cfg.c0));
  }
  s["trace_every"] = cfg.trace_every;
  s["full_log"] = cfg.keep_iterates;
  s["warnings"] = trace.warnings;
  return s;
}

int exit_for(piag::Termination t) {
  switch (t) {
    case piag::Termination::converged:
      return kOk;
    case piag::Termination::max_iters:
      return kMaxIters;
    case piag::Termination::diverged:
      return kDiverged;
  }
  return kInput;
}

piag::Trace run_and_write(const Globals& g, const piag::Problem& problem,
                          const piag::SolverConfig& cfg, bool forward_backward,
                          const fs::path& out) {
  fs::create_directories(out);
  const piag::Trace trace = forward_backward
                                ? piag::solve_forward_backward(problem, cfg)
                                : piag::solve(problem, cfg);
  {
    std::ofstream f(out / "trace.csv");
    piag::io::write_trace_csv(f, trace);
  }
  if (cfg.keep_iterates) {
    std::ofstream f(out / "iterates.csv");
    piag::io::write_iterates_csv(f, trace.iterates);
  }
  piag::io::write_file(out / "summary.json",
                       dump(summary_json(trace, cfg, problem, forward_backward)));
  for (const auto& w : trace.warnings) {
    if (!g.quiet) std::cerr << "warning: " << w << '\n';
  }
  return trace;
}

piag::io::RunConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return piag::io::RunConfig{};
  require_file(path, "run config");
  return piag::io::load_run_config(path);
}

int cmd_solve(const Globals& g, const SolveArgs& a) {
  require_file(a.problem, "problem file");
  const piag::Problem problem = piag::io::load_problem(a.problem);
  piag::io::RunConfig run = load_config_or_default(a.config);
  if (a.tau) {
    run.tau = *a.tau;
    if (*a.tau == 0) run.schedule_kind = "none";
    run.block.reset();
  }
  if (a.full_log) run.full_log = true;
  if (a.forward_backward) {
    run.tau = 0;
    run.schedule_kind = "none";
  }
  const piag::SolverConfig cfg = piag::io::resolve_config(run, problem);
  const piag::Trace trace = run_and_write(g, problem, cfg, a.forward_backward,
                                          prepare_out(g));
  std::ostringstream os;
  os.precision(17);
  os << piag::to_string(trace.termination) << " after " << trace.iterations
     << " iterations, F = " << trace.final_objective
     << ", residual = " << trace.final_residual;
  say(g, os.str());
  return exit_for(trace.termination);
}

// ------------------------------------------------------------------ verify

struct VerifyArgs {
  std::string run;
};

int cmd_verify(const Globals& g, const VerifyArgs& a) {
  const fs::path dir(a.run.empty() ? g.out : a.run);
  require_file(dir / "summary.json", "run summary");
  require_file(dir / "trace.csv", "trace");
  if (!fs::exists(dir / "iterates.csv")) {
    throw CliError("missing_iterate_log",
                   "verify needs the full iterate log (solve with --full-log): " +
                       (dir / "iterates.csv").string());
  }
  const Json summary = Json::parse(piag::io::read_file(dir / "summary.json"));
  std::ifstream tf(dir / "trace.csv");
  const piag::Trace trace = piag::io::read_trace_csv(tf);
  if (trace.records.empty()) throw CliError("empty_trace", "trace has no records");
  std::ifstream itf(dir / "iterates.csv");
  const std::vector<piag::Vector> iterates = piag::io::read_iterates_csv(itf);

  const double alpha = summary.at("alpha").get<double>();
  const double L = summary.at("L").get<double>();
  const double l = summary.at("l").get<double>();
  const std::size_t tau = summary.at("tau").get<std::size_t>();
  const double c0 = summary.at("c0").is_number() ? summary.at("c0").get<double>() : 1.0;
  const piag::TheoryConstants constants = piag::theorem1_constants(L, l, tau, c0);

  std::vector<piag::InequalityReport> reports;
  reports.push_back(piag::check_sufficient_descent(trace, constants, alpha));
  if (alpha < constants.alpha_lemma2) {
    reports.push_back(piag::check_summability(trace, alpha, constants, std::nullopt));
  }

  piag::InequalityReport consistency;
  consistency.name = "step_consistency";
  consistency.tolerance = 1e-9;
  for (const auto& r : trace.records) {
    if (r.k + 1 >= iterates.size()) continue;
    const double step = (iterates[r.k + 1] - iterates[r.k]).norm();
    const double slack = consistency.tolerance * (1.0 + step) - std::abs(step - r.step_norm);
    ++consistency.checked;
    consistency.worst_margin = std::min(consistency.worst_margin, slack);
    if (slack < 0.0) {
      ++consistency.violations;
      if (!consistency.first_violation) consistency.first_violation = r.k;
    }
  }
  reports.push_back(consistency);

  Json out;
  out["run"] = dir.string();
  out["reports"] = Json::array();
  bool ok = true;
  for (const auto& r : reports) {
    out["reports"].push_back(piag::io::report_to_json(r));
    std::ostringstream os;
    os << r.name << " checked=" << r.checked << " violations=" << r.violations
       << " worst_margin=" << piag::io::format_double(r.worst_margin);
    if (r.first_violation) os << " first_violation_k=" << *r.first_violation;
    say(g, os.str());
    ok = ok && r.passed();
  }
  out["passed"] = ok;
  piag::io::write_file(dir / "verify.json", dump(out));
  if (!ok) {
    for (const auto& r : reports) {
      if (r.first_violation) {
        std::cerr << "violation: " << r.name << " at k=" << *r.first_violation << '\n';
      }
    }
  }
  return ok ? kOk : kViolation;
}

// -------------------------------------------------------------------- rate

struct RateArgs {
  std::string run;
  std::string series = "F";
  std::optional<double> limit;
  std::optional<std::size_t> skip;
};

// Gap floor below which values are rounding noise.
double noise_floor(double limit) {
  return 1e2 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(limit));
}

piag::RateFit fit_objective(const piag::Trace& trace, std::optional<double> limit,
                            std::size_t skip, double& used_limit) {
  std::vector<double> values;
  for (const auto& r : trace.records) values.push_back(r.objective);
  if (values.empty()) throw CliError("empty_trace", "trace has no records");
  const double final_value = values.back();
  used_limit = limit.value_or(
      final_value - std::numeric_limits<double>::epsilon() * (1.0 + std::abs(final_value)));
  // Short runs: shrink the skip so that ten points above the floor remain.
  const double floor = noise_floor(used_limit);
  std::size_t usable = 0;
  while (usable < values.size() && values[usable] - used_limit > floor) ++usable;
  if (usable >= 10 && usable < skip + 10) skip = usable - 10;
  return piag::fit_rlinear_rate_above_floor(values, used_limit, skip, floor);
}

int cmd_rate(const Globals& g, const RateArgs& a) {
  const fs::path dir(a.run.empty() ? g.out : a.run);
  require_file(dir / "trace.csv", "trace");
  std::ifstream tf(dir / "trace.csv");
  const piag::Trace trace = piag::io::read_trace_csv(tf);
  std::size_t tau = 0;
  if (fs::exists(dir / "summary.json")) {
    tau = Json::parse(piag::io::read_file(dir / "summary.json")).at("tau").get<std::size_t>();
  }
  const std::size_t skip = a.skip.value_or(piag::default_transient_skip(tau));

  piag::RateFit fit;
  double used_limit = 0.0;
  if (a.series == "F") {
    fit = fit_objective(trace, a.limit, skip, used_limit);
  } else if (a.series == "iterate") {
    require_file(dir / "iterates.csv", "iterate log");
    std::ifstream itf(dir / "iterates.csv");
    const auto iterates = piag::io::read_iterates_csv(itf);
    if (iterates.empty()) throw CliError("empty_trace", "iterate log is empty");
    std::vector<double> gaps;
    for (const auto& x : iterates) gaps.push_back((x - iterates.back()).norm());
    used_limit = 0.0;
    fit = piag::fit_rlinear_rate_above_floor(
        gaps, 0.0, skip, 1e3 * std::numeric_limits<double>::epsilon() *
                             (1.0 + iterates.back().norm()));
  } else {
    throw CliError("invalid_argument", "series must be F or iterate");
  }
  Json out;
  out["series"] = a.series;
  out["rate"] = fit.rate;
  out["log_linear_r2"] = fit.log_linear_r2;
  out["transient_skip"] = fit.transient_skip;
  out["points"] = fit.points;
  out["limit"] = used_limit;
  piag::io::write_file(dir / "rate.json", dump(out));
  std::ostringstream os;
  os.precision(10);
  os << "rate=" << fit.rate << " r2=" << fit.log_linear_r2 << " points=" << fit.points
     << " skip=" << fit.transient_skip;
  say(g, os.str());
  return kOk;
}

// ---------------------------------------------------------- compare-delays

struct CompareArgs {
  std::string problem;
  std::string config;
  std::vector<std::size_t> taus = {0, 2, 5, 10};
};

int cmd_compare_delays(const Globals& g, const CompareArgs& a) {
  require_file(a.problem, "problem file");
  const piag::Problem problem = piag::io::load_problem(a.problem);
  const piag::io::RunConfig base = load_config_or_default(a.config);
  const fs::path out = prepare_out(g);

  std::optional<double> limit;
  try {
    const auto ref = piag::reference_solution(problem);
    if (ref.stationary_points.size() == 1) limit = ref.objective_values.front();
  } catch (const piag::NotAvailable&) {
  }

  std::ostringstream table;
  table << "tau,alpha,iters_to_tol,fitted_rate\n";
  for (std::size_t tau : a.taus) {
    piag::io::RunConfig run = base;
    run.tau = tau;
    run.alpha_rule = piag::io::AlphaRule::auto_lemma2;
    run.trace_every = 1;
    run.block.reset();
    if (tau == 0) {
      run.schedule_kind = "none";
    } else if (run.schedule_kind.empty() || run.schedule_kind == "none") {
      run.schedule_kind = "cyclic";
    }
    const piag::SolverConfig cfg = piag::io::resolve_config(run, problem);
    const piag::Trace trace = run_and_write(
        g, problem, cfg, false, out / ("tau_" + std::to_string(tau)));

    std::string iters = "NA";
    std::string rate = "NA";
    if (trace.termination == piag::Termination::converged) {
      iters = std::to_string(trace.iterations);
    } else if (trace.termination == piag::Termination::diverged) {
      iters = "diverged";
    }
    if (trace.termination != piag::Termination::diverged) {
      try {
        double used = 0.0;
        const piag::RateFit fit = fit_objective(
            trace, limit, piag::default_transient_skip(tau), used);
        rate = piag::io::format_double(fit.rate);
      } catch (const piag::InvalidArgument&) {
      }
    }
    table << tau << ',' << piag::io::format_double(cfg.alpha) << ',' << iters << ','
          << rate << '\n';
  }
  piag::io::write_file(out / "compare_delays.csv", table.str());
  if (!g.quiet) std::cout << table.str();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximal incremental aggregated gradient solver and diagnostics"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_flag("--quiet", g.quiet, "Suppress informational output");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a random test problem");
  generate->add_option("--family", gen.family, "quadratic_box | quadratic_l1")
      ->capture_default_str();
  generate->add_option("--components,-n", gen.components)->capture_default_str();
  generate->add_option("--dim,-d", gen.dim)->capture_default_str();
  generate->add_option("--negative-curvature", gen.negative_curvature)
      ->capture_default_str();
  generate->add_option("--lambda", gen.lambda)->capture_default_str();
  generate->add_option("--half-width", gen.half_width, "Box half width B");

  SolveArgs sol;
  auto* solve = app.add_subcommand("solve", "Run PIAG on a problem file");
  solve->add_option("--problem", sol.problem)->required();
  solve->add_option("--config", sol.config, "Run-config JSON");
  solve->add_option("--tau", sol.tau, "Override the delay bound");
  solve->add_flag("--fbs", sol.forward_backward,
                  "Run the plain forward-backward reference instead");
  solve->add_flag("--full-log", sol.full_log, "Write iterates.csv");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Check descent inequalities on a run");
  verify->add_option("--run", ver.run, "Run directory (default: --out)");

  RateArgs rt;
  auto* rate = app.add_subcommand("rate", "Fit an R-linear rate to a run");
  rate->add_option("--run", rt.run, "Run directory (default: --out)");
  rate->add_option("--series", rt.series, "F | iterate")->capture_default_str();
  rate->add_option("--limit", rt.limit, "Limit value for the F series");
  rate->add_option("--skip", rt.skip, "Transient iterations to skip");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare-delays", "Solve once per delay bound");
  compare->add_option("--problem", cmp.problem)->required();
  compare->add_option("--config", cmp.config, "Run-config JSON");
  compare->add_option("--taus", cmp.taus, "Delay bounds")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error code=usage: " << e.what() << '\n';
    return kInput;
  }

  try {
    if (*generate) return cmd_generate(g, gen);
    if (*solve) return cmd_solve(g, sol);
    if (*verify) return cmd_verify(g, ver);
    if (*rate) return cmd_rate(g, rt);
    if (*compare) return cmd_compare_delays(g, cmp);
  } catch (const CliError& e) {
    std::cerr << "error code=" << e.code() << ": " << e.what() << '\n';
  } catch (const piag::io::ParseError& e) {
    std::cerr << "error code=parse_error line=" << e.line() << ": " << e.what() << '\n';
  } catch (const piag::InvalidConfiguration& e) {
    std::cerr << "error code=invalid_configuration: " << e.what() << '\n';
  } catch (const piag::InvalidArgument& e) {
    std::cerr << "error code=invalid_argument: " << e.what() << '\n';
  } catch (const piag::NotAvailable& e) {
    std::cerr << "error code=not_available: " << e.what() << '\n';
  } catch (const piag::GenerationError& e) {
    std::cerr << "error code=generation_failed: " << e.what() << '\n';
  } catch (const Json::exception& e) {
    std::cerr << "error code=parse_error: " << e.what() << '\n';
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error code=io_error: " << e.what() << '\n';
  }
  return kInput;
}
