#include "piag/solver.hpp"

#include <cmath>
#include <sstream>

#include "piag/prox.hpp"

namespace piag {

double stepsize_threshold(double L, double l, std::size_t tau) {
  require(std::isfinite(L) && L > 0.0, "stepsize_threshold: L must be positive");
  require(l >= 0.0 && l <= L, "stepsize_threshold: need 0 <= l <= L");
  const double t = static_cast<double>(tau);
  const double L_bar = L * (t + 1.0) / 2.0;
  const double l_bar = l * (t + 1.0) / 2.0;
  return 1.0 / (L_bar + t * (l_bar + L_bar));
}

TheoryConstants theorem1_constants(double L, double l, std::size_t tau,
                                   double c0) {
  require(std::isfinite(c0) && c0 > 0.0,
          "theorem1_constants: c0 must be positive");
  TheoryConstants k;
  k.alpha_lemma2 = stepsize_threshold(L, l, tau);
  k.L = L;
  k.l = l;
  k.tau = tau;
  k.c0 = c0;
  const double t = static_cast<double>(tau);
  const double c2 = c0 * c0;
  k.L_bar = L * (t + 1.0) / 2.0;
  k.l_bar = l * (t + 1.0) / 2.0;
  k.C1 = L * (t + 1.0) / 2.0;
  k.C2 = (l + L) * (t + 1.0) / 2.0;
  k.C3 = (c2 * (2.0 * l * (t + 1.0) + L) + L * t) / (2.0 * L * L);
  k.C4 = ((l + L) * (1.0 + t) + 2.0 * t * (l + L + l * t) * c2) / (2.0 * L * L);
  k.C5 = l + L + l * t + L * t / 2.0 + L * t / (2.0 * c2);
  k.C6 = 0.5 * ((t + 1.0) * (l + L) / c2 + 2.0 * l * t * t + 3.0 * l * t + l +
                3.0 * L * t + L);
  k.C7 = k.C6 * (1.0 + t * std::pow(1.0 + 1.0 / c2, t));
  k.C8 = std::min({k.alpha_lemma2, 1.0 / (2.0 * k.C5 + 2.0 * k.C7), 1.0 / L});
  k.contraction_a = contraction_factor(k, k.C8);
  return k;
}

double contraction_factor(const TheoryConstants& constants, double alpha) {
  const double r = constants.L * alpha / constants.c0;
  return 1.0 / (1.0 + r * r);
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged:
      return "converged";
    case Termination::max_iters:
      return "max_iters";
    case Termination::diverged:
      return "diverged";
  }
  return "unknown";
}

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

void validate(const Problem& problem, const SolverConfig& config,
              Trace& trace) {
  require(std::isfinite(config.alpha) && config.alpha > 0.0,
          "solve: alpha must be positive and finite");
  require(config.max_iters >= 1, "solve: max_iters must be positive");
  require(config.prox_residual_tol > 0.0, "solve: tol must be positive");
  require(config.trace_every >= 1 && config.check_every >= 1,
          "solve: trace_every and check_every must be positive");
  require(config.x0.size() == problem.dimension(),
          "solve: x0 dimension mismatch");
  require(all_finite(config.x0), "solve: x0 must be finite");
  require(problem.nonsmooth().in_domain(config.x0),
          "solve: x0 lies outside dom h");
  config.schedule.validate(problem.size());

  const SmoothnessTotals totals = smoothness_totals(problem);
  const double lemma2 =
      stepsize_threshold(totals.lipschitz, totals.concave_modulus,
                         config.schedule.tau());
  if (config.enforce_theory) {
    if (!config.c0) {
      throw InvalidConfiguration("solve: enforce_theory requires c0");
    }
    const TheoryConstants k = theorem1_constants(
        totals.lipschitz, totals.concave_modulus, config.schedule.tau(),
        *config.c0);
    if (config.alpha > k.C8) {
      std::ostringstream os;
      os.precision(17);
      os << "solve: alpha " << config.alpha << " exceeds C8 = " << k.C8;
      throw InvalidConfiguration(os.str());
    }
  } else if (config.alpha >= lemma2) {
    std::ostringstream os;
    os.precision(17);
    os << "alpha " << config.alpha
       << " is not below the descent threshold " << lemma2;
    trace.warnings.push_back(os.str());
  }
}

struct StepResult {
  Vector next;
  std::size_t staleness;
};

// Shared driver: `step(k, x)` produces x_{k+1} and the staleness used.
template <typename StepFn>
Trace run(const Problem& problem, const SolverConfig& config, std::size_t tau,
          StepFn&& step) {
  Trace trace;
  validate(problem, config, trace);

  constexpr double kBlowUp = 1e12;
  StepHistory history(tau);
  Vector x = config.x0;
  const double F0 = eval_F(problem, x);
  std::size_t last_staleness = 0;
  if (config.keep_iterates) trace.iterates.push_back(x);

  for (std::size_t k = 0;; ++k) {
    const bool terminal_check = k == config.max_iters;
    const bool check = terminal_check || k % config.check_every == 0;
    const bool record = k % config.trace_every == 0 || k <= tau;

    double F = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN();
    if (check || record) {
      F = eval_F(problem, x);
      if (!std::isfinite(F) || F > F0 + kBlowUp) {
        trace.termination = Termination::diverged;
        trace.diverged_at = k;
        trace.iterations = k;
        break;
      }
      residual = prox_residual(problem, config.alpha, x);
    }

    if (check && (residual <= config.prox_residual_tol || terminal_check)) {
      trace.termination = residual <= config.prox_residual_tol
                              ? Termination::converged
                              : Termination::max_iters;
      trace.iterations = k;
      trace.final_objective = F;
      trace.final_residual = residual;
      trace.records.push_back(
          {k, F, 0.0, residual, last_staleness, history.delta()});
      break;
    }

    StepResult result;
    try {
      result = step(k, x);
    } catch (const DivergenceError& e) {
      trace.termination = Termination::diverged;
      trace.diverged_at = e.iteration();
      trace.iterations = k;
      break;
    }
    const double squared = (result.next - x).squaredNorm();
    if (record) {
      trace.records.push_back({k, F, std::sqrt(squared), residual,
                               result.staleness, history.delta()});
    }
    history.push(squared);
    last_staleness = result.staleness;
    x = std::move(result.next);
    if (config.keep_iterates) trace.iterates.push_back(x);
  }

  trace.final_x = x;
  if (trace.termination == Termination::diverged) {
    trace.final_objective = eval_F(problem, x);
    trace.final_residual = kInfinity;
  }
  return trace;
}

}  // namespace

Vector piag_step(const Problem& problem, GradientTable& table, std::size_t k,
                 const Vector& x_k, double alpha,
                 std::span<const std::size_t> refresh_set) {
  require(alpha > 0.0, "piag_step: alpha must be positive");
  const Vector& g = table.refresh_and_aggregate(problem, k, x_k, refresh_set);
  if (!all_finite(g)) {
    throw DivergenceError(k, "piag_step: non-finite aggregated gradient at k=" +
                                 std::to_string(k));
  }
  const Vector y = x_k - alpha * g;
  Vector next = prox(problem.nonsmooth(), alpha, y);
  if (!all_finite(next)) {
    throw DivergenceError(k, "piag_step: non-finite iterate at k=" +
                                 std::to_string(k + 1));
  }
  return next;
}

Trace solve(const Problem& problem, const SolverConfig& config) {
  require(config.x0.size() == problem.dimension(),
          "solve: x0 dimension mismatch");
  GradientTable table(problem, config.x0, config.schedule.tau());
  const std::size_t n = problem.size();
  return run(problem, config, config.schedule.tau(),
             [&](std::size_t k, const Vector& x) {
               const auto refresh = next_refresh_set(config.schedule, k, n,
                                                     table.last_refresh());
               Vector next =
                   piag_step(problem, table, k, x, config.alpha, refresh);
               return StepResult{std::move(next), max_staleness(table)};
             });
}

Trace solve_forward_backward(const Problem& problem,
                             const SolverConfig& config) {
  SolverConfig plain = config;
  plain.schedule = DelaySchedule::none();
  return run(problem, plain, 0, [&](std::size_t k, const Vector& x) {
    const Vector g = full_gradient(problem, x);
    if (!all_finite(g)) {
      throw DivergenceError(k, "forward-backward: non-finite gradient");
    }
    const Vector y = x - plain.alpha * g;
    Vector next = prox(problem.nonsmooth(), plain.alpha, y);
    if (!all_finite(next)) {
      throw DivergenceError(k, "forward-backward: non-finite iterate");
    }
    return StepResult{std::move(next), 0};
  });
}

}  // namespace piag
