#ifndef PIAG_SOLVER_HPP
#define PIAG_SOLVER_HPP

#include <optional>
#include <string>
#include <vector>

#include "piag/delay.hpp"
#include "piag/model.hpp"

namespace piag {

/// 1 / (L_bar + tau (l_bar + L_bar)) with L_bar = L(tau+1)/2, l_bar = l(tau+1)/2.
double stepsize_threshold(double L, double l, std::size_t tau);

/// Constants of the descent and linear-rate analysis for given (L, l, tau, c0).
struct TheoryConstants {
  double L = 0.0;
  double l = 0.0;
  std::size_t tau = 0;
  double c0 = 0.0;
  double L_bar = 0.0;
  double l_bar = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  double C4 = 0.0;
  double C5 = 0.0;
  double C6 = 0.0;
  double C7 = 0.0;
  double C8 = 0.0;
  double alpha_lemma2 = 0.0;
  /// (1 + L^2 C8^2 / c0^2)^{-1}: certified per-iteration factor at alpha = C8.
  double contraction_a = 0.0;
};

TheoryConstants theorem1_constants(double L, double l, std::size_t tau,
                                   double c0);

/// (1 + L^2 alpha^2 / c0^2)^{-1}.
double contraction_factor(const TheoryConstants& constants, double alpha);

struct SolverConfig {
  double alpha = 0.0;
  DelaySchedule schedule = DelaySchedule::none();
  std::size_t max_iters = 10000;
  double prox_residual_tol = 1e-8;
  Vector x0;
  std::size_t trace_every = 1;
  std::size_t check_every = 10;
  /// Reject alpha > C8 (requires c0).
  bool enforce_theory = false;
  std::optional<double> c0;
  /// Keep every iterate x_0, x_1, ... in the trace.
  bool keep_iterates = false;
};

enum class Termination { converged, max_iters, diverged };

const char* to_string(Termination t);

struct TraceRecord {
  std::size_t k = 0;
  double objective = 0.0;      // F(x_k)
  double step_norm = 0.0;      // |x_{k+1} - x_k|; 0 on the terminal record
  double prox_residual = 0.0;  // at scale alpha with the fresh gradient
  std::size_t max_staleness = 0;
  double delta = 0.0;          // Delta_k
};

struct Trace {
  std::vector<TraceRecord> records;
  Vector final_x;
  Termination termination = Termination::max_iters;
  std::size_t iterations = 0;
  double final_objective = 0.0;
  double final_residual = 0.0;
  std::optional<std::size_t> diverged_at;
  std::vector<Vector> iterates;
  std::vector<std::string> warnings;
};

/// x_{k+1} = prox_{alpha h}(x_k - alpha g_k) where g_k is the table aggregate
/// after refreshing `refresh_set` at x_k. Throws DivergenceError when g_k or
/// x_{k+1} is non-finite.
Vector piag_step(const Problem& problem, GradientTable& table, std::size_t k,
                 const Vector& x_k, double alpha,
                 std::span<const std::size_t> refresh_set);

/// Runs PIAG until prox_residual <= tol (checked every check_every
/// iterations), max_iters, or divergence. Divergence is reported through the
/// trace, not thrown.
Trace solve(const Problem& problem, const SolverConfig& config);

/// Plain forward-backward splitting with the full gradient recomputed each
/// iteration; same trace layout as solve(). Ignores config.schedule.
Trace solve_forward_backward(const Problem& problem, const SolverConfig& config);

}  // namespace piag

#endif  // PIAG_SOLVER_HPP
