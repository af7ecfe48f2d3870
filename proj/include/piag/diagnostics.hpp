#ifndef PIAG_DIAGNOSTICS_HPP
#define PIAG_DIAGNOSTICS_HPP

#include <optional>
#include <span>
#include <string>

#include "piag/solver.hpp"

namespace piag {

struct InequalityReport {
  std::string name;
  std::size_t checked = 0;
  std::size_t violations = 0;
  /// Most negative slack (rhs - lhs) seen; +inf when nothing was checked.
  double worst_margin = kInfinity;
  double tolerance = 0.0;
  std::optional<std::size_t> first_violation;

  bool passed() const { return violations == 0; }
};

/**
 * F(x_{k+1}) <= F(x_k) + (L_bar - 1/alpha)|x_{k+1}-x_k|^2 + (l_bar+L_bar) Delta_k
 * along consecutive trace records. A slack below -1e-9 (1 + |F(x_k)|) counts
 * as a violation. Requires records at every k (trace_every = 1).
 */
InequalityReport check_sufficient_descent(const Trace& trace,
                                          const TheoryConstants& constants,
                                          double alpha);

/**
 * Prefix bound sum_{k<=K} |x_{k+1}-x_k|^2 <= (F(x_0) - F(x_{K+1})) / den with
 * den = 1/alpha - tau(l_bar + L_bar) - L_bar, for every K in the trace. When
 * `lower_bound` is given, the total is also checked against
 * (F(x_0) - lower_bound) / den. Slacks are measured on the F scale.
 */
InequalityReport check_summability(const Trace& trace, double alpha,
                                   const TheoryConstants& constants,
                                   std::optional<double> lower_bound);

struct Lemma7Result {
  bool condition_holds = false;
  bool bound_holds = false;
  /// min_k (a^k V_0 - V_k).
  double worst_slack = kInfinity;
};

/// Condition c/(1-a) (1 - a^{k0+1}) / a^{k0} <= b.
bool lemma7_condition(double a, double b, double c, std::size_t k0);

/// Largest violation of V_{k+1} <= a V_k - b w_k + c sum_{j=k-k0}^{k} w_j
/// (positive means the hypothesis fails); omega_k = 0 for k < 0.
double lemma7_hypothesis_excess(double a, double b, double c, std::size_t k0,
                                std::span<const double> V,
                                std::span<const double> omega);

/// Checks the condition and V_k <= a^k V_0 (+1e-12) for every k.
Lemma7Result lemma7_oracle(double a, double b, double c, std::size_t k0,
                           std::span<const double> V,
                           std::span<const double> omega);

/// P(x) = x^tau - (c/tau)(x^{tau-1} + ... + 1).
double lemma8_polynomial(double x, double c, std::size_t tau);

/// Root of P in [c, 1) by bisection to 1e-12.
double lemma8_root(double c, std::size_t tau);

struct Lemma8Certificate {
  double root = 0.0;        // p
  double rate = 0.0;        // max(p, q) + delta
  double constant = 0.0;    // M
  bool envelope_holds = false;
  bool geometric_holds = false;
  /// (a_{n-1} / a_m)^{1/(n-1-m)} over the second half of the sequence.
  double tail_ratio = 0.0;
};

/**
 * Certificate that a_k -> 0 R-linearly at rate max(p, q).
 *
 * Checks the explicit envelope
 *   a_k <= b0 sum_{i=tau}^{k} p^{k-i} q^i + sum_{s<tau} p^{k-s} a_s   (k >= tau)
 * and the geometric bound a_k <= M (max(p,q) + delta)^k with M derived in
 * closed form from that envelope. Throws InvalidArgument naming the first k
 * where a_k <= b0 q^k + (c/tau)(a_{k-1} + ... + a_{k-tau}) fails.
 */
Lemma8Certificate lemma8_certificate(double b0, double q, double c,
                                     std::size_t tau,
                                     std::span<const double> a_seq,
                                     double delta = 1e-3);

bool lemma8_oracle(double b0, double q, double c, std::size_t tau,
                   std::span<const double> a_seq);

struct RateFit {
  double rate = 0.0;
  double log_linear_r2 = 0.0;
  std::size_t transient_skip = 0;
  std::size_t points = 0;
};

/// Least-squares fit of log(values_k - limit) against k for k >= skip.
RateFit fit_rlinear_rate(std::span<const double> values, double limit,
                         std::size_t skip);

/**
 * Fits the rate on the leading part of `values` whose gap to `limit` stays
 * above `floor` (later points sit at rounding level). Needs at least 10
 * points after `skip`.
 */
RateFit fit_rlinear_rate_above_floor(std::span<const double> values,
                                     double limit, std::size_t skip,
                                     double floor);

/// Default transient skip 5 (tau + 1).
inline std::size_t default_transient_skip(std::size_t tau) {
  return 5 * (tau + 1);
}

/// C2 / (1/alpha - C1) < 1/tau. Requires tau >= 1 and 1/alpha > C1.
bool check_theorem2_coefficient(const TheoryConstants& constants, double alpha);

}  // namespace piag

#endif  // PIAG_DIAGNOSTICS_HPP
