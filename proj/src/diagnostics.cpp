#include "piag/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace piag {

namespace {

void require_consecutive(const Trace& trace, const char* who) {
  if (trace.records.empty()) {
    throw InvalidArgument(std::string(who) + ": trace is empty");
  }
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    if (trace.records[i].k != trace.records.front().k + i) {
      throw InvalidArgument(std::string(who) +
                            ": trace lacks consecutive iterates (record " +
                            std::to_string(i) + " has k=" +
                            std::to_string(trace.records[i].k) + ")");
    }
  }
}

void tally(InequalityReport& report, std::size_t k, double slack,
           double tolerance) {
  ++report.checked;
  report.worst_margin = std::min(report.worst_margin, slack);
  if (slack < -tolerance) {
    ++report.violations;
    if (!report.first_violation) report.first_violation = k;
  }
}

}  // namespace

InequalityReport check_sufficient_descent(const Trace& trace,
                                          const TheoryConstants& constants,
                                          double alpha) {
  require(alpha > 0.0, "check_sufficient_descent: alpha must be positive");
  require_consecutive(trace, "check_sufficient_descent");
  InequalityReport report;
  report.name = "sufficient_descent";
  report.tolerance = 1e-9;
  const auto& r = trace.records;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const double step2 = r[i].step_norm * r[i].step_norm;
    const double rhs = r[i].objective + (constants.L_bar - 1.0 / alpha) * step2 +
                       (constants.l_bar + constants.L_bar) * r[i].delta;
    const double slack = rhs - r[i + 1].objective;
    tally(report, r[i].k, slack, report.tolerance * (1.0 + std::abs(r[i].objective)));
  }
  return report;
}

InequalityReport check_summability(const Trace& trace, double alpha,
                                   const TheoryConstants& constants,
                                   std::optional<double> lower_bound) {
  require_consecutive(trace, "check_summability");
  const double t = static_cast<double>(constants.tau);
  const double den =
      1.0 / alpha - t * (constants.l_bar + constants.L_bar) - constants.L_bar;
  if (!(den > 0.0)) {
    throw InvalidArgument(
        "check_summability: stepsize is not below the descent threshold");
  }
  InequalityReport report;
  report.name = "summability";
  report.tolerance = 1e-9;
  const auto& r = trace.records;
  const double F0 = r.front().objective;
  const double tol = report.tolerance * (1.0 + std::abs(F0));
  double partial = 0.0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    partial += r[i].step_norm * r[i].step_norm;
    const double slack = (F0 - r[i + 1].objective) - den * partial;
    tally(report, r[i].k, slack, tol);
  }
  if (lower_bound) {
    const double slack = (F0 - *lower_bound) - den * partial;
    tally(report, r.back().k, slack, tol);
  }
  return report;
}

bool lemma7_condition(double a, double b, double c, std::size_t k0) {
  require(a > 0.0 && a < 1.0, "lemma7: a must lie in (0,1)");
  require(b >= 0.0 && c >= 0.0, "lemma7: b and c must be nonnegative");
  const double k = static_cast<double>(k0);
  const double lhs = c / (1.0 - a) * (1.0 - std::pow(a, k + 1.0)) / std::pow(a, k);
  return lhs <= b;
}

double lemma7_hypothesis_excess(double a, double b, double c, std::size_t k0,
                                std::span<const double> V,
                                std::span<const double> omega) {
  require(omega.size() + 1 >= V.size(),
          "lemma7: omega must cover every recursion step");
  double worst = -kInfinity;
  for (std::size_t k = 0; k + 1 < V.size(); ++k) {
    double window = 0.0;
    const std::size_t first = k >= k0 ? k - k0 : 0;
    for (std::size_t j = first; j <= k; ++j) window += omega[j];
    const double rhs = a * V[k] - b * omega[k] + c * window;
    worst = std::max(worst, V[k + 1] - rhs);
  }
  return worst;
}

Lemma7Result lemma7_oracle(double a, double b, double c, std::size_t k0,
                           std::span<const double> V,
                           std::span<const double> omega) {
  require(k0 >= 1, "lemma7: k0 must be positive");
  for (double v : V) require(v >= 0.0, "lemma7: V must be nonnegative");
  for (double w : omega) require(w >= 0.0, "lemma7: omega must be nonnegative");
  require(!V.empty(), "lemma7: V must be nonempty");
  Lemma7Result out;
  out.condition_holds = lemma7_condition(a, b, c, k0);
  out.bound_holds = true;
  double power = 1.0;
  for (std::size_t k = 0; k < V.size(); ++k) {
    const double slack = power * V[0] - V[k];
    out.worst_slack = std::min(out.worst_slack, slack);
    if (slack < -1e-12) out.bound_holds = false;
    power *= a;
  }
  return out;
}

double lemma8_polynomial(double x, double c, std::size_t tau) {
  require(tau >= 1, "lemma8: tau must be positive");
  // Horner on x^tau - (c/tau) sum_{j<tau} x^j.
  const double w = c / static_cast<double>(tau);
  double tail = 0.0;
  double power = 1.0;
  for (std::size_t j = 0; j < tau; ++j) {
    tail += power;
    power *= x;
  }
  return power - w * tail;
}

double lemma8_root(double c, std::size_t tau) {
  require(c > 0.0 && c < 1.0, "lemma8_root: c must lie in (0,1)");
  require(tau >= 1, "lemma8_root: tau must be positive");
  double lo = c;
  double hi = 1.0;
  if (lemma8_polynomial(lo, c, tau) >= 0.0) return lo;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (lemma8_polynomial(mid, c, tau) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Lemma8Certificate lemma8_certificate(double b0, double q, double c,
                                     std::size_t tau,
                                     std::span<const double> a_seq,
                                     double delta) {
  require(b0 > 0.0, "lemma8: b0 must be positive");
  require(q > 0.0 && q < 1.0, "lemma8: q must lie in (0,1)");
  require(c > 0.0 && c < 1.0, "lemma8: c must lie in (0,1)");
  require(tau >= 1, "lemma8: tau must be positive");
  require(delta > 0.0, "lemma8: delta must be positive");
  require(a_seq.size() > tau, "lemma8: sequence shorter than tau + 1");
  for (double a : a_seq) require(a > 0.0, "lemma8: sequence must be positive");

  const double w = c / static_cast<double>(tau);
  for (std::size_t k = tau; k < a_seq.size(); ++k) {
    double window = 0.0;
    for (std::size_t j = 1; j <= tau; ++j) window += a_seq[k - j];
    const double rhs = b0 * std::pow(q, static_cast<double>(k)) + w * window;
    if (a_seq[k] > rhs * (1.0 + 1e-12)) {
      throw InvalidArgument("lemma8: recursion hypothesis fails at k=" +
                            std::to_string(k));
    }
  }

  Lemma8Certificate cert;
  const double p = lemma8_root(c, tau);
  cert.root = p;
  const double rho = std::max(p, q);
  cert.rate = rho + delta;

  // sup_k (k+1) r^k with r = rho / (rho + delta).
  const double r = rho / cert.rate;
  const double k_star = std::max(0.0, -1.0 / std::log(r) - 1.0);
  double poly_sup = 1.0;
  for (double k : {std::floor(k_star), std::ceil(k_star)}) {
    poly_sup = std::max(poly_sup, (k + 1.0) * std::pow(r, k));
  }
  double initial = 0.0;
  for (std::size_t s = 0; s < tau; ++s) {
    initial += a_seq[s] * std::pow(p, -static_cast<double>(s));
  }
  cert.constant = b0 * poly_sup + initial;

  cert.envelope_holds = true;
  cert.geometric_holds = true;
  for (std::size_t k = 0; k < a_seq.size(); ++k) {
    const double kd = static_cast<double>(k);
    if (k >= tau) {
      double forced = 0.0;
      for (std::size_t i = tau; i <= k; ++i) {
        forced += std::pow(p, kd - static_cast<double>(i)) *
                  std::pow(q, static_cast<double>(i));
      }
      double carried = 0.0;
      for (std::size_t s = 0; s < tau; ++s) {
        carried += std::pow(p, kd - static_cast<double>(s)) * a_seq[s];
      }
      const double envelope = b0 * forced + carried;
      if (a_seq[k] > envelope * (1.0 + 1e-10)) cert.envelope_holds = false;
    }
    if (a_seq[k] > cert.constant * std::pow(cert.rate, kd) * (1.0 + 1e-10)) {
      cert.geometric_holds = false;
    }
  }

  const std::size_t n = a_seq.size();
  const std::size_t m = n / 2;
  if (n - 1 > m) {
    cert.tail_ratio = std::pow(a_seq[n - 1] / a_seq[m],
                               1.0 / static_cast<double>(n - 1 - m));
  }
  return cert;
}

bool lemma8_oracle(double b0, double q, double c, std::size_t tau,
                   std::span<const double> a_seq) {
  const Lemma8Certificate cert = lemma8_certificate(b0, q, c, tau, a_seq);
  return cert.envelope_holds && cert.geometric_holds;
}

RateFit fit_rlinear_rate(std::span<const double> values, double limit,
                         std::size_t skip) {
  require(values.size() >= skip + 10,
          "fit_rlinear_rate: need at least 10 points after the skip");
  const std::size_t n = values.size() - skip;
  Eigen::ArrayXd ks(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double gap = values[skip + i] - limit;
    if (!(gap > 0.0)) {
      throw InvalidArgument(
          "fit_rlinear_rate: value at k=" + std::to_string(skip + i) +
          " does not exceed the limit (limit estimate too high)");
    }
    ks[static_cast<Index>(i)] = static_cast<double>(skip + i);
    ys[static_cast<Index>(i)] = std::log(gap);
  }
  const Eigen::ArrayXd kc = ks - ks.mean();
  const Eigen::ArrayXd yc = ys - ys.mean();
  const double slope = (kc * yc).sum() / (kc * kc).sum();
  const double ss_tot = (yc * yc).sum();
  const double ss_res = (yc - slope * kc).square().sum();

  RateFit fit;
  fit.rate = std::exp(slope);
  fit.transient_skip = skip;
  fit.points = n;
  if (ss_tot <= 0.0) {
    fit.log_linear_r2 = 1.0;
  } else {
    fit.log_linear_r2 = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
  }
  return fit;
}

RateFit fit_rlinear_rate_above_floor(std::span<const double> values,
                                     double limit, std::size_t skip,
                                     double floor) {
  std::size_t end = 0;
  while (end < values.size() && values[end] - limit > floor) ++end;
  return fit_rlinear_rate(values.first(end), limit, skip);
}

bool check_theorem2_coefficient(const TheoryConstants& constants,
                                double alpha) {
  require(constants.tau >= 1, "check_theorem2_coefficient: tau must be >= 1");
  require(alpha > 0.0, "check_theorem2_coefficient: alpha must be positive");
  const double gap = 1.0 / alpha - constants.C1;
  if (!(gap > 0.0)) {
    throw InvalidArgument("check_theorem2_coefficient: 1/alpha must exceed C1");
  }
  return constants.C2 / gap < 1.0 / static_cast<double>(constants.tau);
}

}  // namespace piag
