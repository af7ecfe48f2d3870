// Independent oracles shared by the test binaries. Nothing in here calls the
// library routine it is used to check.
#ifndef PIAG_TESTS_SUPPORT_HPP
#define PIAG_TESTS_SUPPORT_HPP

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "piag/model.hpp"

namespace oracle {

using piag::Matrix;
using piag::Vector;

// Golden-section minimisation on [lo, hi]. `less(u, v)` decides f(u) < f(v);
// passing it directly lets callers compare values without cancellation.
inline double golden_section(const std::function<bool(double, double)>& less,
                             double lo, double hi, double tol = 1e-12) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  while (b - a > tol * (1.0 + std::abs(a) + std::abs(b))) {
    if (less(c, d)) {
      b = d;
      d = c;
      c = b - r * (b - a);
    } else {
      a = c;
      c = d;
      d = a + r * (b - a);
    }
  }
  return 0.5 * (a + b);
}

// Scalar prox of lambda|x| + box indicator by direct minimisation of
// lambda|x| + (x - y)^2 / (2 scale). Differences are formed as
// lambda(|u| - |v|) + (u - v)(u + v - 2y) / (2 scale).
inline double scalar_prox(double y, double scale, double lambda, double lo,
                          double hi) {
  const double a = std::isfinite(lo) ? lo : y - 10.0 * (std::abs(y) + lambda * scale + 1.0);
  const double b = std::isfinite(hi) ? hi : y + 10.0 * (std::abs(y) + lambda * scale + 1.0);
  auto less = [&](double u, double v) {
    return lambda * (std::abs(u) - std::abs(v)) + (u - v) * (u + v - 2.0 * y) / (2.0 * scale) < 0.0;
  };
  return golden_section(less, a, b);
}

// Largest |eigenvalue| by power iteration.
inline double power_iteration_norm(const Matrix& A, int iters = 5000) {
  Vector v = Vector::Ones(A.rows()) / std::sqrt(static_cast<double>(A.rows()));
  v(0) += 0.1;
  double lambda = 0.0;
  for (int i = 0; i < iters; ++i) {
    Vector w = A * v;
    const double n = w.norm();
    if (n == 0.0) return 0.0;
    lambda = n;
    v = w / n;
  }
  return lambda;
}

// Smallest eigenvalue via power iteration on the shifted matrix sI - A.
inline double power_iteration_min(const Matrix& A, int iters = 20000) {
  const double s = power_iteration_norm(A);
  const Matrix B = s * Matrix::Identity(A.rows(), A.cols()) - A;
  Vector v = Vector::LinSpaced(A.rows(), 1.0, 2.0).normalized();
  double mu = 0.0;
  for (int i = 0; i < iters; ++i) {
    Vector w = B * v;
    const double n = w.norm();
    if (n == 0.0) return s;
    mu = v.dot(w);
    v = w / n;
  }
  return s - mu;
}

// Central finite-difference gradient.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f,
                          const Vector& x) {
  const double h = 1e-5 * (1.0 + x.norm());
  Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vector p = x, m = x;
    p(j) += h;
    m(j) -= h;
    g(j) = (f(p) - f(m)) / (2.0 * h);
  }
  return g;
}

// Plain forward-backward loop written without the library's gradient table.
// Gradient components are summed in index order starting from zero.
inline std::vector<Vector> reference_fbs(const piag::Problem& problem,
                                         const Vector& x0, double alpha,
                                         std::size_t iters) {
  const auto& h = problem.nonsmooth();
  std::vector<Vector> xs{x0};
  Vector x = x0;
  for (std::size_t k = 0; k < iters; ++k) {
    Vector g = Vector::Zero(x.size());
    for (std::size_t i = 0; i < problem.size(); ++i) g += problem.component(i).gradient(x);
    Vector y = x - alpha * g;
    for (Eigen::Index j = 0; j < y.size(); ++j) {
      double v = y(j);
      if (h.lambda() > 0.0) {
        const double t = alpha * h.lambda();
        v = v > t ? v - t : (v < -t ? v + t : 0.0);
      }
      v = std::min(std::max(v, h.lower(j)), h.upper(j));
      y(j) = v;
    }
    x = y;
    xs.push_back(x);
  }
  return xs;
}

// Delta_k straight from the definition, with x_{-j} = x_0.
inline double naive_delta(const std::vector<Vector>& xs, std::size_t k,
                          std::size_t tau) {
  auto at = [&](long j) -> const Vector& { return xs[j < 0 ? 0 : static_cast<std::size_t>(j)]; };
  double s = 0.0;
  for (long j = static_cast<long>(k) - static_cast<long>(tau); j < static_cast<long>(k); ++j) {
    s += (at(j + 1) - at(j)).squaredNorm();
  }
  return s;
}

inline Matrix random_symmetric_matrix(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix M(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) M(i, j) = n(rng);
  return 0.5 * (M + M.transpose());
}

// Random instance of the V / omega recursion with the contraction condition
// satisfied. V is driven at the boundary V_{k+1} = a V_k - b w_k + c sum w
// (occasionally below it); omega is kept small enough that the right-hand
// side stays nonnegative.
struct RecursionInstance {
  double a, b, c;
  std::size_t k0;
  std::vector<double> V, omega;
};

inline RecursionInstance lemma7_instance(std::mt19937_64& rng, std::size_t length = 60) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RecursionInstance in;
  in.a = 0.05 + 0.94 * u(rng);
  in.k0 = 1 + static_cast<std::size_t>(u(rng) * 5.0);
  in.c = u(rng) < 0.1 ? 0.0 : u(rng) * 0.5;
  const double need = in.c / (1.0 - in.a) * (1.0 - std::pow(in.a, in.k0 + 1.0)) /
                      std::pow(in.a, static_cast<double>(in.k0));
  in.b = need * (1.0 + 2.0 * u(rng)) + (in.c == 0.0 ? u(rng) : 0.0);
  in.V.push_back(0.1 + 10.0 * u(rng));
  for (std::size_t k = 0; k + 1 < length; ++k) {
    double window = 0.0;
    for (std::size_t j = k >= in.k0 ? k - in.k0 : 0; j < k; ++j) window += in.omega[j];
    // rhs(w) = a V_k + c window - (b - c) w must stay >= 0
    const double base = in.a * in.V[k] + in.c * window;
    const double cap = in.b > in.c ? base / (in.b - in.c) : base;
    const double w = cap * u(rng);
    in.omega.push_back(w);
    const double rhs = base - (in.b - in.c) * w;
    const double shrink = u(rng) < 0.7 ? 1.0 : u(rng);
    in.V.push_back(std::max(0.0, rhs) * shrink);
  }
  return in;
}

// Positive sequence with a_k <= b0 q^k + (c/tau)(a_{k-1} + ... + a_{k-tau}),
// saturated most of the time.
struct DelayedRecursion {
  double b0, q, c;
  std::size_t tau;
  std::vector<double> a;
};

inline DelayedRecursion lemma8_sequence(std::mt19937_64& rng, std::size_t length = 200) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DelayedRecursion s;
  s.b0 = 0.1 + 5.0 * u(rng);
  s.q = 0.05 + 0.9 * u(rng);
  s.c = 0.05 + 0.9 * u(rng);
  s.tau = 1 + static_cast<std::size_t>(u(rng) * 10.0);
  for (std::size_t k = 0; k < s.tau; ++k) s.a.push_back(0.01 + 3.0 * u(rng));
  const double w = s.c / static_cast<double>(s.tau);
  for (std::size_t k = s.tau; k < length; ++k) {
    double window = 0.0;
    for (std::size_t j = 1; j <= s.tau; ++j) window += s.a[k - j];
    const double rhs = s.b0 * std::pow(s.q, static_cast<double>(k)) + w * window;
    s.a.push_back(rhs * (u(rng) < 0.8 ? 1.0 : 0.5 + 0.5 * u(rng)));
  }
  return s;
}

}  // namespace oracle

#endif  // PIAG_TESTS_SUPPORT_HPP
