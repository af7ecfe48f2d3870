#include "piag/prox.hpp"

#include <vector>

namespace piag {

double prox_residual(const Problem& problem, double scale, const Vector& x) {
  const Vector g = full_gradient(problem, x);
  const Vector z = prox(problem.nonsmooth(), scale, x - scale * g);
  return (z - x).norm();
}

std::vector<double> scaled_prox_residuals(const Problem& problem,
                                          const Vector& x,
                                          std::span<const double> t_grid) {
  require(!t_grid.empty(), "scaled_prox_residuals: empty t grid");
  const Vector g = full_gradient(problem, x);
  std::vector<double> out;
  out.reserve(t_grid.size());
  double previous = 0.0;
  for (double t : t_grid) {
    require(t > 0.0, "scaled_prox_residuals: grid values must be positive");
    require(t >= previous, "scaled_prox_residuals: grid must be ascending");
    previous = t;
    const Vector z = prox(problem.nonsmooth(), t, x - t * g);
    out.push_back((z - x).norm() / t);
  }
  return out;
}

bool check_prox_scaling_monotonicity(const Problem& problem, const Vector& x,
                                     std::span<const double> t_grid) {
  const std::vector<double> q = scaled_prox_residuals(problem, x, t_grid);
  constexpr double kTolerance = 1e-10;
  for (std::size_t i = 1; i < q.size(); ++i) {
    if (q[i] > q[i - 1] + kTolerance) return false;
  }
  return true;
}

}  // namespace piag
