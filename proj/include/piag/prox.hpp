#ifndef PIAG_PROX_HPP
#define PIAG_PROX_HPP

#include <algorithm>
#include <cmath>
#include <span>

#include "piag/model.hpp"

namespace piag {

/// sign(y) * max(|y| - t, 0); |y| == t maps to 0.
template <typename Scalar>
Scalar soft_threshold(Scalar y, Scalar t) {
  if (y > t) return y - t;
  if (y < -t) return y + t;
  return Scalar(0);
}

/**
 * prox_{scale*h}(anchor) = argmin_x h(x) + |x - anchor|^2 / (2 scale).
 *
 * Closed forms: identity for zero, soft-threshold for l1, clamp for box and
 * soft-threshold followed by clamp for box_plus_l1 (valid because h is
 * separable and each scalar problem is strongly convex on an interval).
 */
template <typename Derived>
Vector prox(const NonsmoothTerm& term, double scale,
            const Eigen::MatrixBase<Derived>& anchor) {
  if (!(scale > 0.0)) {
    throw InvalidArgument("prox: scale must be positive");
  }
  Vector out = anchor;
  if (term.has_box()) {
    require(out.size() == term.lower().size(), "prox: dimension mismatch");
  }
  switch (term.kind()) {
    case NonsmoothKind::zero:
      break;
    case NonsmoothKind::l1: {
      const double t = scale * term.lambda();
      for (Index j = 0; j < out.size(); ++j) out[j] = soft_threshold(out[j], t);
      break;
    }
    case NonsmoothKind::box:
      for (Index j = 0; j < out.size(); ++j) {
        out[j] = std::clamp(out[j], term.lower()[j], term.upper()[j]);
      }
      break;
    case NonsmoothKind::box_plus_l1: {
      const double t = scale * term.lambda();
      for (Index j = 0; j < out.size(); ++j) {
        out[j] = std::clamp(soft_threshold(out[j], t), term.lower()[j],
                            term.upper()[j]);
      }
      break;
    }
  }
  return out;
}

struct ProxQuery {
  const NonsmoothTerm& term;
  double scale;
  Vector anchor;
};

inline Vector prox(const ProxQuery& query) {
  return prox(query.term, query.scale, query.anchor);
}

/// |prox_{scale h}(x - scale grad f(x)) - x| with the fresh full gradient.
double prox_residual(const Problem& problem, double scale, const Vector& x);

/// (1/t) |prox_{t h}(x - t grad f(x)) - x| for each t in the grid.
std::vector<double> scaled_prox_residuals(const Problem& problem,
                                          const Vector& x,
                                          std::span<const double> t_grid);

/// True iff the scaled residual is nonincreasing in t over the ascending grid
/// (absolute tolerance 1e-10).
bool check_prox_scaling_monotonicity(const Problem& problem, const Vector& x,
                                     std::span<const double> t_grid);

}  // namespace piag

#endif  // PIAG_PROX_HPP
