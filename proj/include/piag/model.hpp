#ifndef PIAG_MODEL_HPP
#define PIAG_MODEL_HPP

#include <functional>
#include <optional>
#include <vector>

#include "piag/core.hpp"

namespace piag {

/// f(x) = 0.5 x'Ax + b'x + constant, with A symmetric.
struct QuadraticForm {
  Matrix A;
  Vector b;
  double constant = 0.0;
};

/**
 * One smooth summand f_i of the composite objective.
 *
 * Carries the declared gradient Lipschitz constant L_i and the modulus l_i of
 * the concave part (f_i + l_i/2 |x|^2 is convex). Immutable after
 * construction; copies share the underlying callables.
 */
class SmoothComponent {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;

  SmoothComponent(Index dimension, ValueFn value, GradientFn gradient,
                  double lipschitz, double concave_modulus);

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;

  Index dimension() const { return dimension_; }
  double lipschitz() const { return lipschitz_; }
  double concave_modulus() const { return concave_modulus_; }

  /// Present when the component was built from a quadratic form.
  const std::optional<QuadraticForm>& quadratic() const { return quadratic_; }

  friend SmoothComponent make_quadratic_component(Matrix A, Vector b,
                                                  double constant,
                                                  double lipschitz,
                                                  double concave_modulus);

 private:
  Index dimension_;
  ValueFn value_;
  GradientFn gradient_;
  double lipschitz_;
  double concave_modulus_;
  std::optional<QuadraticForm> quadratic_;
};

/// Spectral constants of a symmetric matrix: L = max|eig|, l = max(0, -eig_min).
struct SpectralConstants {
  double lipschitz;
  double concave_modulus;
  double min_eigenvalue;
  double max_eigenvalue;
};

SpectralConstants spectral_constants(const Matrix& symmetric);

/// Quadratic component with exact constants computed from the spectrum of A.
SmoothComponent make_quadratic_component(Matrix A, Vector b,
                                         double constant = 0.0);

/// Quadratic component with caller-declared constants.
SmoothComponent make_quadratic_component(Matrix A, Vector b, double constant,
                                         double lipschitz,
                                         double concave_modulus);

/// f = convex_part - concave_part with both parts convex.
struct DCSplit {
  SmoothComponent convex_part;
  SmoothComponent concave_part;
  double shift;
};

/// f1 = f + c|x|^2/2, f2 = c|x|^2/2. Requires c > L_i.
DCSplit dc_decompose(const SmoothComponent& component, double shift);

enum class NonsmoothKind { zero, l1, box, box_plus_l1 };

const char* to_string(NonsmoothKind kind);

/**
 * The proximable convex term h. Every supported kind is separable:
 * h(x) = sum_j lambda |x_j| + indicator(lo_j <= x_j <= hi_j).
 */
class NonsmoothTerm {
 public:
  static NonsmoothTerm zero();
  static NonsmoothTerm l1(double lambda);
  static NonsmoothTerm box(Vector lower, Vector upper);
  static NonsmoothTerm box_plus_l1(Vector lower, Vector upper, double lambda);

  NonsmoothKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  bool has_box() const {
    return kind_ == NonsmoothKind::box || kind_ == NonsmoothKind::box_plus_l1;
  }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  bool in_domain(const Vector& x) const;

  /// +inf outside the domain.
  double value(const Vector& x) const;

  /// Per-coordinate bounds, -inf / +inf when the kind carries no box.
  double lower(Index j) const;
  double upper(Index j) const;

 private:
  NonsmoothTerm(NonsmoothKind kind, double lambda, Vector lower, Vector upper);

  NonsmoothKind kind_;
  double lambda_;
  Vector lower_;
  Vector upper_;
};

struct SmoothnessTotals {
  double lipschitz;        // L = sum L_i
  double concave_modulus;  // l = sum l_i
};

/// F = sum_i f_i + h over R^d.
class Problem {
 public:
  Problem(std::vector<SmoothComponent> components, NonsmoothTerm nonsmooth,
          std::optional<double> lower_bound_hint = std::nullopt);

  std::size_t size() const { return components_.size(); }
  Index dimension() const { return dimension_; }
  const std::vector<SmoothComponent>& components() const {
    return components_;
  }
  const SmoothComponent& component(std::size_t i) const {
    return components_[i];
  }
  const NonsmoothTerm& nonsmooth() const { return nonsmooth_; }
  const std::optional<double>& lower_bound_hint() const {
    return lower_bound_hint_;
  }

  /// True when every component carries its quadratic form.
  bool is_quadratic() const;

 private:
  std::vector<SmoothComponent> components_;
  NonsmoothTerm nonsmooth_;
  Index dimension_;
  std::optional<double> lower_bound_hint_;
};

/// sum_i f_i(x), accumulated in index order starting from 0.0.
double eval_f(const Problem& problem, const Vector& x);

/// eval_f(x) + h(x), evaluated in that order.
double eval_F(const Problem& problem, const Vector& x);

/// sum_i grad f_i(x), accumulated in index order starting from the zero vector.
Vector full_gradient(const Problem& problem, const Vector& x);

SmoothnessTotals smoothness_totals(const Problem& problem);

/// Sum of the quadratic data over all components; requires is_quadratic().
QuadraticForm aggregate_quadratic(const Problem& problem);

}  // namespace piag

#endif  // PIAG_MODEL_HPP
