#include "piag/model.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <utility>

namespace piag {

namespace {

void check_dimension(const Vector& x, Index d, const char* what) {
  if (x.size() != d) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch (got " +
                          std::to_string(x.size()) + ", expected " +
                          std::to_string(d) + ")");
  }
}

}  // namespace

SmoothComponent::SmoothComponent(Index dimension, ValueFn value,
                                 GradientFn gradient, double lipschitz,
                                 double concave_modulus)
    : dimension_(dimension),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      lipschitz_(lipschitz),
      concave_modulus_(concave_modulus) {
  require(dimension_ >= 1, "SmoothComponent: dimension must be positive");
  require(static_cast<bool>(value_) && static_cast<bool>(gradient_),
          "SmoothComponent: value and gradient must be callable");
  require(std::isfinite(lipschitz_) && lipschitz_ > 0.0,
          "SmoothComponent: L_i must be finite and positive");
  require(std::isfinite(concave_modulus_) && concave_modulus_ >= 0.0 &&
              concave_modulus_ <= lipschitz_,
          "SmoothComponent: l_i must satisfy 0 <= l_i <= L_i");
}

double SmoothComponent::value(const Vector& x) const {
  check_dimension(x, dimension_, "SmoothComponent::value");
  return value_(x);
}

Vector SmoothComponent::gradient(const Vector& x) const {
  check_dimension(x, dimension_, "SmoothComponent::gradient");
  return gradient_(x);
}

SpectralConstants spectral_constants(const Matrix& symmetric) {
  require(symmetric.rows() == symmetric.cols() && symmetric.rows() >= 1,
          "spectral_constants: matrix must be square and non-empty");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric,
                                               Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw InvalidArgument("spectral_constants: eigenvalue solver failed");
  }
  const double lo = solver.eigenvalues().minCoeff();
  const double hi = solver.eigenvalues().maxCoeff();
  return {std::max(std::abs(lo), std::abs(hi)), std::max(0.0, -lo), lo, hi};
}

SmoothComponent make_quadratic_component(Matrix A, Vector b, double constant,
                                         double lipschitz,
                                         double concave_modulus) {
  require(A.rows() == A.cols() && A.rows() >= 1,
          "quadratic component: A must be square");
  require(b.size() == A.rows(), "quadratic component: b has wrong size");
  const double scale = 1.0 + A.cwiseAbs().maxCoeff();
  require((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
          "quadratic component: A must be symmetric");

  auto form = std::make_shared<const QuadraticForm>(
      QuadraticForm{std::move(A), std::move(b), constant});
  const Index d = form->A.rows();
  SmoothComponent component(
      d,
      [form](const Vector& x) {
        return 0.5 * x.dot(form->A * x) + form->b.dot(x) + form->constant;
      },
      [form](const Vector& x) -> Vector { return form->A * x + form->b; },
      lipschitz, concave_modulus);
  component.quadratic_ = *form;
  return component;
}

SmoothComponent make_quadratic_component(Matrix A, Vector b, double constant) {
  const SpectralConstants sc = spectral_constants(A);
  // An all-zero matrix still needs a positive Lipschitz constant.
  const double lipschitz = std::max(sc.lipschitz, 1e-12);
  return make_quadratic_component(std::move(A), std::move(b), constant,
                                  lipschitz, sc.concave_modulus);
}

DCSplit dc_decompose(const SmoothComponent& component, double shift) {
  if (!(shift > component.lipschitz())) {
    throw InvalidArgument(
        "dc_decompose: shift c must exceed L_i for the first part to be convex");
  }
  const Index d = component.dimension();
  SmoothComponent convex_part(
      d,
      [component, shift](const Vector& x) {
        return component.value(x) + 0.5 * shift * x.squaredNorm();
      },
      [component, shift](const Vector& x) -> Vector {
        return component.gradient(x) + shift * x;
      },
      component.lipschitz() + shift, 0.0);
  SmoothComponent concave_part(
      d, [shift](const Vector& x) { return 0.5 * shift * x.squaredNorm(); },
      [shift](const Vector& x) -> Vector { return shift * x; }, shift, 0.0);
  return {std::move(convex_part), std::move(concave_part), shift};
}

const char* to_string(NonsmoothKind kind) {
  switch (kind) {
    case NonsmoothKind::zero:
      return "zero";
    case NonsmoothKind::l1:
      return "l1";
    case NonsmoothKind::box:
      return "box";
    case NonsmoothKind::box_plus_l1:
      return "box_plus_l1";
  }
  return "unknown";
}

NonsmoothTerm::NonsmoothTerm(NonsmoothKind kind, double lambda, Vector lower,
                             Vector upper)
    : kind_(kind),
      lambda_(lambda),
      lower_(std::move(lower)),
      upper_(std::move(upper)) {
  require(std::isfinite(lambda_) && lambda_ >= 0.0,
          "NonsmoothTerm: lambda must be finite and nonnegative");
  if (has_box()) {
    require(lower_.size() == upper_.size() && lower_.size() >= 1,
            "NonsmoothTerm: box bounds must have equal positive length");
    for (Index j = 0; j < lower_.size(); ++j) {
      require(!std::isnan(lower_[j]) && !std::isnan(upper_[j]) &&
                  lower_[j] <= upper_[j],
              "NonsmoothTerm: box requires lo <= hi componentwise");
    }
  }
}

NonsmoothTerm NonsmoothTerm::zero() {
  return NonsmoothTerm(NonsmoothKind::zero, 0.0, Vector(), Vector());
}

NonsmoothTerm NonsmoothTerm::l1(double lambda) {
  return NonsmoothTerm(NonsmoothKind::l1, lambda, Vector(), Vector());
}

NonsmoothTerm NonsmoothTerm::box(Vector lower, Vector upper) {
  return NonsmoothTerm(NonsmoothKind::box, 0.0, std::move(lower),
                       std::move(upper));
}

NonsmoothTerm NonsmoothTerm::box_plus_l1(Vector lower, Vector upper,
                                         double lambda) {
  return NonsmoothTerm(NonsmoothKind::box_plus_l1, lambda, std::move(lower),
                       std::move(upper));
}

double NonsmoothTerm::lower(Index j) const {
  return has_box() ? lower_[j] : -kInfinity;
}

double NonsmoothTerm::upper(Index j) const {
  return has_box() ? upper_[j] : kInfinity;
}

bool NonsmoothTerm::in_domain(const Vector& x) const {
  if (!has_box()) return true;
  check_dimension(x, lower_.size(), "NonsmoothTerm::in_domain");
  for (Index j = 0; j < x.size(); ++j) {
    if (!(x[j] >= lower_[j] && x[j] <= upper_[j])) return false;
  }
  return true;
}

double NonsmoothTerm::value(const Vector& x) const {
  if (!in_domain(x)) return kInfinity;
  switch (kind_) {
    case NonsmoothKind::zero:
    case NonsmoothKind::box:
      return 0.0;
    case NonsmoothKind::l1:
    case NonsmoothKind::box_plus_l1:
      return lambda_ * x.lpNorm<1>();
  }
  return 0.0;
}

Problem::Problem(std::vector<SmoothComponent> components,
                 NonsmoothTerm nonsmooth,
                 std::optional<double> lower_bound_hint)
    : components_(std::move(components)),
      nonsmooth_(std::move(nonsmooth)),
      dimension_(0),
      lower_bound_hint_(lower_bound_hint) {
  require(!components_.empty(), "Problem: need at least one component");
  dimension_ = components_.front().dimension();
  for (const auto& c : components_) {
    require(c.dimension() == dimension_,
            "Problem: all components must share one dimension");
  }
  if (nonsmooth_.has_box()) {
    require(nonsmooth_.lower().size() == dimension_,
            "Problem: box bounds must match the problem dimension");
  }
}

bool Problem::is_quadratic() const {
  for (const auto& c : components_) {
    if (!c.quadratic()) return false;
  }
  return true;
}

double eval_f(const Problem& problem, const Vector& x) {
  check_dimension(x, problem.dimension(), "eval_f");
  double total = 0.0;
  for (const auto& c : problem.components()) total += c.value(x);
  return total;
}

double eval_F(const Problem& problem, const Vector& x) {
  const double smooth = eval_f(problem, x);
  return smooth + problem.nonsmooth().value(x);
}

Vector full_gradient(const Problem& problem, const Vector& x) {
  check_dimension(x, problem.dimension(), "full_gradient");
  Vector g = Vector::Zero(problem.dimension());
  for (const auto& c : problem.components()) g += c.gradient(x);
  return g;
}

SmoothnessTotals smoothness_totals(const Problem& problem) {
  SmoothnessTotals totals{0.0, 0.0};
  for (const auto& c : problem.components()) {
    totals.lipschitz += c.lipschitz();
    totals.concave_modulus += c.concave_modulus();
  }
  return totals;
}

QuadraticForm aggregate_quadratic(const Problem& problem) {
  if (!problem.is_quadratic()) {
    throw NotAvailable("aggregate_quadratic: problem has non-quadratic parts");
  }
  const Index d = problem.dimension();
  QuadraticForm sum{Matrix::Zero(d, d), Vector::Zero(d), 0.0};
  for (const auto& c : problem.components()) {
    sum.A += c.quadratic()->A;
    sum.b += c.quadratic()->b;
    sum.constant += c.quadratic()->constant;
  }
  return sum;
}

}  // namespace piag
