#include "piag/problems.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "piag/prox.hpp"

namespace piag {

Matrix random_orthogonal(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix G(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) G(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < d; ++j) {
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  }
  return Q;
}

Matrix random_symmetric(const Vector& eigenvalues, std::mt19937_64& rng) {
  const Matrix Q = random_orthogonal(eigenvalues.size(), rng);
  Matrix A = Q * eigenvalues.asDiagonal() * Q.transpose();
  return 0.5 * (A + A.transpose());
}

namespace {

Vector uniform_vector(Index d, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(d);
  for (Index j = 0; j < d; ++j) v[j] = u(rng);
  return v;
}

Vector normal_vector(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(d);
  for (Index j = 0; j < d; ++j) v[j] = normal(rng);
  return v;
}

}  // namespace

Problem make_quadratic_box(std::size_t N, Index d, std::uint64_t seed,
                           double negative_curvature,
                           std::optional<double> half_width) {
  require(N >= 1 && N <= 100, "make_quadratic_box: need 1 <= N <= 100");
  require(d >= 1 && d <= 200, "make_quadratic_box: need 1 <= d <= 200");
  require(negative_curvature >= 0.0,
          "make_quadratic_box: negative_curvature must be nonnegative");
  std::mt19937_64 rng(seed);
  std::vector<SmoothComponent> components;
  components.reserve(N);
  Matrix sum_A = Matrix::Zero(d, d);
  Vector sum_b = Vector::Zero(d);
  for (std::size_t i = 0; i < N; ++i) {
    const Vector eig = uniform_vector(d, -negative_curvature, 1.0, rng);
    Matrix A = random_symmetric(eig, rng);
    Vector b = normal_vector(d, rng);
    sum_A += A;
    sum_b += b;
    components.push_back(make_quadratic_component(std::move(A), std::move(b)));
  }
  double B = 0.0;
  if (half_width) {
    require(*half_width > 0.0, "make_quadratic_box: half width must be positive");
    B = *half_width;
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sum_A, Eigen::EigenvaluesOnly);
    double smallest_positive = 1.0;
    bool found = false;
    for (Index j = 0; j < d; ++j) {
      const double ev = es.eigenvalues()[j];
      if (ev > 1e-12 && (!found || ev < smallest_positive)) {
        smallest_positive = ev;
        found = true;
      }
    }
    B = 10.0 * (1.0 + sum_b.norm() / smallest_positive);
  }
  return Problem(std::move(components),
                 NonsmoothTerm::box(Vector::Constant(d, -B),
                                    Vector::Constant(d, B)));
}

Problem make_quadratic_l1(std::size_t N, Index d, std::uint64_t seed,
                          double lambda) {
  require(N >= 1 && N <= 100, "make_quadratic_l1: need 1 <= N <= 100");
  require(d >= 1 && d <= 200, "make_quadratic_l1: need 1 <= d <= 200");
  require(lambda >= 0.0, "make_quadratic_l1: lambda must be nonnegative");
  constexpr double kIndefinite = 0.25;
  constexpr double kMinCurvature = 0.1;
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<SmoothComponent> components;
    Matrix sum_A = Matrix::Zero(d, d);
    for (std::size_t i = 0; i < N; ++i) {
      const Vector eig = uniform_vector(d, -kIndefinite, 1.0, rng);
      Matrix A = random_symmetric(eig, rng);
      Vector b = normal_vector(d, rng);
      sum_A += A;
      components.push_back(make_quadratic_component(std::move(A), std::move(b)));
    }
    if (spectral_constants(sum_A).min_eigenvalue >= kMinCurvature) {
      return Problem(std::move(components), NonsmoothTerm::l1(lambda));
    }
  }
  throw GenerationError(
      "make_quadratic_l1: sum of components not strongly convex after 100 draws");
}

const char* to_string(ReferenceMethod method) {
  switch (method) {
    case ReferenceMethod::analytic:
      return "analytic";
    case ReferenceMethod::grid:
      return "grid";
    case ReferenceMethod::kkt_enumeration:
      return "kkt_enumeration";
    case ReferenceMethod::fixed_point:
      return "fixed_point";
  }
  return "unknown";
}

namespace {

// Per-coordinate structure of a separable h: breakpoints where h_j has a kink
// or a domain edge, and the open pieces between them.
struct Piece {
  double lo;
  double hi;
  double slope;
};

struct CoordinateStates {
  std::vector<double> breakpoints;
  std::vector<Piece> pieces;
};

double piece_slope(double lo, double hi, double lambda) {
  if (lambda == 0.0) return 0.0;
  double mid;
  if (std::isfinite(lo) && std::isfinite(hi)) {
    mid = 0.5 * (lo + hi);
  } else if (std::isfinite(lo)) {
    mid = lo + 1.0;
  } else if (std::isfinite(hi)) {
    mid = hi - 1.0;
  } else {
    mid = 0.0;  // unreachable: lambda > 0 always adds the kink at 0
  }
  return mid > 0.0 ? lambda : -lambda;
}

CoordinateStates coordinate_states(const NonsmoothTerm& h, Index j) {
  CoordinateStates s;
  const double lo = h.lower(j);
  const double hi = h.upper(j);
  const double lambda = h.lambda();
  if (std::isfinite(lo)) s.breakpoints.push_back(lo);
  if (lambda > 0.0 && lo < 0.0 && 0.0 < hi) s.breakpoints.push_back(0.0);
  if (std::isfinite(hi) && hi != lo) s.breakpoints.push_back(hi);
  std::sort(s.breakpoints.begin(), s.breakpoints.end());

  std::vector<double> edges;
  if (!std::isfinite(lo)) edges.push_back(-kInfinity);
  edges.insert(edges.end(), s.breakpoints.begin(), s.breakpoints.end());
  if (!std::isfinite(hi)) edges.push_back(kInfinity);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (edges[i] < edges[i + 1]) {
      s.pieces.push_back({edges[i], edges[i + 1],
                          piece_slope(edges[i], edges[i + 1], lambda)});
    }
  }
  return s;
}

// Subdifferential of h_j at breakpoint p as [left, right].
std::pair<double, double> breakpoint_subdifferential(const NonsmoothTerm& h,
                                                     const CoordinateStates& s,
                                                     Index j, double p) {
  double left = -kInfinity;
  double right = kInfinity;
  if (p != h.lower(j)) {
    for (const auto& piece : s.pieces) {
      if (piece.hi == p) left = piece.slope;
    }
  }
  if (p != h.upper(j)) {
    for (const auto& piece : s.pieces) {
      if (piece.lo == p) right = piece.slope;
    }
  }
  return {left, right};
}

struct KktState {
  bool fixed;
  double value;  // breakpoint when fixed
  Piece piece;   // piece when free
};

// Solves the reduced system for one active-set pattern. Returns the point
// when it satisfies every KKT condition.
std::optional<Vector> solve_pattern(const QuadraticForm& q,
                                    const NonsmoothTerm& h,
                                    const std::vector<CoordinateStates>& states,
                                    const std::vector<KktState>& pattern) {
  const Index d = q.b.size();
  std::vector<Index> free_idx;
  Vector x = Vector::Zero(d);
  for (Index j = 0; j < d; ++j) {
    if (pattern[j].fixed) {
      x[j] = pattern[j].value;
    } else {
      free_idx.push_back(j);
    }
  }
  const double scale = 1.0 + q.A.cwiseAbs().maxCoeff() + q.b.cwiseAbs().maxCoeff();
  if (!free_idx.empty()) {
    const Index m = static_cast<Index>(free_idx.size());
    Matrix Aff(m, m);
    Vector rhs(m);
    for (Index r = 0; r < m; ++r) {
      const Index j = free_idx[r];
      double fixed_part = q.b[j] + pattern[j].piece.slope;
      for (Index c = 0; c < d; ++c) {
        if (pattern[c].fixed) fixed_part += q.A(j, c) * x[c];
      }
      rhs[r] = -fixed_part;
      for (Index c = 0; c < m; ++c) Aff(r, c) = q.A(j, free_idx[c]);
    }
    Eigen::FullPivLU<Matrix> lu(Aff);
    lu.setThreshold(1e-10);
    if (lu.rank() < m) {
      const Vector candidate = lu.solve(rhs);
      if ((Aff * candidate - rhs).norm() <= 1e-9 * scale) {
        throw NotAvailable(
            "reference_solution: stationary set is not isolated");
      }
      return std::nullopt;
    }
    const Vector xf = lu.solve(rhs);
    for (Index r = 0; r < m; ++r) {
      const Piece& p = pattern[free_idx[r]].piece;
      if (!(xf[r] > p.lo && xf[r] < p.hi)) return std::nullopt;
      x[free_idx[r]] = xf[r];
    }
  }
  const Vector g = q.A * x + q.b;
  const double tol = 1e-10 * scale * (1.0 + x.cwiseAbs().maxCoeff());
  for (Index j = 0; j < d; ++j) {
    if (!pattern[j].fixed) continue;
    const auto [left, right] =
        breakpoint_subdifferential(h, states[j], j, pattern[j].value);
    if (-g[j] < left - tol || -g[j] > right + tol) return std::nullopt;
  }
  return x;
}

void enumerate(const QuadraticForm& q, const NonsmoothTerm& h,
               const std::vector<CoordinateStates>& states,
               std::vector<KktState>& pattern, Index j,
               std::vector<Vector>& found) {
  const Index d = q.b.size();
  if (j == d) {
    if (auto x = solve_pattern(q, h, states, pattern)) {
      for (const auto& y : found) {
        if ((y - *x).norm() <= 1e-9 * (1.0 + y.norm())) return;
      }
      found.push_back(*x);
    }
    return;
  }
  for (double p : states[j].breakpoints) {
    pattern[j] = {true, p, {}};
    enumerate(q, h, states, pattern, j + 1, found);
  }
  for (const auto& piece : states[j].pieces) {
    pattern[j] = {false, 0.0, piece};
    enumerate(q, h, states, pattern, j + 1, found);
  }
}

std::vector<Vector> kkt_enumeration(const QuadraticForm& q,
                                    const NonsmoothTerm& h) {
  const Index d = q.b.size();
  std::vector<CoordinateStates> states;
  for (Index j = 0; j < d; ++j) states.push_back(coordinate_states(h, j));
  std::vector<KktState> pattern(static_cast<std::size_t>(d));
  std::vector<Vector> found;
  enumerate(q, h, states, pattern, 0, found);
  return found;
}

// Forward-backward on a strongly convex sum, then re-solved exactly on the
// identified active set.
Vector strongly_convex_fixed_point(const Problem& problem,
                                   const QuadraticForm& q) {
  const Index d = problem.dimension();
  const NonsmoothTerm& h = problem.nonsmooth();
  const SpectralConstants sc = spectral_constants(q.A);
  const double alpha = 1.0 / sc.max_eigenvalue;
  Vector x = Vector::Zero(d);
  if (h.has_box()) x = prox(h, alpha, x);
  bool settled = false;
  for (int it = 0; it < 2000000; ++it) {
    const Vector next = prox(h, alpha, x - alpha * (q.A * x + q.b));
    const double moved = (next - x).norm();
    x = next;
    if (moved <= 1e-15 * (1.0 + x.norm())) {
      settled = true;
      break;
    }
  }
  if (!settled && prox_residual(problem, alpha, x) > 1e-12) {
    throw NotAvailable("reference_solution: fixed-point iteration stalled");
  }

  std::vector<CoordinateStates> states;
  std::vector<KktState> pattern;
  for (Index j = 0; j < d; ++j) {
    states.push_back(coordinate_states(h, j));
    KktState st{false, 0.0, {}};
    bool placed = false;
    for (double p : states.back().breakpoints) {
      if (x[j] == p) {
        st = {true, p, {}};
        placed = true;
      }
    }
    if (!placed) {
      for (const auto& piece : states.back().pieces) {
        if (x[j] > piece.lo && x[j] < piece.hi) st = {false, 0.0, piece};
      }
    }
    pattern.push_back(st);
  }
  if (auto polished = solve_pattern(q, h, states, pattern)) {
    if (prox_residual(problem, alpha, *polished) <=
        prox_residual(problem, alpha, x)) {
      return *polished;
    }
  }
  return x;
}

}  // namespace

ReferenceSolution reference_solution(const Problem& problem) {
  if (!problem.is_quadratic()) {
    throw NotAvailable("reference_solution: only quadratic problems are supported");
  }
  const QuadraticForm q = aggregate_quadratic(problem);
  const Index d = problem.dimension();
  const double lambda_min = spectral_constants(q.A).min_eigenvalue;
  const bool strongly_convex = lambda_min > 1e-8;

  ReferenceSolution ref;
  if (strongly_convex && problem.nonsmooth().kind() == NonsmoothKind::zero) {
    ref.method = ReferenceMethod::analytic;
    ref.stationary_points.push_back(q.A.llt().solve(-q.b));
  } else if (strongly_convex) {
    ref.method = ReferenceMethod::fixed_point;
    ref.stationary_points.push_back(strongly_convex_fixed_point(problem, q));
  } else if (d <= 3) {
    ref.method = ReferenceMethod::kkt_enumeration;
    ref.stationary_points = kkt_enumeration(q, problem.nonsmooth());
  } else {
    throw NotAvailable("reference_solution: no enumeration for d = " +
                       std::to_string(d) + " without strong convexity");
  }
  for (const auto& x : ref.stationary_points) {
    ref.objective_values.push_back(eval_F(problem, x));
  }
  return ref;
}

double dist_to_stationary(const Vector& x, const ReferenceSolution& ref) {
  require(!ref.stationary_points.empty(),
          "dist_to_stationary: stationary set is empty");
  double best = kInfinity;
  for (const auto& s : ref.stationary_points) {
    require(s.size() == x.size(), "dist_to_stationary: dimension mismatch");
    best = std::min(best, (x - s).norm());
  }
  return best;
}

double fit_error_bound_constant(const Problem& problem,
                                const ReferenceSolution& ref,
                                std::uint64_t seed, std::size_t samples,
                                double radius) {
  require(!ref.stationary_points.empty(),
          "fit_error_bound_constant: stationary set is empty");
  require(radius > 0.0, "fit_error_bound_constant: radius must be positive");
  const double L = smoothness_totals(problem).lipschitz;
  const Index d = problem.dimension();
  const NonsmoothTerm& h = problem.nonsmooth();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(
      0, ref.stationary_points.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t n = 0; n < samples; ++n) {
    Vector direction = normal_vector(d, rng);
    direction.normalize();
    const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(d));
    Vector x = ref.stationary_points[pick(rng)] + r * direction;
    if (h.has_box()) x = x.cwiseMax(h.lower()).cwiseMin(h.upper());
    const double residual = prox_residual(problem, 1.0 / L, x);
    const double dist = dist_to_stationary(x, ref);
    if (residual > 1e-14) worst = std::max(worst, dist / residual);
  }
  return worst;
}

double stationary_value_separation(const ReferenceSolution& ref) {
  double best = kInfinity;
  const auto& pts = ref.stationary_points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double gap = std::abs(ref.objective_values[i] - ref.objective_values[j]);
      if (gap > 1e-12 * (1.0 + std::abs(ref.objective_values[i]))) {
        best = std::min(best, (pts[i] - pts[j]).norm());
      }
    }
  }
  return best;
}

}  // namespace piag
