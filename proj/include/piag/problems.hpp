#ifndef PIAG_PROBLEMS_HPP
#define PIAG_PROBLEMS_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "piag/model.hpp"

namespace piag {

/// Haar-distributed orthogonal matrix from the QR factorisation of a
/// Gaussian matrix (column signs fixed by diag(R) > 0).
Matrix random_orthogonal(Index d, std::mt19937_64& rng);

/// Symmetric Q diag(eigenvalues) Q' with a random orthogonal Q.
Matrix random_symmetric(const Vector& eigenvalues, std::mt19937_64& rng);

/**
 * N random quadratics with spectra in [-negative_curvature, 1] plus
 * h = indicator of [-B, B]^d. B defaults to 10 (1 + |sum b| / lambda_min^+)
 * where lambda_min^+ is the smallest positive eigenvalue of sum A_i.
 */
Problem make_quadratic_box(std::size_t N, Index d, std::uint64_t seed,
                           double negative_curvature,
                           std::optional<double> half_width = std::nullopt);

/// Individually indefinite quadratics whose sum has lambda_min >= 0.1, plus
/// h = lambda |x|_1. Throws GenerationError after 100 failed draws.
Problem make_quadratic_l1(std::size_t N, Index d, std::uint64_t seed,
                          double lambda);

enum class ReferenceMethod { analytic, grid, kkt_enumeration, fixed_point };

const char* to_string(ReferenceMethod method);

struct ReferenceSolution {
  std::vector<Vector> stationary_points;
  std::vector<double> objective_values;
  ReferenceMethod method = ReferenceMethod::analytic;
};

/**
 * Stationary set of a quadratic problem.
 *
 *  - h = zero and sum A positive definite: normal equations (analytic).
 *  - sum A positive definite, any d: forward-backward fixed point polished
 *    on the identified active set (fixed_point).
 *  - d <= 3: enumeration of every active-set pattern of the separable KKT
 *    system (kkt_enumeration).
 *
 * Throws NotAvailable otherwise, or when the stationary set is not isolated.
 */
ReferenceSolution reference_solution(const Problem& problem);

double dist_to_stationary(const Vector& x, const ReferenceSolution& ref);

/**
 * Empirical error-bound constant: max over `samples` points near the
 * stationary set of dist(x, X) / |prox_{h/L}(x - grad f(x)/L) - x|.
 */
double fit_error_bound_constant(const Problem& problem,
                                const ReferenceSolution& ref,
                                std::uint64_t seed, std::size_t samples = 200,
                                double radius = 1e-2);

/// Smallest distance between stationary points with different objective
/// values (+inf when all values coincide).
double stationary_value_separation(const ReferenceSolution& ref);

}  // namespace piag

#endif  // PIAG_PROBLEMS_HPP
