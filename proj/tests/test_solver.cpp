#include "doctest.h"
#include "piag/problems.hpp"
#include "piag/prox.hpp"
#include "piag/solver.hpp"
#include "support.hpp"

using namespace piag;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Problem scalar_quadratic(double a, NonsmoothTerm h) {
  return Problem({make_quadratic_component(a * Matrix::Identity(1, 1), Vector::Zero(1))},
                 std::move(h));
}

SolverConfig config(double alpha, DelaySchedule s, Vector x0) {
  SolverConfig c;
  c.alpha = alpha;
  c.schedule = s;
  c.x0 = std::move(x0);
  return c;
}

}  // namespace

TEST_CASE("stepsize threshold") {
  CHECK(stepsize_threshold(2.0, 0.0, 0) == doctest::Approx(1.0));
  CHECK(stepsize_threshold(4.0, 2.0, 1) == doctest::Approx(0.1));
  for (std::size_t tau = 0; tau < 20; ++tau) {
    CHECK(stepsize_threshold(3.0, 1.0, tau + 1) < stepsize_threshold(3.0, 1.0, tau));
  }
  CHECK_THROWS_AS(stepsize_threshold(0.0, 0.0, 1), InvalidArgument);
}

TEST_CASE("theorem constants") {
  SUBCASE("tau = 0") {
    const auto k = theorem1_constants(3.0, 1.0, 0, 2.0);
    CHECK(k.C1 == doctest::Approx(1.5));
    CHECK(k.C2 == doctest::Approx(2.0));
    CHECK(k.C7 == doctest::Approx(k.C6));
  }
  SUBCASE("hand values at L=1, l=0, tau=1, c0=1") {
    const auto k = theorem1_constants(1.0, 0.0, 1, 1.0);
    CHECK(k.C5 == doctest::Approx(2.0));
    CHECK(k.C6 == doctest::Approx(3.0));
    CHECK(k.C7 == doctest::Approx(9.0));
    CHECK(k.C8 == doctest::Approx(std::min({1.0 / (1.0 + 1.0), 1.0 / 22.0, 1.0})));
  }
  SUBCASE("expanded polynomial forms") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    for (int t = 0; t < 200; ++t) {
      const double L = u(rng), l = L * u(rng) / 5.0, c0 = u(rng);
      const std::size_t tau = static_cast<std::size_t>(t % 11);
      const long double T = tau, LL = L, ll = l, c = c0, q = c * c;
      const auto k = theorem1_constants(L, l, tau, c0);
      // Each expression multiplied out term by term.
      const long double C3 = (q * 2 * ll * T + q * 2 * ll + q * LL + LL * T) / (2 * LL * LL);
      const long double C4 = (ll + ll * T + LL + LL * T + 2 * T * q * ll + 2 * T * q * LL +
                              2 * T * T * q * ll) / (2 * LL * LL);
      const long double C5 = ll + LL + ll * T + LL * T / 2 + LL * T / (2 * q);
      const long double C6 = (T * ll / q + T * LL / q + ll / q + LL / q) / 2 + ll * T * T +
                             1.5L * ll * T + ll / 2 + 1.5L * LL * T + LL / 2;
      long double pw = 1;
      for (std::size_t j = 0; j < tau; ++j) pw *= (q + 1) / q;
      const long double C7 = C6 + C6 * T * pw;
      CHECK(k.C3 == doctest::Approx(static_cast<double>(C3)).epsilon(1e-12));
      CHECK(k.C4 == doctest::Approx(static_cast<double>(C4)).epsilon(1e-12));
      CHECK(k.C5 == doctest::Approx(static_cast<double>(C5)).epsilon(1e-12));
      CHECK(k.C6 == doctest::Approx(static_cast<double>(C6)).epsilon(1e-12));
      CHECK(k.C7 == doctest::Approx(static_cast<double>(C7)).epsilon(1e-10));
      CHECK(k.C8 <= 1.0 / L);
      CHECK(k.C8 <= k.alpha_lemma2);
      CHECK(k.contraction_a > 0.0);
      // a = 1 / (1 + r^2) rounds to 1.0 when C8 is tiny; r > 0 is the real content.
      CHECK(k.contraction_a <= 1.0);
      CHECK(L * k.C8 / c0 > 0.0);
    }
  }
  CHECK_THROWS_AS(theorem1_constants(1.0, 0.0, 1, 0.0), InvalidArgument);
}

TEST_CASE("piag_step hand recursions") {
  SUBCASE("gradient descent identity") {
    const Problem p = scalar_quadratic(1.0, NonsmoothTerm::zero());
    GradientTable t(p, vec({1.0}), 0);
    const std::vector<std::size_t> all{0};
    CHECK(piag_step(p, t, 0, vec({1.0}), 0.1, all)(0) == doctest::Approx(0.9));
  }
  SUBCASE("stale gradient at k = 1") {
    const Problem p = scalar_quadratic(1.0, NonsmoothTerm::zero());
    GradientTable t(p, vec({1.0}), 1);
    const std::vector<std::size_t> all{0}, none{};
    const Vector x1 = piag_step(p, t, 0, vec({1.0}), 0.1, all);
    const Vector x2 = piag_step(p, t, 1, x1, 0.1, none);
    CHECK(x1(0) == doctest::Approx(0.9));
    CHECK(x2(0) == doctest::Approx(0.8));
  }
  SUBCASE("nonconvex inside the box") {
    const Problem p = scalar_quadratic(-1.0, NonsmoothTerm::box(vec({-1.0}), vec({1.0})));
    GradientTable t(p, vec({0.5}), 0);
    const std::vector<std::size_t> all{0};
    CHECK(piag_step(p, t, 0, vec({0.5}), 0.1, all)(0) == doctest::Approx(0.55));
  }
  SUBCASE("overflow raises a divergence error") {
    const Problem p = scalar_quadratic(1.0, NonsmoothTerm::zero());
    GradientTable t(p, vec({1e308}), 0);
    const std::vector<std::size_t> all{0};
    try {
      piag_step(p, t, 7, vec({1e308}), 1e10, all);
      FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
      CHECK(e.iteration() >= 7);
    }
  }
}

TEST_CASE("solve on closed-form instances") {
  SUBCASE("strongly convex contraction") {
    const Problem p(
        {make_quadratic_component(Matrix::Identity(2, 2), Vector::Zero(2))},
        NonsmoothTerm::zero());
    auto c = config(0.5, DelaySchedule::none(), vec({1.0, 1.0}));
    c.check_every = 1;
    const Trace t = solve(p, c);
    CHECK(t.termination == Termination::converged);
    CHECK(t.iterations <= 30);
    for (const auto& r : t.records) {
      CHECK(r.objective == doctest::Approx(std::pow(0.5, 2.0 * r.k)).epsilon(1e-12));
    }
  }
  SUBCASE("nonconvex run climbs to the boundary") {
    const Problem p = scalar_quadratic(-1.0, NonsmoothTerm::box(vec({-1.0}), vec({1.0})));
    const Trace t = solve(p, config(0.05, DelaySchedule::none(), vec({0.3})));
    CHECK(t.termination == Termination::converged);
    CHECK(t.final_x(0) == 1.0);
    CHECK(t.final_objective == doctest::Approx(-0.5));
    for (std::size_t i = 1; i < t.records.size(); ++i) {
      CHECK(t.records[i].objective <= t.records[i - 1].objective);
    }
  }
  SUBCASE("stationary start stops at k = 0") {
    const Problem p = scalar_quadratic(-1.0, NonsmoothTerm::box(vec({-1.0}), vec({1.0})));
    for (auto s : {DelaySchedule::none(), DelaySchedule::adversarial_max(3),
                   DelaySchedule::uniform_random(1, 2)}) {
      const Trace t = solve(p, config(0.05, s, vec({1.0})));
      CHECK(t.iterations == 0);
      CHECK(t.final_residual == 0.0);
    }
  }
  SUBCASE("input validation") {
    const Problem p = scalar_quadratic(1.0, NonsmoothTerm::box(vec({-1.0}), vec({1.0})));
    CHECK_THROWS_AS(solve(p, config(0.1, DelaySchedule::none(), vec({2.0}))), InvalidArgument);
    CHECK_THROWS_AS(solve(p, config(0.0, DelaySchedule::none(), vec({0.0}))), InvalidArgument);
    CHECK_THROWS_AS(solve(p, config(0.1, DelaySchedule::none(), vec({0.0, 0.0}))),
                    InvalidArgument);
    auto c = config(0.1, DelaySchedule::none(), vec({0.0}));
    c.enforce_theory = true;
    CHECK_THROWS_AS(solve(p, c), InvalidConfiguration);
    c.c0 = 1.0;
    c.alpha = 0.9;
    CHECK_THROWS_AS(solve(p, c), InvalidConfiguration);
    c.alpha = theorem1_constants(1.0, 0.0, 0, 1.0).C8;
    CHECK_NOTHROW(solve(p, c));
  }
  SUBCASE("large stepsize is allowed with a warning") {
    const Problem p = scalar_quadratic(1.0, NonsmoothTerm::zero());
    // threshold is 2 / L = 2; alpha = 2 makes x_k oscillate between +1 and -1
    auto c = config(2.0, DelaySchedule::none(), vec({1.0}));
    c.max_iters = 50;
    const Trace t = solve(p, c);
    CHECK(t.warnings.size() == 1);
    CHECK(t.termination == Termination::max_iters);
  }
  SUBCASE("divergence is reported, not thrown") {
    const Problem p = make_quadratic_l1(3, 3, 5, 0.1);
    const double L = smoothness_totals(p).lipschitz;
    auto c = config(10.0 / L, DelaySchedule::none(), Vector::Ones(3));
    c.max_iters = 100000;
    const Trace t = solve(p, c);
    CHECK(t.termination == Termination::diverged);
    REQUIRE(t.diverged_at.has_value());
    CHECK(t.final_residual == kInfinity);
  }
}

TEST_CASE("zero delay reproduces forward-backward bitwise") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Problem p = make_quadratic_l1(6, 8, seed, 0.05);
    const double alpha = 0.9 * stepsize_threshold(smoothness_totals(p).lipschitz,
                                                  smoothness_totals(p).concave_modulus, 0);
    auto c = config(alpha, DelaySchedule::none(), Vector::LinSpaced(8, -2.0, 2.0));
    c.max_iters = 300;
    c.prox_residual_tol = 1e-300;
    c.keep_iterates = true;
    const Trace t = solve(p, c);
    const auto ref = oracle::reference_fbs(p, c.x0, alpha, t.iterates.size() - 1);
    REQUIRE(ref.size() == t.iterates.size());
    bool same = true;
    for (std::size_t k = 0; k < ref.size(); ++k) same = same && (ref[k].array() == t.iterates[k].array()).all();
    CHECK(same);
    const Trace fbs = solve_forward_backward(p, c);
    REQUIRE(fbs.records.size() == t.records.size());
    for (std::size_t k = 0; k < fbs.records.size(); ++k) {
      CHECK(fbs.records[k].objective == t.records[k].objective);
      CHECK(fbs.records[k].step_norm == t.records[k].step_norm);
    }
  }
}

TEST_CASE("trace records follow the iterate log") {
  const Problem p = make_quadratic_box(5, 3, 12, 0.5, 3.0);
  const auto tot = smoothness_totals(p);
  for (std::size_t tau : {0u, 2u, 5u}) {
    for (auto s : {DelaySchedule::cyclic((5 + tau) / (tau + 1), tau),
                   DelaySchedule::uniform_random(3, tau), DelaySchedule::adversarial_max(tau)}) {
      auto c = config(0.9 * stepsize_threshold(tot.lipschitz, tot.concave_modulus, tau), s,
                      Vector::Zero(3));
      c.max_iters = 400;
      c.keep_iterates = true;
      const Trace t = solve(p, c);
      for (std::size_t i = 0; i < t.records.size(); ++i) {
        const auto& r = t.records[i];
        CHECK(r.k == i);
        CHECK(r.max_staleness <= tau);
        CHECK(r.delta == doctest::Approx(oracle::naive_delta(t.iterates, r.k, tau)).epsilon(1e-12));
        CHECK(r.objective == eval_F(p, t.iterates[r.k]));
        if (r.k + 1 < t.iterates.size()) {
          CHECK(r.step_norm == doctest::Approx((t.iterates[r.k + 1] - t.iterates[r.k]).norm()));
        }
      }
    }
  }
}

TEST_CASE("trace_every thins records but keeps the first tau + 1") {
  const Problem p = make_quadratic_l1(4, 3, 2, 0.1);
  const auto tot = smoothness_totals(p);
  auto c = config(0.5 * stepsize_threshold(tot.lipschitz, tot.concave_modulus, 3),
                  DelaySchedule::cyclic(1, 3), Vector::Ones(3));
  c.trace_every = 7;
  const Trace t = solve(p, c);
  for (std::size_t i = 1; i < t.records.size(); ++i) CHECK(t.records[i].k > t.records[i - 1].k);
  for (std::size_t i = 0; i + 1 < t.records.size(); ++i) {
    CHECK((t.records[i].k % 7 == 0 || t.records[i].k <= 3));
  }
}
