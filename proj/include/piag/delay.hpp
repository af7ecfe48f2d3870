#ifndef PIAG_DELAY_HPP
#define PIAG_DELAY_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "piag/model.hpp"

namespace piag {

enum class ScheduleKind { none, cyclic, uniform_random, adversarial_max };

const char* to_string(ScheduleKind kind);

/**
 * Which components receive a fresh gradient at each iteration.
 *
 * The age of component i at iteration k is k minus the iteration at which its
 * table entry was last evaluated (initialisation counts as iteration 0). Every
 * kind keeps ages within {0, ..., tau}.
 */
class DelaySchedule {
 public:
  static DelaySchedule none();
  static DelaySchedule cyclic(std::size_t block, std::size_t tau);
  static DelaySchedule uniform_random(std::uint64_t seed, std::size_t tau);
  static DelaySchedule adversarial_max(std::size_t tau);

  ScheduleKind kind() const { return kind_; }
  std::size_t tau() const { return tau_; }
  std::size_t block() const { return block_; }
  std::uint64_t seed() const { return seed_; }

  /// Throws InvalidConfiguration when a cyclic block cannot cover N
  /// components within tau + 1 iterations.
  void validate(std::size_t num_components) const;

 private:
  DelaySchedule(ScheduleKind kind, std::size_t tau, std::size_t block,
                std::uint64_t seed)
      : kind_(kind), tau_(tau), block_(block), seed_(seed) {}

  ScheduleKind kind_;
  std::size_t tau_;
  std::size_t block_;
  std::uint64_t seed_;
};

/**
 * Refresh set for iteration k. `last_refresh[i]` is the iteration at which
 * entry i was last evaluated. Deterministic in all arguments (the random kind
 * derives its draw from (seed, k)). Returned indices are ascending.
 */
std::vector<std::size_t> next_refresh_set(
    const DelaySchedule& schedule, std::size_t k, std::size_t num_components,
    std::span<const std::size_t> last_refresh);

/// Ring buffer of the last tau squared step norms |x_{j+1} - x_j|^2.
class StepHistory {
 public:
  explicit StepHistory(std::size_t tau);

  void push(double squared_step);

  /// Delta_k = sum_{j=k-tau}^{k-1} |x_{j+1}-x_j|^2, with steps before x_0 zero.
  double delta() const;

  std::size_t tau() const { return tau_; }

 private:
  std::size_t tau_;
  std::vector<double> buffer_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
};

/**
 * Cached per-component gradients and their running sum g_k.
 *
 * Single-owner mutable state. The aggregate is updated incrementally
 * (g += new_i - old_i) and recomputed from the entries in index order when
 * every component is refreshed or every `recompute_period` iterations.
 */
class GradientTable {
 public:
  static constexpr std::size_t kRecomputePeriod = 1000;

  /// All entries evaluated at x0, stamped with iteration 0.
  GradientTable(const Problem& problem, const Vector& x0, std::size_t tau);

  /// Refreshes the listed entries at x_k and returns the aggregate g_k.
  const Vector& refresh_and_aggregate(const Problem& problem, std::size_t k,
                                      const Vector& x_k,
                                      std::span<const std::size_t> refresh_set);

  const Vector& aggregate() const { return aggregate_; }
  const std::vector<Vector>& entries() const { return entries_; }
  std::span<const std::size_t> last_refresh() const { return last_refresh_; }

  /// Ages as of the most recent refresh_and_aggregate call.
  std::vector<std::size_t> ages() const;

  std::size_t current_iteration() const { return iteration_; }
  std::size_t tau() const { return history_.tau(); }

  StepHistory& history() { return history_; }
  const StepHistory& history() const { return history_; }

  /// Sum of entries in index order.
  Vector recompute_aggregate() const;

 private:
  std::vector<Vector> entries_;
  std::vector<std::size_t> last_refresh_;
  Vector aggregate_;
  std::size_t iteration_ = 0;
  std::size_t since_recompute_ = 0;
  StepHistory history_;
};

std::size_t max_staleness(const GradientTable& table);

}  // namespace piag

#endif  // PIAG_DELAY_HPP
