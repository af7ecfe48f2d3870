#include "piag/delay.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace piag {

const char* to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::none:
      return "none";
    case ScheduleKind::cyclic:
      return "cyclic";
    case ScheduleKind::uniform_random:
      return "uniform_random";
    case ScheduleKind::adversarial_max:
      return "adversarial_max";
  }
  return "unknown";
}

DelaySchedule DelaySchedule::none() {
  return DelaySchedule(ScheduleKind::none, 0, 0, 0);
}

DelaySchedule DelaySchedule::cyclic(std::size_t block, std::size_t tau) {
  if (block == 0) throw InvalidConfiguration("cyclic schedule: block must be positive");
  return DelaySchedule(ScheduleKind::cyclic, tau, block, 0);
}

DelaySchedule DelaySchedule::uniform_random(std::uint64_t seed,
                                            std::size_t tau) {
  return DelaySchedule(ScheduleKind::uniform_random, tau, 0, seed);
}

DelaySchedule DelaySchedule::adversarial_max(std::size_t tau) {
  return DelaySchedule(ScheduleKind::adversarial_max, tau, 0, 0);
}

void DelaySchedule::validate(std::size_t num_components) const {
  if (kind_ != ScheduleKind::cyclic) return;
  const std::size_t needed = (num_components + tau_) / (tau_ + 1);
  if (block_ < needed) {
    throw InvalidConfiguration(
        "cyclic schedule: block " + std::to_string(block_) +
        " cannot keep " + std::to_string(num_components) +
        " components within delay " + std::to_string(tau_) + " (need >= " +
        std::to_string(needed) + ")");
  }
}

std::vector<std::size_t> next_refresh_set(
    const DelaySchedule& schedule, std::size_t k, std::size_t num_components,
    std::span<const std::size_t> last_refresh) {
  require(num_components >= 1, "next_refresh_set: need at least one component");
  require(last_refresh.size() == num_components,
          "next_refresh_set: last_refresh has wrong length");
  const std::size_t tau = schedule.tau();
  // Age component i would reach at iteration k without a refresh.
  auto overdue = [&](std::size_t i) { return k - last_refresh[i] > tau; };

  std::vector<std::size_t> out;
  switch (schedule.kind()) {
    case ScheduleKind::none:
      out.resize(num_components);
      for (std::size_t i = 0; i < num_components; ++i) out[i] = i;
      return out;

    case ScheduleKind::cyclic: {
      schedule.validate(num_components);
      std::vector<bool> mark(num_components, false);
      const std::size_t b = std::min(schedule.block(), num_components);
      const std::size_t start = (k % num_components) * (schedule.block() % num_components) % num_components;
      for (std::size_t j = 0; j < b; ++j) mark[(start + j) % num_components] = true;
      for (std::size_t i = 0; i < num_components; ++i) {
        if (mark[i]) out.push_back(i);
      }
      return out;
    }

    case ScheduleKind::uniform_random: {
      std::seed_seq seq{static_cast<std::uint32_t>(schedule.seed()),
                        static_cast<std::uint32_t>(schedule.seed() >> 32),
                        static_cast<std::uint32_t>(k),
                        static_cast<std::uint32_t>(std::uint64_t(k) >> 32)};
      std::mt19937_64 rng(seq);
      std::bernoulli_distribution coin(0.5);
      for (std::size_t i = 0; i < num_components; ++i) {
        const bool drawn = coin(rng);
        if (drawn || overdue(i)) out.push_back(i);
      }
      return out;
    }

    case ScheduleKind::adversarial_max:
      for (std::size_t i = 0; i < num_components; ++i) {
        if (overdue(i)) out.push_back(i);
      }
      return out;
  }
  return out;
}

StepHistory::StepHistory(std::size_t tau) : tau_(tau), buffer_(tau, 0.0) {}

void StepHistory::push(double squared_step) {
  if (tau_ == 0) return;
  buffer_[head_] = squared_step;
  head_ = (head_ + 1) % tau_;
  count_ = std::min(count_ + 1, tau_);
}

double StepHistory::delta() const {
  // Oldest to newest.
  double total = 0.0;
  const std::size_t start = (head_ + tau_ - count_) % std::max<std::size_t>(tau_, 1);
  for (std::size_t j = 0; j < count_; ++j) total += buffer_[(start + j) % tau_];
  return total;
}

GradientTable::GradientTable(const Problem& problem, const Vector& x0,
                             std::size_t tau)
    : last_refresh_(problem.size(), 0), history_(tau) {
  require(x0.size() == problem.dimension(),
          "GradientTable: x0 dimension mismatch");
  entries_.reserve(problem.size());
  for (const auto& c : problem.components()) entries_.push_back(c.gradient(x0));
  aggregate_ = recompute_aggregate();
}

Vector GradientTable::recompute_aggregate() const {
  Vector sum = Vector::Zero(entries_.front().size());
  for (const auto& e : entries_) sum += e;
  return sum;
}

const Vector& GradientTable::refresh_and_aggregate(
    const Problem& problem, std::size_t k, const Vector& x_k,
    std::span<const std::size_t> refresh_set) {
  require(k >= iteration_, "GradientTable: iterations must not go backwards");
  require(problem.size() == entries_.size(),
          "GradientTable: problem has a different number of components");
  iteration_ = k;
  const bool full = refresh_set.size() == entries_.size();
  ++since_recompute_;
  const bool recompute = full || since_recompute_ >= kRecomputePeriod;

  for (std::size_t i : refresh_set) {
    require(i < entries_.size(), "GradientTable: refresh index out of range");
    Vector fresh = problem.component(i).gradient(x_k);
    if (!recompute) {
      aggregate_ -= entries_[i];
      aggregate_ += fresh;
    }
    entries_[i] = std::move(fresh);
    last_refresh_[i] = k;
  }
  if (recompute) {
    aggregate_ = recompute_aggregate();
    since_recompute_ = 0;
  }
  return aggregate_;
}

std::vector<std::size_t> GradientTable::ages() const {
  std::vector<std::size_t> out(last_refresh_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = iteration_ - last_refresh_[i];
  return out;
}

std::size_t max_staleness(const GradientTable& table) {
  const auto ages = table.ages();
  return ages.empty() ? 0 : *std::max_element(ages.begin(), ages.end());
}

}  // namespace piag
