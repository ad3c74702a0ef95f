// CFS tunables and the period/slice arithmetic derived from them.
#pragma once

#include <cstdint>
#include <string>

#include "cfstune/errors.hpp"

namespace cfstune {

inline constexpr std::int64_t kMinLatencyNs = 100'000;
inline constexpr std::int64_t kMaxLatencyNs = 1'000'000'000;
inline constexpr std::int64_t kMinMinGranNs = 100'000;
inline constexpr std::int64_t kMaxMinGranNs = 1'000'000'000;
inline constexpr std::int64_t kMinWakeupGranNs = 0;
inline constexpr std::int64_t kMaxWakeupGranNs = 1'000'000'000;

/// The three tunable scheduler parameters, in nanoseconds.
///
/// A plain aggregate: values produced by the parameter-discovery algorithms
/// are allowed outside the documented ranges, so range checking lives in
/// `validated()` rather than in a constructor.
struct SchedParams {
  std::int64_t latency_ns = 20'000'000;
  std::int64_t min_gran_ns = 4'000'000;
  std::int64_t wakeup_gran_ns = 10'000'000;

  friend bool operator==(const SchedParams&, const SchedParams&) = default;
};

/// Returns `p` unchanged if every field is inside its tunable range,
/// otherwise throws DomainError naming the offending field.
inline SchedParams validated(const SchedParams& p) {
  auto check = [](std::int64_t v, std::int64_t lo, std::int64_t hi,
                  const char* name) {
    if (v < lo || v > hi) {
      throw DomainError(std::string(name) + " = " + std::to_string(v) +
                        " outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    }
  };
  check(p.latency_ns, kMinLatencyNs, kMaxLatencyNs, "latency_ns");
  check(p.min_gran_ns, kMinMinGranNs, kMaxMinGranNs, "min_gran_ns");
  check(p.wakeup_gran_ns, kMinWakeupGranNs, kMaxWakeupGranNs,
        "wakeup_gran_ns");
  return p;
}

/// Number of tasks that fit in one latency window at minimum granularity,
/// floor(latency / min_gran) clamped up to 1.
inline std::int64_t compute_nr_latency(const SchedParams& p) {
  if (p.min_gran_ns <= 0) {
    throw DivisionError("min_gran_ns must be positive to compute nr_latency");
  }
  const std::int64_t q = p.latency_ns / p.min_gran_ns;
  return q < 1 ? 1 : q;
}

/// Scheduling period for `num_tasks` runnable tasks. Beyond nr_latency the
/// period stretches to min_gran * num_tasks, which equals
/// latency * num_tasks / nr_latency without the double truncation.
inline std::int64_t compute_sched_period(const SchedParams& p,
                                         std::int64_t num_tasks) {
  if (num_tasks < 1) throw DomainError("num_tasks must be >= 1");
  if (num_tasks <= compute_nr_latency(p)) return p.latency_ns;
  return p.min_gran_ns * num_tasks;
}

/// Equal-weight share of the period plus the wakeup-granularity extension.
inline std::int64_t compute_time_slice(const SchedParams& p,
                                       std::int64_t num_tasks) {
  return compute_sched_period(p, num_tasks) / num_tasks + p.wakeup_gran_ns;
}

}  // namespace cfstune
