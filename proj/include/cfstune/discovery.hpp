// Map a target scheduling period back to (latency, min_gran, wakeup_gran).
#pragma once

#include <cstdint>
#include <string>

#include "cfstune/errors.hpp"
#include "cfstune/golden.hpp"
#include "cfstune/sched_params.hpp"

namespace cfstune {

/// Task count the discovery algorithms are built around (5 groups x 40).
inline constexpr std::int64_t kDiscoveryTasks = 200;

inline constexpr std::int64_t kAlg1Latency = 19'900'000;
inline constexpr std::int64_t kAlg1PeriodCap = 200'000'000'000;
inline constexpr std::int64_t kAlg1MinPeriod = 20'000'000;
inline constexpr std::int64_t kAlg2PeriodCap = 1'000'000'000;
inline constexpr std::int64_t kAlg2MinPeriod = 100'000;
inline constexpr std::int64_t kAlg2SmallLatency = 20'000'000;
inline constexpr std::int64_t kAlg2FloorMinGran = 100'000;

/// Many-tasks regime: latency pinned just below 200 * 100 us, so the
/// 200-task period is min_gran * 200. Anything past the period cap spills
/// into wakeup_gran. Results bypass `validated()`.
inline SchedParams discover_params_alg1(std::int64_t sched_period) {
  if (sched_period < kAlg1MinPeriod) {
    throw DomainError("alg1 requires sched_period >= 20000000, got " +
                      std::to_string(sched_period));
  }
  SchedParams p;
  p.wakeup_gran_ns = 0;
  if (sched_period > kAlg1PeriodCap) {
    p.wakeup_gran_ns = sched_period - kAlg1PeriodCap;
    sched_period = kAlg1PeriodCap;
  }
  p.latency_ns = kAlg1Latency;
  p.min_gran_ns = sched_period / kDiscoveryTasks;
  return p;
}

/// Few-tasks regime: latency equals the period (capped at 1 s).
inline SchedParams discover_params_alg2(std::int64_t sched_period) {
  if (sched_period < kAlg2MinPeriod) {
    throw DomainError("alg2 requires sched_period >= 100000, got " +
                      std::to_string(sched_period));
  }
  SchedParams p;
  p.wakeup_gran_ns = 0;
  if (sched_period > kAlg2PeriodCap) {
    p.wakeup_gran_ns = sched_period - kAlg2PeriodCap;
    sched_period = kAlg2PeriodCap;
  }
  p.latency_ns = sched_period;
  p.min_gran_ns = p.latency_ns < kAlg2SmallLatency
                      ? sched_period / kDiscoveryTasks
                      : kAlg2FloorMinGran;
  return p;
}

inline SchedParams discover_params(DiscoveryAlgorithm algo,
                                   std::int64_t sched_period) {
  return algo == DiscoveryAlgorithm::Alg1 ? discover_params_alg1(sched_period)
                                          : discover_params_alg2(sched_period);
}

/// Default brackets spanning each algorithm's reachable parameter range.
inline GoldenConfig default_golden_config(DiscoveryAlgorithm algo) {
  GoldenConfig c;
  c.discovery = algo;
  if (algo == DiscoveryAlgorithm::Alg1) {
    c.a0 = 2e7;
    c.b0 = 2.01e11;
  } else {
    c.a0 = 1e5;
    c.b0 = 2e9;
  }
  return c;
}

}  // namespace cfstune
