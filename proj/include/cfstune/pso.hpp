// Canonical particle swarm optimization with inertia, cognitive and social
// terms, synchronous global-best updates and clamp-to-box boundaries.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cfstune/errors.hpp"
#include "cfstune/opt_trace.hpp"
#include "cfstune/rng.hpp"

namespace cfstune {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
struct PsoConfig {
  double w = 0.4365;
  double phi_p = 3.020;
  double phi_g = 3.020;
  int n_particles = 20;
  int max_iters = 30;
  std::array<Interval, N> bounds{};
  std::uint64_t seed = 0;

  void validate() const {
    if (n_particles < 1) throw ConfigError("pso.n_particles must be >= 1");
    if (max_iters < 1) throw ConfigError("pso.max_iters must be >= 1");
    for (std::size_t d = 0; d < N; ++d) {
      if (!(bounds[d].lo <= bounds[d].hi)) {
        throw ConfigError("pso bounds: lo > hi in dimension " +
                          std::to_string(d));
      }
    }
  }
};

template <std::size_t N>
struct Particle {
  Vec<N> x{};
  Vec<N> v{};
  Vec<N> p{};  // personal best position
  double p_f = std::numeric_limits<double>::infinity();
};

template <std::size_t N>
struct SwarmState {
  std::vector<Particle<N>> particles;
  Vec<N> g{};
  double g_f = std::numeric_limits<double>::infinity();
};

/// v' = w v + phi_p r_p (p - x) + phi_g r_g (g - x), componentwise.
template <std::size_t N>
Vec<N> update_velocity(const Particle<N>& particle, const Vec<N>& g,
                       const PsoConfig<N>& config, double r_p, double r_g) {
  Vec<N> v{};
  for (std::size_t d = 0; d < N; ++d) {
    v[d] = config.w * particle.v[d] +
           config.phi_p * r_p * (particle.p[d] - particle.x[d]) +
           config.phi_g * r_g * (g[d] - particle.x[d]);
  }
  return v;
}

/// x' = x + v clamped into the box; a clamped component's velocity is zeroed.
/// Updates the particle in place and returns the new position.
template <std::size_t N>
Vec<N> update_position(Particle<N>& particle,
                       const std::array<Interval, N>& bounds) {
  for (std::size_t d = 0; d < N; ++d) {
    double x = particle.x[d] + particle.v[d];
    if (x < bounds[d].lo) {
      x = bounds[d].lo;
      particle.v[d] = 0.0;
    } else if (x > bounds[d].hi) {
      x = bounds[d].hi;
      particle.v[d] = 0.0;
    }
    particle.x[d] = x;
  }
  return particle.x;
}

/// Source of the uniform draws a swarm consumes, per particle in order:
/// N initial coordinates, then (r_p, r_g) once per iteration.
template <class R>
concept PsoRandomSource = requires(R r, int particle) {
  { r.uniform(particle) } -> std::convertible_to<double>;
};

/// One SplitMix64 substream per particle, derived from the master seed.
class SeededPsoRandom {
 public:
  SeededPsoRandom(std::uint64_t seed, int n_particles) {
    streams_.reserve(static_cast<std::size_t>(n_particles));
    for (int i = 0; i < n_particles; ++i) {
      streams_.emplace_back(derive_seed(seed, static_cast<std::uint64_t>(i)));
    }
  }
  double uniform(int particle) {
    return streams_[static_cast<std::size_t>(particle)].uniform();
  }

 private:
  std::vector<SplitMix64> streams_;
};

namespace detail {

template <std::size_t N, class Objective>
double evaluate_checked(Objective& objective, const Vec<N>& x, bool& error) {
  const double f = static_cast<double>(objective(x));
  error = !std::isfinite(f);
  return error ? std::numeric_limits<double>::infinity() : f;
}

template <std::size_t N>
std::vector<double> to_vector(const Vec<N>& x) {
  return std::vector<double>(x.begin(), x.end());
}

}  // namespace detail

/// Minimizes `objective` over the bounds box.
///
/// Iteration 1 is the random initialization (velocities zero); iterations
/// 2..max_iters+1 apply the velocity and position updates. Within an
/// iteration every particle moves against the previous iteration's global
/// best, then evaluations are merged in particle order. `iters_to_converge`
/// is the iteration at which the global best first reached its final value.
template <std::size_t N, class Objective, PsoRandomSource Random>
OptTrace run_pso(Objective&& objective, const PsoConfig<N>& config,
                 Random& random) {
  config.validate();
  OptTrace trace;
  SwarmState<N> swarm;
  swarm.particles.resize(static_cast<std::size_t>(config.n_particles));

  auto merge = [&](int iteration, const std::vector<double>& f,
                   const std::vector<char>& err) {
    for (int i = 0; i < config.n_particles; ++i) {
      auto& part = swarm.particles[static_cast<std::size_t>(i)];
      const double fi = f[static_cast<std::size_t>(i)];
      trace.record(Evaluation{detail::to_vector<N>(part.x), fi, iteration, i,
                              std::nullopt,
                              err[static_cast<std::size_t>(i)] != 0});
      if (fi < part.p_f) {
        part.p = part.x;
        part.p_f = fi;
      }
      if (fi < swarm.g_f) {
        swarm.g = part.x;
        swarm.g_f = fi;
        trace.iters_to_converge = iteration;
      }
    }
  };

  auto evaluate_all = [&](int iteration) {
    std::vector<double> f(static_cast<std::size_t>(config.n_particles));
    std::vector<char> err(f.size(), 0);
    for (int i = 0; i < config.n_particles; ++i) {
      bool e = false;
      f[static_cast<std::size_t>(i)] = detail::evaluate_checked<N>(
          objective, swarm.particles[static_cast<std::size_t>(i)].x, e);
      err[static_cast<std::size_t>(i)] = e ? 1 : 0;
    }
    merge(iteration, f, err);
  };

  for (int i = 0; i < config.n_particles; ++i) {
    auto& part = swarm.particles[static_cast<std::size_t>(i)];
    for (std::size_t d = 0; d < N; ++d) {
      const double u = static_cast<double>(random.uniform(i));
      part.x[d] = config.bounds[d].lo + (config.bounds[d].hi - config.bounds[d].lo) * u;
      part.v[d] = 0.0;
    }
    part.p = part.x;
  }
  swarm.g = swarm.particles.front().x;
  trace.iters_to_converge = 1;
  evaluate_all(1);

  for (int iteration = 2; iteration <= config.max_iters + 1; ++iteration) {
    for (int i = 0; i < config.n_particles; ++i) {
      auto& part = swarm.particles[static_cast<std::size_t>(i)];
      const double r_p = static_cast<double>(random.uniform(i));
      const double r_g = static_cast<double>(random.uniform(i));
      part.v = update_velocity<N>(part, swarm.g, config, r_p, r_g);
      update_position<N>(part, config.bounds);
    }
    evaluate_all(iteration);
  }
  return trace;
}

template <std::size_t N, class Objective>
OptTrace run_pso(Objective&& objective, const PsoConfig<N>& config) {
  SeededPsoRandom random(config.seed, config.n_particles);
  return run_pso<N>(std::forward<Objective>(objective), config, random);
}

}  // namespace cfstune
