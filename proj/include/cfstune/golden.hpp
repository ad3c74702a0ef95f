// Golden Section search with one fresh evaluation per iteration.
#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "cfstune/errors.hpp"
#include "cfstune/opt_trace.hpp"

namespace cfstune {

/// rho = (3 - sqrt 5) / 2, the root in (0, 1/2) of rho / (1 - rho) = 1 - rho.
inline const double kGoldenRho = (3.0 - std::sqrt(5.0)) / 2.0;

enum class DiscoveryAlgorithm { Alg1 = 1, Alg2 = 2 };

struct GoldenConfig {
  double a0 = 0.0;
  double b0 = 1.0;
  double rho = kGoldenRho;
  double tol_ns = 1e6;
  int max_evals = 30;
  DiscoveryAlgorithm discovery = DiscoveryAlgorithm::Alg1;

  void validate() const {
    if (!(a0 < b0)) throw DomainError("golden bracket requires a0 < b0");
    if (!(rho > 0.0 && rho < 0.5)) throw ConfigError("golden rho must be in (0, 0.5)");
    if (!(tol_ns > 0.0)) throw ConfigError("golden tol must be > 0");
    if (max_evals < 2) throw ConfigError("golden max_evals must be >= 2");
  }
};

struct GoldenState {
  double a = 0.0, b = 0.0;
  double a1 = 0.0, b1 = 0.0;
  double f_a1 = 0.0, f_b1 = 0.0;
};

/// Minimizes a unimodal `f` on [a0, b0].
///
/// Each evaluation is recorded with the bracket [a, b] current when it was
/// requested. The two initial inner points are iteration 0; every later
/// iteration shrinks the bracket by (1 - rho) and evaluates one new point.
/// Stops once b - a < tol_ns or max_evals evaluations have been spent.
template <class F>
OptTrace golden_section_search(F&& f, const GoldenConfig& config) {
  config.validate();
  const double rho = config.rho;
  OptTrace trace;
  int iteration = 0;

  auto eval = [&](double x, const GoldenState& s) {
    double y = static_cast<double>(f(x));
    const bool error = !std::isfinite(y);
    if (error) y = std::numeric_limits<double>::infinity();
    trace.record(Evaluation{{x}, y, iteration, 0,
                            std::array<double, 2>{s.a, s.b}, error});
    return y;
  };

  GoldenState s;
  s.a = config.a0;
  s.b = config.b0;
  s.a1 = s.a + rho * (s.b - s.a);
  s.b1 = s.b - rho * (s.b - s.a);
  s.f_a1 = eval(s.a1, s);
  s.f_b1 = eval(s.b1, s);

  while (s.b - s.a >= config.tol_ns &&
         static_cast<int>(trace.evaluations.size()) < config.max_evals) {
    ++iteration;
    if (s.f_a1 < s.f_b1) {
      // Minimum in [a, b1]; old a1 becomes the new b1.
      s.b = s.b1;
      s.b1 = s.a1;
      s.f_b1 = s.f_a1;
      s.a1 = s.a + rho * (s.b - s.a);
      s.f_a1 = eval(s.a1, s);
    } else {
      s.a = s.a1;
      s.a1 = s.b1;
      s.f_a1 = s.f_b1;
      s.b1 = s.b - rho * (s.b - s.a);
      s.f_b1 = eval(s.b1, s);
    }
  }
  trace.iters_to_converge = iteration;
  return trace;
}

}  // namespace cfstune
