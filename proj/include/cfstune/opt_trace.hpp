// Per-evaluation optimization history shared by all optimizers.
#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

namespace cfstune {

struct Evaluation {
  std::vector<double> point;
  double response = std::numeric_limits<double>::infinity();
  int iteration = 0;  // optimizer-specific; 1 = initialization for PSO
  int member = 0;     // particle index for PSO, 0 otherwise
  std::optional<std::array<double, 2>> bracket;  // golden section only
  bool error = false;  // objective returned a non-finite value
};

struct OptTrace {
  std::vector<Evaluation> evaluations;
  double best_response = std::numeric_limits<double>::infinity();
  std::vector<double> best_point;
  std::size_t evals_to_best = 0;  // 1-based
  int iters_to_converge = 0;      // I*
  std::size_t evaluation_errors = 0;

  /// Appends an evaluation and tracks the first index attaining the minimum.
  void record(Evaluation e) {
    if (e.error) ++evaluation_errors;
    evaluations.push_back(std::move(e));
    const Evaluation& back = evaluations.back();
    if (evaluations.size() == 1 || back.response < best_response) {
      best_response = back.response;
      best_point = back.point;
      evals_to_best = evaluations.size();
    }
  }

  /// 1-based index of the first evaluation with response <= threshold.
  std::optional<std::size_t> evals_to_reach(double threshold) const {
    for (std::size_t i = 0; i < evaluations.size(); ++i) {
      if (evaluations[i].response <= threshold) return i + 1;
    }
    return std::nullopt;
  }
};

}  // namespace cfstune
