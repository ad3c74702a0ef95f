// Scheduler-tuning pipelines: PSO and Golden Section over the simulator,
// RSM meta-optimization of the PSO hyperparameters, the PSO-vs-Golden
// comparison and the turnaround linearity check.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cfstune/discovery.hpp"
#include "cfstune/errors.hpp"
#include "cfstune/golden.hpp"
#include "cfstune/hackbench.hpp"
#include "cfstune/opt_trace.hpp"
#include "cfstune/pso.hpp"
#include "cfstune/rng.hpp"
#include "cfstune/rsm.hpp"
#include "cfstune/sched_params.hpp"
#include "cfstune/simulator.hpp"

namespace cfstune {

/// Tunable ranges, optimized in raw nanoseconds.
inline std::array<Interval, 3> scheduler_bounds() {
  return {Interval{static_cast<double>(kMinLatencyNs), static_cast<double>(kMaxLatencyNs)},
          Interval{static_cast<double>(kMinMinGranNs), static_cast<double>(kMaxMinGranNs)},
          Interval{static_cast<double>(kMinWakeupGranNs), static_cast<double>(kMaxWakeupGranNs)}};
}

inline SchedParams params_from_position(const Vec<3>& x) {
  return SchedParams{std::llround(x[0]), std::llround(x[1]), std::llround(x[2])};
}

inline PsoConfig<3> default_scheduler_pso_config() {
  PsoConfig<3> c;
  c.bounds = scheduler_bounds();
  return c;
}

/// Turnaround (jiffies) of the workload under the parameters at a PSO
/// position; the timeout penalty when the simulation does not finish.
class SchedulerObjective {
 public:
  SchedulerObjective(WorkloadSpec workload, SimConfig sim)
      : workload_(workload), sim_(sim) {
    workload_.validate();
    sim_.validate();
  }

  double operator()(const SchedParams& p) const {
    return response_jiffies(run_simulation(p, workload_, sim_), sim_);
  }
  double operator()(const Vec<3>& x) const { return (*this)(params_from_position(x)); }

  const WorkloadSpec& workload() const { return workload_; }
  const SimConfig& sim() const { return sim_; }

 private:
  WorkloadSpec workload_;
  SimConfig sim_;
};

inline OptTrace tune_scheduler_pso(const WorkloadSpec& workload,
                                   const SimConfig& sim,
                                   const PsoConfig<3>& config) {
  SchedulerObjective objective(workload, sim);
  return run_pso<3>(objective, config);
}

struct GoldenTuneResult {
  OptTrace trace;
  std::vector<std::int64_t> periods;  // rounded P per evaluation
  std::vector<SchedParams> params;    // discovered per evaluation
};

/// Golden Section over the scheduling period; each candidate period is
/// rounded to whole nanoseconds and mapped to parameters by the selected
/// discovery algorithm before simulation.
inline GoldenTuneResult tune_scheduler_golden(const WorkloadSpec& workload,
                                              const SimConfig& sim,
                                              const GoldenConfig& config) {
  config.validate();
  const double min_period = config.discovery == DiscoveryAlgorithm::Alg1
                                ? static_cast<double>(kAlg1MinPeriod)
                                : static_cast<double>(kAlg2MinPeriod);
  if (config.a0 < min_period) {
    throw DomainError("golden bracket a0 below the discovery algorithm's minimum period");
  }
  SchedulerObjective objective(workload, sim);
  GoldenTuneResult out;
  out.trace = golden_section_search(
      [&](double period) {
        const std::int64_t p = std::llround(period);
        const SchedParams params = discover_params(config.discovery, p);
        out.periods.push_back(p);
        out.params.push_back(params);
        return objective(params);
      },
      config);
  return out;
}

// ---------------------------------------------------------------------------
// Meta-optimization of PSO hyperparameters.

struct MetaResponse {
  double r_star = 0.0;
  int i_star = 0;
  double rsum = 0.0;
};

inline MetaResponse make_meta_response(double r_star, int i_star) {
  return MetaResponse{r_star, i_star, r_star + static_cast<double>(i_star)};
}

/// Runs PSO with the given hyperparameters and reports (R*, I*, R* + I*).
template <class Objective>
MetaResponse meta_objective(double w, double phi_p, double phi_g,
                            const PsoConfig<3>& pso_base, Objective&& objective) {
  PsoConfig<3> c = pso_base;
  c.w = w;
  c.phi_p = phi_p;
  c.phi_g = phi_g;
  const OptTrace t = run_pso<3>(objective, c);
  return make_meta_response(t.best_response, t.iters_to_converge);
}

/// Hyperparameter factors at their published levels.
inline std::vector<rsm::FactorSpec> pso_factors() {
  return {{"w", 0.0, 0.45, 0.9}, {"phi_p", 0.0, 2.0, 4.0}, {"phi_g", 0.0, 2.0, 4.0}};
}

/// One published meta-optimization run.
struct ReferenceRun {
  int run;
  double w, phi_p, phi_g;
  double r_star;
  int i_star;
  double rsum;
};

/// The fourteen published Box-Behnken runs, in published order.
inline const std::vector<ReferenceRun>& reference_meta_runs() {
  static const std::vector<ReferenceRun> runs = {
      {1, 0.0, 0, 2, 4294667318, 5, 4294667323},
      {2, 0.9, 0, 2, 4294667318, 4, 4294667322},
      {3, 0.0, 4, 2, 4294667318, 29, 4294667347},
      {4, 0.9, 4, 2, 4294667318, 30, 4294667348},
      {5, 0.0, 2, 0, 4294668048, 31, 4294668079},
      {6, 0.9, 2, 0, 4294669150, 31, 4294669181},
      {7, 0.0, 2, 4, 4294667315, 7, 4294667322},
      {8, 0.9, 2, 4, 4294667315, 6, 4294667321},
      {9, 0.45, 0, 0, 4294669038, 31, 4294669069},
      {10, 0.45, 4, 0, 4294668498, 31, 4294668529},
      {11, 0.45, 0, 4, 4294667315, 5, 4294667320},
      {12, 0.45, 4, 4, 4294667315, 5, 4294667320},
      {13, 0.45, 2, 2, 4294667315, 18, 4294667333},
      {14, 0.45, 2, 2, 4294667315, 16, 4294667331},
  };
  return runs;
}

struct PsoHyperparameters {
  double w = 0.0;
  double phi_p = 0.0;
  double phi_g = 0.0;
  rsm::Recommendation detail;
};

/// Recommended (w, phi_p, phi_g). When the cognitive factor is screened out
/// as insignificant it is set equal to the recommended social parameter.
inline PsoHyperparameters recommend_pso_hyperparameters(
    const rsm::QuadraticModel& model, const std::vector<rsm::FactorSpec>& factors,
    const rsm::RecommendOptions& options = {}) {
  PsoHyperparameters h;
  h.detail = rsm::recommend_optimum(model, factors, options);
  h.w = h.detail.natural[0];
  h.phi_g = h.detail.natural[2];
  h.phi_p = h.detail.active[1] ? h.detail.natural[1] : h.phi_g;
  return h;
}

struct MetaExperiment {
  rsm::DesignMatrix design;
  std::vector<std::uint64_t> seeds;  // per design row
  std::vector<MetaResponse> responses;
  rsm::QuadraticModel model;
  std::vector<rsm::CoefficientTest> significance;
  PsoHyperparameters recommendation;
};

/// Fits, tests and recommends from an already-evaluated design.
inline MetaExperiment analyze_meta_design(rsm::DesignMatrix design,
                                          std::vector<MetaResponse> responses,
                                          const rsm::RecommendOptions& options = {}) {
  MetaExperiment e;
  e.design = std::move(design);
  e.responses = std::move(responses);
  std::vector<double> y;
  for (const auto& r : e.responses) y.push_back(r.rsum);
  std::vector<std::string> names;
  for (const auto& f : e.design.factors) names.push_back(f.name);
  e.model = rsm::fit_quadratic(e.design.coded_rows(), y, names);
  if (e.model.dof >= 1) e.significance = rsm::coefficient_significance(e.model);
  e.recommendation = recommend_pso_hyperparameters(e.model, e.design.factors, options);
  return e;
}

/// The full pipeline: Box-Behnken design over (w, phi_p, phi_g), one PSO run
/// per row seeded from `master_seed` and the row index, then analysis.
template <class Objective>
MetaExperiment run_meta_experiment(const PsoConfig<3>& pso_base, Objective&& objective,
                                   std::uint64_t master_seed,
                                   const rsm::RecommendOptions& options = {}) {
  const auto factors = pso_factors();
  rsm::DesignMatrix design = rsm::box_behnken_design(factors);
  std::vector<MetaResponse> responses;
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < design.runs.size(); ++i) {
    PsoConfig<3> c = pso_base;
    c.seed = derive_seed(master_seed, i);
    seeds.push_back(c.seed);
    const auto& nat = design.runs[i].natural;
    responses.push_back(meta_objective(nat[0], nat[1], nat[2], c, objective));
  }
  MetaExperiment e = analyze_meta_design(std::move(design), std::move(responses), options);
  e.seeds = std::move(seeds);
  return e;
}

// ---------------------------------------------------------------------------
// PSO vs Golden Section comparison.

struct MethodSpec {
  std::string name;  // "pso", "golden-alg1", "golden-alg2"
  WorkloadSpec workload;
  SimConfig sim;
  std::optional<PsoConfig<3>> pso;
  std::optional<GoldenConfig> golden;
};

struct CompareRow {
  std::string method;
  std::uint64_t seed = 0;
  double best_response = 0.0;
  std::size_t evals_to_best = 0;
  std::size_t total_evals = 0;
  // Evaluations this method needed to first match each other method's
  // final best on the same seed; nullopt if it never did.
  std::map<std::string, std::optional<std::size_t>> evals_to_reach;
};

struct CompareResult {
  std::vector<std::string> methods;
  std::vector<std::uint64_t> seeds;
  std::vector<CompareRow> rows;  // seed-major, methods in given order
};

inline CompareResult compare_experiment(const std::vector<MethodSpec>& methods,
                                        const std::vector<std::uint64_t>& seeds) {
  const bool has_pso = std::any_of(methods.begin(), methods.end(),
                                   [](const MethodSpec& m) { return m.pso.has_value(); });
  const bool has_golden = std::any_of(methods.begin(), methods.end(),
                                      [](const MethodSpec& m) { return m.golden.has_value(); });
  if (!has_pso || !has_golden) {
    throw ConfigError("compare needs a PSO and at least one Golden Section configuration");
  }
  if (seeds.empty()) throw ConfigError("compare needs at least one seed");
  for (const auto& m : methods) {
    if (!(m.workload == methods.front().workload) || !(m.sim == methods.front().sim)) {
      throw ConfigError("compare: method " + m.name +
                        " uses a different workload or simulator configuration");
    }
  }

  CompareResult out;
  for (const auto& m : methods) out.methods.push_back(m.name);
  out.seeds = seeds;
  for (std::uint64_t seed : seeds) {
    std::vector<OptTrace> traces;
    for (const auto& m : methods) {
      SimConfig sim = m.sim;
      sim.rng_seed = seed;
      if (m.pso) {
        PsoConfig<3> c = *m.pso;
        c.seed = seed;
        traces.push_back(tune_scheduler_pso(m.workload, sim, c));
      } else {
        traces.push_back(tune_scheduler_golden(m.workload, sim, *m.golden).trace);
      }
    }
    for (std::size_t i = 0; i < methods.size(); ++i) {
      CompareRow row;
      row.method = methods[i].name;
      row.seed = seed;
      row.best_response = traces[i].best_response;
      row.evals_to_best = traces[i].evals_to_best;
      row.total_evals = traces[i].evaluations.size();
      for (std::size_t j = 0; j < methods.size(); ++j) {
        if (j == i) continue;
        row.evals_to_reach[methods[j].name] =
            traces[i].evals_to_reach(traces[j].best_response);
      }
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Linearity of turnaround in the message count.

struct LinearityPoint {
  std::int64_t msgs = 0;
  SimResult result;
};

struct LinearityFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<LinearityPoint> points;
};

inline LinearityFit validate_linearity(const std::vector<std::int64_t>& msgs_list,
                                       const WorkloadSpec& base, const SimConfig& sim,
                                       const SchedParams& params = {}) {
  const std::set<std::int64_t> distinct(msgs_list.begin(), msgs_list.end());
  if (distinct.size() < 3) {
    throw ConfigError("validate_linearity needs at least 3 distinct msgs values");
  }
  LinearityFit fit;
  double sx = 0, sy = 0;
  for (std::int64_t m : msgs_list) {
    WorkloadSpec w = base;
    w.msgs = m;
    fit.points.push_back({m, run_simulation(params, w, sim)});
    sx += static_cast<double>(m);
    sy += static_cast<double>(fit.points.back().result.turnaround_jiffies);
  }
  const double n = static_cast<double>(fit.points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : fit.points) {
    const double dx = static_cast<double>(p.msgs) - mx;
    const double dy = static_cast<double>(p.result.turnaround_jiffies) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

}  // namespace cfstune
