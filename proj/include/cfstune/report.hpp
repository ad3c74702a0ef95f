// CSV tables for every pipeline, written after a `#` metadata header.
#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "cfstune/config.hpp"

#ifndef CFSTUNE_VERSION
#define CFSTUNE_VERSION "unknown"
#endif

namespace cfstune {

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// Header block: tool version, command, master seed and the resolved
/// configuration, one `#` line each. Nothing time-dependent is written.
inline void write_csv_header(std::ostream& os, const ExperimentConfig& c) {
  os << "# cfstune " << CFSTUNE_VERSION << "\n";
  os << "# command: " << to_string(c.command) << "\n";
  os << "# master_seed: " << c.master_seed << " (" << c.seed_source << ")\n";
  for (const auto& line : resolved_config_lines(c)) os << "# config: " << line << "\n";
}

inline void write_csv(std::ostream& os, const ExperimentConfig& c, const CsvTable& t) {
  write_csv_header(os, c);
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << cells[i];
    }
    os << '\n';
  };
  emit(t.columns);
  for (const auto& r : t.rows) emit(r);
}

inline std::string format_int(std::int64_t v) { return std::to_string(v); }

// ---------------------------------------------------------------------------

inline CsvTable simulate_table(const SchedParams& p, const SimResult& r) {
  return {{"latency_ns", "min_gran_ns", "wakeup_ns", "turnaround_jiffies", "turnaround_ns",
           "messages_delivered", "context_switches", "completed"},
          {{format_int(p.latency_ns), format_int(p.min_gran_ns), format_int(p.wakeup_gran_ns),
            format_int(r.turnaround_jiffies), format_int(r.turnaround_ns),
            format_int(r.messages_delivered), format_int(r.context_switches),
            r.completed ? "true" : "false"}}};
}

inline CsvTable pso_trace_table(const OptTrace& t) {
  CsvTable out{{"iter", "particle", "x1_ns", "x2_ns", "x3_ns", "response_jiffies", "global_best"},
               {}};
  double best = INFINITY;
  for (const auto& e : t.evaluations) {
    best = std::min(best, e.response);
    const SchedParams p = params_from_position({e.point[0], e.point[1], e.point[2]});
    out.rows.push_back({std::to_string(e.iteration), std::to_string(e.member),
                        format_int(p.latency_ns), format_int(p.min_gran_ns),
                        format_int(p.wakeup_gran_ns), format_real(e.response), format_real(best)});
  }
  return out;
}

inline CsvTable golden_trace_table(const GoldenTuneResult& g) {
  CsvTable out{{"eval", "P_ns", "latency_ns", "min_gran_ns", "wakeup_ns", "response_jiffies",
                "a_ns", "b_ns"},
               {}};
  for (std::size_t i = 0; i < g.trace.evaluations.size(); ++i) {
    const auto& e = g.trace.evaluations[i];
    const SchedParams& p = g.params[i];
    out.rows.push_back({std::to_string(i + 1), format_int(g.periods[i]), format_int(p.latency_ns),
                        format_int(p.min_gran_ns), format_int(p.wakeup_gran_ns),
                        format_real(e.response), format_real((*e.bracket)[0]),
                        format_real((*e.bracket)[1])});
  }
  return out;
}

/// `run_ids` labels the rows (published run numbers, or 1..n).
inline CsvTable rsm_table(const MetaExperiment& e, const std::vector<int>& run_ids) {
  CsvTable out{{"run", "w", "phi_p", "phi_g", "r_star", "i_star", "rsum"}, {}};
  for (std::size_t i = 0; i < e.design.runs.size(); ++i) {
    const auto& n = e.design.runs[i].natural;
    const auto& r = e.responses[i];
    out.rows.push_back({std::to_string(run_ids[i]), format_real(n[0]), format_real(n[1]),
                        format_real(n[2]), format_real(r.r_star), std::to_string(r.i_star),
                        format_real(r.rsum)});
  }
  return out;
}

inline CsvTable coefficient_table(const std::vector<rsm::CoefficientTest>& tests) {
  CsvTable out{{"term", "estimate", "std_error", "t_value", "p_value"}, {}};
  for (const auto& t : tests) {
    out.rows.push_back({t.term, format_real(t.estimate), format_real(t.std_error),
                        format_real(t.t_statistic), format_real(t.p_value)});
  }
  return out;
}

inline CsvTable linearity_table(const LinearityFit& fit) {
  CsvTable out{{"msgs", "turnaround_jiffies", "turnaround_ns", "messages_delivered",
                "context_switches", "completed"},
               {}};
  for (const auto& p : fit.points) {
    out.rows.push_back({format_int(p.msgs), format_int(p.result.turnaround_jiffies),
                        format_int(p.result.turnaround_ns),
                        format_int(p.result.messages_delivered),
                        format_int(p.result.context_switches),
                        p.result.completed ? "true" : "false"});
  }
  return out;
}

/// One row per (seed, method); `reach_<m>` is the evaluation count at which
/// the row's method first matched method m's final best, blank if never.
inline CsvTable compare_table(const CompareResult& r) {
  CsvTable out{{"method", "seed", "best_response", "evals_to_best", "total_evals"}, {}};
  for (const auto& m : r.methods) out.columns.push_back("reach_" + m);
  for (const auto& row : r.rows) {
    std::vector<std::string> cells{row.method, std::to_string(row.seed),
                                   format_real(row.best_response),
                                   std::to_string(row.evals_to_best),
                                   std::to_string(row.total_evals)};
    for (const auto& m : r.methods) {
      const auto it = row.evals_to_reach.find(m);
      cells.push_back(it != row.evals_to_reach.end() && it->second
                          ? std::to_string(*it->second)
                          : std::string());
    }
    out.rows.push_back(std::move(cells));
  }
  return out;
}

// Plot data: plain x/y columns.

inline CsvTable convergence_plot(const OptTrace& t) {
  CsvTable out{{"eval", "best_response_jiffies"}, {}};
  double best = INFINITY;
  for (std::size_t i = 0; i < t.evaluations.size(); ++i) {
    best = std::min(best, t.evaluations[i].response);
    out.rows.push_back({std::to_string(i + 1), format_real(best)});
  }
  return out;
}

inline CsvTable linearity_plot(const LinearityFit& fit) {
  CsvTable out{{"msgs", "turnaround_jiffies"}, {}};
  for (const auto& p : fit.points) {
    out.rows.push_back({format_int(p.msgs), format_int(p.result.turnaround_jiffies)});
  }
  return out;
}

inline CsvTable rsm_plot(const MetaExperiment& e, const std::vector<int>& run_ids) {
  CsvTable out{{"run", "rsum"}, {}};
  for (std::size_t i = 0; i < e.responses.size(); ++i) {
    out.rows.push_back({std::to_string(run_ids[i]), format_real(e.responses[i].rsum)});
  }
  return out;
}

inline CsvTable compare_plot(const CompareResult& r) {
  CsvTable out{{"seed"}, {}};
  for (const auto& m : r.methods) out.columns.push_back(m);
  for (std::size_t s = 0; s < r.seeds.size(); ++s) {
    std::vector<std::string> cells{std::to_string(r.seeds[s])};
    for (std::size_t m = 0; m < r.methods.size(); ++m) {
      cells.push_back(format_real(r.rows[s * r.methods.size() + m].best_response));
    }
    out.rows.push_back(std::move(cells));
  }
  return out;
}

}  // namespace cfstune
