// cfstune: simulate the scheduler and run the tuning pipelines.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "cfstune/config.hpp"
#include "cfstune/report.hpp"
#include "cfstune/tuning.hpp"

using namespace cfstune;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Invocation {
  Command command = Command::Simulate;
  std::string config_path;
  KeyValues overrides;
};

// Writes CSV to the configured path, or to stdout when none is set.
class Sink {
 public:
  explicit Sink(const ExperimentConfig& c) : config_(c) {}

  void table(const CsvTable& t) const {
    if (config_.output.empty()) {
      write_csv(std::cout, config_, t);
      return;
    }
    write_file(config_.output, t);
  }

  void plot(const CsvTable& t) const {
    if (!config_.plot_data.empty()) write_file(config_.plot_data, t);
  }

  // Human-readable summary: stdout when CSV goes to a file, else stderr.
  std::ostream& summary() const { return config_.output.empty() ? std::cerr : std::cout; }

 private:
  void write_file(const std::string& path, const CsvTable& t) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_csv(out, config_, t);
    if (!out) throw std::runtime_error("error writing '" + path + "'");
  }

  const ExperimentConfig& config_;
};

std::string describe(const SchedParams& p) {
  std::ostringstream s;
  s << "latency=" << p.latency_ns << " min_gran=" << p.min_gran_ns
    << " wakeup_gran=" << p.wakeup_gran_ns;
  return s.str();
}

void run_simulate(const ExperimentConfig& c, const Sink& sink) {
  const SimResult r = run_simulation(c.params, c.workload, c.sim);
  sink.table(simulate_table(c.params, r));
  auto& out = sink.summary();
  out << "turnaround: " << r.turnaround_jiffies << " jiffies (" << r.turnaround_ns << " ns)\n"
      << "messages delivered: " << r.messages_delivered << " of "
      << c.workload.total_messages() << "\n"
      << "context switches: " << r.context_switches << "\n"
      << "completed: " << (r.completed ? "true" : "false") << "\n";
}

void run_pso_cmd(const ExperimentConfig& c, const Sink& sink) {
  const OptTrace t = tune_scheduler_pso(c.workload, c.sim, c.pso);
  sink.table(pso_trace_table(t));
  sink.plot(convergence_plot(t));
  const SchedParams best = params_from_position({t.best_point[0], t.best_point[1], t.best_point[2]});
  sink.summary() << "best turnaround: " << format_real(t.best_response) << " jiffies\n"
                 << "best parameters: " << describe(best) << "\n"
                 << "evaluations: " << t.evaluations.size()
                 << ", first reached at evaluation " << t.evals_to_best
                 << ", iteration " << t.iters_to_converge << "\n";
}

void run_golden_cmd(const ExperimentConfig& c, const Sink& sink) {
  const GoldenTuneResult g = tune_scheduler_golden(c.workload, c.sim, c.golden);
  sink.table(golden_trace_table(g));
  sink.plot(convergence_plot(g.trace));
  const std::size_t i = g.trace.evals_to_best - 1;
  sink.summary() << "best turnaround: " << format_real(g.trace.best_response) << " jiffies\n"
                 << "best period: " << g.periods[i] << " ns (" << describe(g.params[i]) << ")\n"
                 << "evaluations: " << g.trace.evaluations.size()
                 << ", first reached at evaluation " << g.trace.evals_to_best << "\n";
}

void print_recommendation(std::ostream& out, const MetaExperiment& e) {
  out << "coefficients (coded units, dof " << e.model.dof << "):\n";
  out << std::setprecision(4);
  out << "  " << std::left << std::setw(14) << "term" << std::right << std::setw(16)
      << "estimate" << std::setw(12) << "t" << std::setw(12) << "p" << "\n";
  for (const auto& t : e.significance) {
    out << "  " << std::left << std::setw(14) << t.term << std::right << std::setw(16)
        << std::setprecision(10) << t.estimate << std::setprecision(4) << std::setw(12)
        << t.t_statistic
        << std::setw(12) << t.p_value << "\n";
  }
  const auto& r = e.recommendation;
  out << std::setprecision(6);
  out << "recommendation (" << rsm::to_string(r.detail.branch) << "): w=" << r.w
      << " phi_p=" << r.phi_p << " phi_g=" << r.phi_g << "\n";
  out << "factors kept after screening:";
  for (std::size_t f = 0; f < r.detail.active.size(); ++f) {
    if (r.detail.active[f]) out << " " << e.design.factors[f].name;
  }
  out << "\n";
}

void run_rsm_cmd(const ExperimentConfig& c, const Sink& sink) {
  MetaExperiment e;
  std::vector<int> ids;
  if (c.rsm_reference) {
    const auto factors = pso_factors();
    rsm::DesignMatrix d;
    d.factors = factors;
    std::vector<MetaResponse> responses;
    for (const auto& r : reference_meta_runs()) {
      d.runs.push_back({{factors[0].code(r.w), factors[1].code(r.phi_p), factors[2].code(r.phi_g)},
                        {r.w, r.phi_p, r.phi_g}});
      responses.push_back(make_meta_response(r.r_star, r.i_star));
      ids.push_back(r.run);
    }
    e = analyze_meta_design(std::move(d), std::move(responses), c.rsm_options);
  } else {
    PsoConfig<3> base = default_scheduler_pso_config();
    base.n_particles = c.rsm_particles;
    base.max_iters = c.rsm_iters;
    e = run_meta_experiment(base, SchedulerObjective(c.workload, c.sim), c.master_seed,
                            c.rsm_options);
    for (std::size_t i = 0; i < e.responses.size(); ++i) ids.push_back(static_cast<int>(i) + 1);
  }
  sink.table(rsm_table(e, ids));
  sink.plot(rsm_plot(e, ids));
  print_recommendation(sink.summary(), e);
}

void run_validate_cmd(const ExperimentConfig& c, const Sink& sink) {
  const LinearityFit fit = validate_linearity(c.validate_msgs, c.workload, c.sim, c.params);
  sink.table(linearity_table(fit));
  sink.plot(linearity_plot(fit));
  auto& out = sink.summary();
  bool conserved = true;
  for (const auto& p : fit.points) {
    WorkloadSpec w = c.workload;
    w.msgs = p.msgs;
    if (p.result.completed && p.result.messages_delivered != w.total_messages()) conserved = false;
  }
  out << "slope: " << format_real(fit.slope) << " jiffies per message\n"
      << "intercept: " << format_real(fit.intercept) << " jiffies\n"
      << "r_squared: " << format_real(fit.r_squared) << "\n"
      << "conservation: " << (conserved ? "ok" : "VIOLATED") << "\n";
  if (!conserved) throw std::runtime_error("message conservation violated");
}

void run_compare_cmd(const ExperimentConfig& c, const Sink& sink) {
  std::vector<MethodSpec> methods{{"pso", c.workload, c.sim, c.pso, std::nullopt}};
  for (auto a : c.compare_algos) {
    GoldenConfig g = default_golden_config(static_cast<DiscoveryAlgorithm>(a));
    g.tol_ns = c.golden.tol_ns;
    g.max_evals = c.golden.max_evals;
    methods.push_back({"golden-alg" + std::to_string(a), c.workload, c.sim, std::nullopt, g});
  }
  std::vector<std::uint64_t> seeds(c.compare_seeds.begin(), c.compare_seeds.end());
  const CompareResult r = compare_experiment(methods, seeds);
  sink.table(compare_table(r));
  sink.plot(compare_plot(r));
  auto& out = sink.summary();
  for (const auto& row : r.rows) {
    out << row.method << " seed " << row.seed << ": best " << format_real(row.best_response)
        << " after " << row.evals_to_best << " of " << row.total_evals << " evaluations\n";
  }
}

int execute(const Invocation& inv) {
  const KeyValues file = inv.config_path.empty() ? KeyValues{} : read_config_file(inv.config_path);
  const ExperimentConfig c = resolve_config(inv.command, file, inv.overrides, seed_from_environment());
  const Sink sink(c);
  switch (c.command) {
    case Command::Simulate: run_simulate(c, sink); break;
    case Command::Pso: run_pso_cmd(c, sink); break;
    case Command::Golden: run_golden_cmd(c, sink); break;
    case Command::Rsm: run_rsm_cmd(c, sink); break;
    case Command::Validate: run_validate_cmd(c, sink); break;
    case Command::Compare: run_compare_cmd(c, sink); break;
  }
  return 0;
}

// Binds a string-valued flag to a config key.
void key_option(CLI::App* sub, Invocation& inv, const std::string& flag, const std::string& key,
                const std::string& help) {
  sub->add_option_function<std::string>(
      flag, [&inv, key](const std::string& v) { inv.overrides[key] = v; }, help + " [" + key + "]");
}

CLI::App* add_command(CLI::App& app, Invocation& inv, Command cmd, const std::string& help) {
  CLI::App* sub = app.add_subcommand(to_string(cmd), help);
  sub->callback([&inv, cmd] { inv.command = cmd; });
  sub->add_option("-c,--config", inv.config_path, "Config file of key = value lines")
      ->check(CLI::ExistingFile);
  key_option(sub, inv, "-o,--output", "output.path", "CSV output file (default: stdout)");
  key_option(sub, inv, "--seed", "seed", std::string("Master seed (fallback: ") + kSeedEnvVar + ")");
  key_option(sub, inv, "--groups", "workload.groups", "Workload groups");
  key_option(sub, inv, "--fanout", "workload.fanout", "Senders (= receivers) per group");
  if (cmd != Command::Validate) key_option(sub, inv, "--msgs", "workload.msgs", "Messages per pair");
  key_option(sub, inv, "--send-cost", "workload.send_cost_ns", "CPU ns per send");
  key_option(sub, inv, "--recv-cost", "workload.recv_cost_ns", "CPU ns per receive");
  key_option(sub, inv, "--capacity", "workload.channel_capacity", "Channel capacity");
  key_option(sub, inv, "--cpus", "sim.num_cpus", "Simulated CPUs");
  key_option(sub, inv, "--switch-cost", "sim.switch_cost_ns", "Context switch cost (ns)");
  key_option(sub, inv, "--max-jiffies", "sim.max_jiffies", "Simulation cap (jiffies)");
  key_option(sub, inv, "--ns-per-jiffy", "sim.ns_per_jiffy", "Nanoseconds per jiffy");
  if (cmd != Command::Simulate) {
    key_option(sub, inv, "--emit-plot-data", "output.plot_data", "Write x/y plot columns to file");
  }
  return sub;
}

void add_sched_options(CLI::App* sub, Invocation& inv) {
  key_option(sub, inv, "--latency", "sched.latency_ns", "Scheduler latency (ns)");
  key_option(sub, inv, "--min-gran", "sched.min_gran_ns", "Minimum granularity (ns)");
  key_option(sub, inv, "--wakeup-gran", "sched.wakeup_gran_ns", "Wakeup granularity (ns)");
}

void add_pso_options(CLI::App* sub, Invocation& inv) {
  key_option(sub, inv, "--w", "pso.w", "Inertia weight");
  key_option(sub, inv, "--phi-p", "pso.phi_p", "Cognitive coefficient");
  key_option(sub, inv, "--phi-g", "pso.phi_g", "Social coefficient");
  key_option(sub, inv, "--particles", "pso.n_particles", "Swarm size");
  key_option(sub, inv, "--iters", "pso.max_iters", "Iterations after initialization");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CFS-style scheduler simulator and parameter autotuner"};
  app.set_version_flag("--version", std::string("cfstune ") + CFSTUNE_VERSION);
  app.require_subcommand(1);
  Invocation inv;

  add_sched_options(add_command(app, inv, Command::Simulate, "Run one simulation"), inv);

  add_pso_options(add_command(app, inv, Command::Pso, "Tune parameters with PSO"), inv);

  CLI::App* golden = add_command(app, inv, Command::Golden, "Tune the period with Golden Section");
  key_option(golden, inv, "--algo", "golden.algo", "Discovery algorithm (1 or 2)");
  key_option(golden, inv, "--a0", "golden.a0", "Bracket start (ns)");
  key_option(golden, inv, "--b0", "golden.b0", "Bracket end (ns)");
  key_option(golden, inv, "--tol", "golden.tol", "Bracket width tolerance (ns)");
  key_option(golden, inv, "--max-evals", "golden.max_evals", "Evaluation budget");

  CLI::App* rsm = add_command(app, inv, Command::Rsm, "Box-Behnken meta-optimization of PSO");
  rsm->add_flag_function(
      "--reference", [&inv](std::int64_t) { inv.overrides["rsm.reference"] = "true"; },
      "Analyse the published runs instead of running PSO [rsm.reference]");
  key_option(rsm, inv, "--particles", "rsm.n_particles", "Swarm size per run");
  key_option(rsm, inv, "--iters", "rsm.max_iters", "Iterations per run");
  key_option(rsm, inv, "--screen-alpha", "rsm.screen_alpha", "Factor screening level");
  key_option(rsm, inv, "--step", "rsm.step", "Descent path step (coded units)");

  CLI::App* validate = add_command(app, inv, Command::Validate, "Turnaround linearity in msgs");
  add_sched_options(validate, inv);
  key_option(validate, inv, "--msgs-list", "validate.msgs", "Comma-separated msgs values");

  CLI::App* compare = add_command(app, inv, Command::Compare, "PSO versus Golden Section");
  add_pso_options(compare, inv);
  key_option(compare, inv, "--seeds", "compare.seeds", "Comma-separated seeds");
  key_option(compare, inv, "--algos", "compare.algos", "Discovery algorithms to include");
  key_option(compare, inv, "--tol", "golden.tol", "Golden bracket tolerance (ns)");
  key_option(compare, inv, "--max-evals", "golden.max_evals", "Golden evaluation budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    return execute(inv);
  } catch (const ConfigError& e) {
    std::cerr << "cfstune: configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "cfstune: invalid value: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "cfstune: error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
