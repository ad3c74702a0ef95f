// Acceptance checks for the whole toolkit. Prints one PASS/FAIL line per
// criterion and exits nonzero if any fails.
//
// Usage: acceptance <path-to-cfstune-cli>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "cfstune/discovery.hpp"
#include "cfstune/golden.hpp"
#include "cfstune/pso.hpp"
#include "cfstune/rsm.hpp"
#include "cfstune/simulator.hpp"
#include "cfstune/tuning.hpp"
#include "support/tick_oracle.hpp"

using namespace cfstune;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string g_cli;

// Published meta-optimization runs (w, phi_p, phi_g, rsum), kept separate from
// the library's copy so the design check is independent of it.
const std::array<std::array<double, 4>, 14> kTable = {{
    {0.0, 0, 2, 4294667323},  {0.9, 0, 2, 4294667322},  {0.0, 4, 2, 4294667347},
    {0.9, 4, 2, 4294667348},  {0.0, 2, 0, 4294668079},  {0.9, 2, 0, 4294669181},
    {0.0, 2, 4, 4294667322},  {0.9, 2, 4, 4294667321},  {0.45, 0, 0, 4294669069},
    {0.45, 4, 0, 4294668529}, {0.45, 0, 4, 4294667320}, {0.45, 4, 4, 4294667320},
    {0.45, 2, 2, 4294667333}, {0.45, 2, 2, 4294667331},
}};

const std::vector<rsm::FactorSpec> kFactors = {
    {"w", 0.0, 0.45, 0.9}, {"phi_p", 0.0, 2.0, 4.0}, {"phi_g", 0.0, 2.0, 4.0}};

std::string fmt(double x, int prec = 6) {
  std::ostringstream s;
  s.precision(prec);
  s << x;
  return s.str();
}

// ---------------------------------------------------------------------------

Outcome design_reproduction() {
  const rsm::DesignMatrix d = rsm::box_behnken_design(kFactors);
  std::multiset<std::tuple<double, double, double>> got, want;
  for (const auto& r : d.runs) got.insert({r.natural[0], r.natural[1], r.natural[2]});
  for (const auto& r : kTable) want.insert({r[0], r[1], r[2]});
  return {got == want, std::to_string(d.runs.size()) + " runs, set equality " +
                           (got == want ? "holds" : "fails")};
}

// True if the term names factor `f` (as a main effect, square or interaction).
bool involves(const std::string& term, const std::string& f) {
  std::string t = term;
  if (const auto c = t.find('^'); c != std::string::npos) t = t.substr(0, c);
  std::stringstream ss(t);
  std::string part;
  while (std::getline(ss, part, ':')) {
    if (part == f) return true;
  }
  return false;
}

Outcome rsm_on_published_data() {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (const auto& r : kTable) {
    x.push_back({kFactors[0].code(r[0]), kFactors[1].code(r[1]), kFactors[2].code(r[2])});
    y.push_back(r[3]);
  }
  const rsm::QuadraticModel m = rsm::fit_quadratic(x, y, {"w", "phi_p", "phi_g"});
  const auto tests = rsm::coefficient_significance(m);
  const rsm::Recommendation rec = rsm::recommend_optimum(m, kFactors);

  double p_phi_p = 1.0, p_icpt = tests.at(0).p_value, best_w = 1.0, best_g = 1.0;
  std::string best_w_term, best_g_term;
  for (const auto& t : tests) {
    if (t.term == "phi_p") p_phi_p = t.p_value;
    if (involves(t.term, "w") && t.p_value < best_w) {
      best_w = t.p_value;
      best_w_term = t.term;
    }
    if (involves(t.term, "phi_g") && t.p_value < best_g) {
      best_g = t.p_value;
      best_g_term = t.term;
    }
  }
  const bool a = p_phi_p >= 0.05;
  const bool b = p_icpt < 0.05 && best_w < 0.05 && best_g < 0.05;
  const double w = rec.natural[0], g = rec.natural[2];
  const bool c = w >= 0.34 && w <= 0.54 && g >= 2.5 && g <= 3.5;
  std::ostringstream s;
  s << "(a) phi_p p=" << fmt(p_phi_p, 3) << (a ? " ok" : " FAIL") << "; (b) intercept p="
    << fmt(p_icpt, 3) << ", best w term " << best_w_term << " p=" << fmt(best_w, 3)
    << ", best phi_g term " << best_g_term << " p=" << fmt(best_g, 3) << (b ? " ok" : " FAIL")
    << "; (c) w=" << fmt(w) << " phi_g=" << fmt(g) << " (" << rsm::to_string(rec.branch) << ")"
    << (c ? " ok" : " FAIL");
  return {a && b && c, s.str()};
}

Outcome golden_correctness() {
  int calls = 0;
  GoldenConfig c;
  c.a0 = 0.0;
  c.b0 = 5.0;
  c.tol_ns = 1e-3;
  c.max_evals = 1000;
  const OptTrace t = golden_section_search(
      [&](double x) {
        ++calls;
        return (x - 2.0) * (x - 2.0);
      },
      c);
  const double xmin = t.best_point.at(0);
  const bool close = std::abs(xmin - 2.0) <= 1e-3;
  const bool few = t.evaluations.size() <= 22;
  bool contraction = true, fresh = static_cast<std::size_t>(calls) == t.evaluations.size();
  double worst = 0.0;
  for (std::size_t i = 2; i < t.evaluations.size(); ++i) {
    const auto& br = *t.evaluations[i].bracket;
    const auto& prev = *t.evaluations[i - 1].bracket;
    const double ratio_err =
        std::abs((br[1] - br[0]) - (1.0 - kGoldenRho) * (prev[1] - prev[0]));
    worst = std::max(worst, ratio_err);
    if (ratio_err > 1e-9) contraction = false;
    if (t.evaluations[i].iteration != static_cast<int>(i) - 1) fresh = false;
  }
  std::ostringstream s;
  s << "x*=" << fmt(xmin, 9) << " in " << t.evaluations.size()
    << " evaluations, max contraction error " << fmt(worst, 3)
    << (fresh ? ", one evaluation per iteration" : ", evaluation count mismatch");
  return {close && few && contraction && fresh, s.str()};
}

Outcome discovery_round_trip() {
  int bad = 0;
  const std::int64_t lo1 = 20'000'000, hi1 = 201'000'000'000;
  const std::int64_t step1 = (hi1 - lo1) / 49 / 200 * 200;
  for (int i = 0; i < 50; ++i) {
    const std::int64_t P = lo1 + i * step1;
    const SchedParams a = discover_params_alg1(P);
    if (compute_sched_period(a, kDiscoveryTasks) + a.wakeup_gran_ns != P) ++bad;
    if (!(kDiscoveryTasks > compute_nr_latency(a))) ++bad;
  }
  const std::int64_t lo2 = 100'000, hi2 = 2'000'000'000;
  for (int i = 0; i < 50; ++i) {
    const std::int64_t P = i == 49 ? hi2 : lo2 + (hi2 - lo2) / 49 * i;
    const SchedParams b = discover_params_alg2(P);
    if (compute_sched_period(b, kDiscoveryTasks) + b.wakeup_gran_ns != P) ++bad;
    if (!(kDiscoveryTasks <= compute_nr_latency(b))) ++bad;
  }
  return {bad == 0, "100 grid points, " + std::to_string(bad) + " violations"};
}

// Fixed draws for injected-randomness runs.
struct ScriptedRandom {
  std::vector<std::vector<double>> draws;
  std::vector<std::size_t> next;
  double uniform(int particle) {
    auto& q = draws.at(static_cast<std::size_t>(particle));
    return q.at(next.at(static_cast<std::size_t>(particle))++);
  }
};

Outcome pso_mechanics() {
  // Hand arithmetic: w = 0.5, phi = 2, r = 0.5, x = 3, v = 1, p = 4, g = 5:
  // v' = 0.5 + 2*0.5*1 + 2*0.5*2 = 3.5, x' = 6.5.
  PsoConfig<1> c;
  c.w = 0.5;
  c.phi_p = 2.0;
  c.phi_g = 2.0;
  c.bounds = {Interval{0, 10}};
  Particle<1> p;
  p.x = {3.0};
  p.v = {1.0};
  p.p = {4.0};
  p.v = update_velocity<1>(p, {5.0}, c, 0.5, 0.5);
  const double x = update_position<1>(p, c.bounds)[0];
  bool hand = p.v[0] == 3.5 && x == 6.5;

  // The same rules through the swarm loop with injected draws: particle 0
  // starts at 3, particle 1 at 5; f = |x - 5|.
  c.n_particles = 2;
  c.max_iters = 1;
  ScriptedRandom r{{{0.3, 0.5, 0.5}, {0.5, 0.5, 0.5}}, {0, 0}};
  const OptTrace t = run_pso<1>([](const Vec<1>& v) { return std::abs(v[0] - 5.0); }, c, r);
  hand = hand && t.evaluations.size() == 4 && t.evaluations[0].point[0] == 3.0 &&
         t.evaluations[2].point[0] == 5.0;

  int hits = 0;
  std::ostringstream bests;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    PsoConfig<3> s;
    s.w = 0.4365;
    s.phi_p = 3.020;
    s.phi_g = 3.020;
    s.n_particles = 20;
    s.max_iters = 30;
    s.bounds = {Interval{-5, 5}, Interval{-5, 5}, Interval{-5, 5}};
    s.seed = seed;
    const OptTrace st = run_pso<3>(
        [](const Vec<3>& v) { return v[0] * v[0] + v[1] * v[1] + v[2] * v[2]; }, s);
    if (st.best_response <= 1e-2) ++hits;
    bests << (seed > 1 ? " " : "") << fmt(st.best_response, 3);
  }
  std::ostringstream s;
  s << "hand step " << (hand ? "ok" : "MISMATCH") << "; sphere best per seed [" << bests.str()
    << "], " << hits << " of 5 <= 1e-2 (need 4)";
  return {hand && hits >= 4, s.str()};
}

Outcome comparative_ordering() {
  const WorkloadSpec w;
  const SimConfig sim;
  PsoConfig<3> pso = default_scheduler_pso_config();
  pso.w = 0.4365;
  pso.phi_p = 3.020;
  pso.phi_g = 3.020;
  pso.n_particles = 20;
  pso.max_iters = 30;
  const std::vector<MethodSpec> methods{
      {"pso", w, sim, pso, std::nullopt},
      {"golden-alg1", w, sim, std::nullopt, default_golden_config(DiscoveryAlgorithm::Alg1)},
      {"golden-alg2", w, sim, std::nullopt, default_golden_config(DiscoveryAlgorithm::Alg2)}};
  const CompareResult r = compare_experiment(methods, {1, 2, 3, 4, 5});

  bool a = true, b_golden = true, b_pso = true;
  std::ostringstream s;
  for (std::size_t k = 0; k < r.seeds.size(); ++k) {
    const CompareRow& p = r.rows[3 * k];
    s << (k ? "; " : "") << "seed " << r.seeds[k] << ": pso " << fmt(p.best_response);
    for (std::size_t m = 1; m < 3; ++m) {
      const CompareRow& g = r.rows[3 * k + m];
      if (p.best_response > g.best_response) a = false;
      if (g.evals_to_best > 12) b_golden = false;
      const auto reach = p.evals_to_reach.at(g.method);
      if (reach && *reach <= 12) b_pso = false;
      s << ", " << g.method << " " << fmt(g.best_response) << "@" << g.evals_to_best
        << " (pso matched @" << (reach ? std::to_string(*reach) : "never") << ")";
    }
  }
  s << " | (a) " << (a ? "ok" : "FAIL") << ", (b) golden <= 12 "
    << (b_golden ? "ok" : "FAIL") << ", pso > 12 " << (b_pso ? "ok" : "FAIL");
  return {a && b_golden && b_pso, s.str()};
}

Outcome linearity() {
  const LinearityFit fit =
      validate_linearity({10, 20, 30, 40, 50, 60, 70, 80, 90, 100}, WorkloadSpec{}, SimConfig{});
  return {fit.r_squared >= 0.99, "R^2=" + fmt(fit.r_squared, 12) + ", slope " +
                                     fmt(fit.slope) + " jiffies/msg"};
}

Outcome oracle_equivalence() {
  // Every shape with at most 4 tasks, at most 4 messages in total.
  const std::vector<SchedParams> settings = {
      {20'000'000, 4'000'000, 10'000'000}, {19'900'000, 100'000, 0}, {1'000'000, 400'000, 0}};
  struct Shape { int groups, fanout; std::int64_t max_msgs; };
  const std::vector<Shape> shapes = {{1, 1, 4}, {2, 1, 2}, {1, 2, 1}};
  int cases = 0, mismatches = 0;
  for (const auto& p : settings) {
    for (const auto& sh : shapes) {
      for (std::int64_t msgs = 0; msgs <= sh.max_msgs; ++msgs) {
        for (std::int64_t cap : {1, 2, 64}) {
          for (auto [send, recv] : {std::pair<std::int64_t, std::int64_t>{750'000, 750'000},
                                    {300'000, 500'000}, {1'000, 2'000}}) {
            for (std::int64_t sw : {0, 10'000}) {
              for (int cpus : {1, 2}) {
                WorkloadSpec w;
                w.groups = sh.groups;
                w.fanout = sh.fanout;
                w.msgs = msgs;
                w.channel_capacity = cap;
                w.msg_cost_send_ns = send;
                w.msg_cost_recv_ns = recv;
                SimConfig c;
                c.switch_cost_ns = sw;
                c.num_cpus = cpus;
                const SimResult e = run_simulation(p, w, c);
                const auto o = oracle::tick_simulate(p, w, c);
                ++cases;
                if (e.turnaround_ns != o.turnaround_ns ||
                    e.messages_delivered != o.messages_delivered ||
                    e.context_switches != o.context_switches || e.completed != o.completed) {
                  ++mismatches;
                }
              }
            }
          }
        }
      }
    }
  }
  return {mismatches == 0 && cases > 0, std::to_string(cases) + " cases, " +
                                            std::to_string(mismatches) + " mismatches"};
}

std::string read_body(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::string line, body;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    body += line + "\n";
  }
  return body;
}

Outcome cli_determinism() {
  if (g_cli.empty()) return {false, "no CLI path given"};
  const fs::path dir = fs::temp_directory_path() / "cfstune_acceptance";
  fs::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> pipelines = {
      {"simulate", "simulate --groups 2 --msgs 20"},
      {"pso", "pso --seed 7 --particles 6 --iters 5"},
      {"golden", "golden --algo 2 --max-evals 12"},
      {"rsm", "rsm --seed 3 --groups 1 --fanout 4 --msgs 5 --particles 4 --iters 3"},
      {"validate", "validate --groups 1 --msgs-list 5,10,15"},
      {"compare", "compare --groups 1 --msgs 5 --particles 4 --iters 3 --seeds 1,2"},
  };
  int identical = 0;
  std::string failed;
  for (const auto& [name, args] : pipelines) {
    std::string bodies[2];
    bool ran = true;
    for (int k = 0; k < 2; ++k) {
      const fs::path out = dir / (name + "_" + std::to_string(k) + ".csv");
      fs::remove(out);
      const std::string cmd = "\"" + g_cli + "\" " + args + " -o \"" + out.string() +
                              "\" > \"" + (dir / "log.txt").string() + "\" 2>&1";
      if (std::system(cmd.c_str()) != 0) ran = false;
      bodies[k] = read_body(out);
    }
    if (ran && !bodies[0].empty() && bodies[0] == bodies[1]) {
      ++identical;
    } else {
      failed += " " + name;
    }
  }
  fs::remove_all(dir);
  return {identical == static_cast<int>(pipelines.size()),
          std::to_string(identical) + " of " + std::to_string(pipelines.size()) +
              " pipelines byte-identical" + (failed.empty() ? "" : "; differ:" + failed)};
}

Outcome conservation() {
  std::mt19937_64 gen(2024);
  auto pick = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(gen);
  };
  int runs = 0, completed = 0, bad = 0;
  for (int i = 0; i < 300; ++i) {
    WorkloadSpec w;
    w.groups = static_cast<int>(pick(1, 4));
    w.fanout = static_cast<int>(pick(1, 8));
    w.msgs = pick(0, 12);
    w.channel_capacity = pick(1, 8);
    const std::int64_t lat = pick(100'000, 200'000'000);
    const SchedParams p{lat, pick(100'000, lat), pick(0, 20'000'000)};
    SimConfig c;
    c.num_cpus = static_cast<int>(pick(1, 3));
    Simulator sim(p, Workload(w), c);
    const SimResult r = sim.run();
    ++runs;
    if (!r.completed) continue;
    ++completed;
    if (r.messages_delivered != w.groups * w.fanout * w.fanout * w.msgs ||
        !sim.workload().all_channels_empty()) {
      ++bad;
    }
  }
  return {bad == 0 && completed == runs,
          std::to_string(completed) + " of " + std::to_string(runs) + " runs completed, " +
              std::to_string(bad) + " conservation violations"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli = argv[1];

  struct Criterion {
    int id;
    const char* name;
    double budget_s;  // 0: none
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "design reproduction", 1.0, design_reproduction},
      {2, "RSM on published data", 1.0, rsm_on_published_data},
      {3, "golden section correctness", 0.0, golden_correctness},
      {4, "discovery round trip", 1.0, discovery_round_trip},
      {5, "PSO mechanics", 0.0, pso_mechanics},
      {6, "comparative ordering", 600.0, comparative_ordering},
      {7, "linearity", 120.0, linearity},
      {8, "simulator oracle equivalence", 0.0, oracle_equivalence},
      {9, "CLI determinism", 0.0, cli_determinism},
      {10, "message conservation", 0.0, conservation},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += "; over the " + fmt(c.budget_s) + " s budget";
    }
    if (!o.pass) ++failures;
    std::printf("%s  %2d %-30s %8.3fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
