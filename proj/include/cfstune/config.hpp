// Experiment configuration: flat `key = value` text with dotted section
// prefixes, command-line overrides and master-seed resolution.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cfstune/errors.hpp"
#include "cfstune/tuning.hpp"

namespace cfstune {

enum class Command { Simulate, Pso, Golden, Rsm, Validate, Compare };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Pso: return "pso";
    case Command::Golden: return "golden";
    case Command::Rsm: return "rsm";
    case Command::Validate: return "validate";
    case Command::Compare: return "compare";
  }
  return "?";
}

inline constexpr const char* kSeedEnvVar = "CFS_AUTOTUNE_SEED";
inline constexpr std::uint64_t kDefaultMasterSeed = 1;

using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
    if (!ok) return false;
  }
  return true;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

}  // namespace detail

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
inline KeyValues parse_config_text(std::string_view text, std::string_view source = "config") {
  KeyValues kv;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    if (!detail::valid_key(key)) throw ConfigError(where + "invalid key '" + std::string(key) + "'");
    if (value.empty()) throw ConfigError(where + "missing value for '" + std::string(key) + "'");
    if (!kv.emplace(std::string(key), std::string(value)).second) {
      throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
    }
  }
  return kv;
}

inline KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Scalar parsing. Numbers accept scientific notation throughout.

inline double parse_real(std::string_view key, std::string_view v) {
  v = detail::trim(v);
  double x = 0.0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || end != v.data() + v.size() || !std::isfinite(x)) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
  }
  return x;
}

/// Integers may be written as `20000000` or `2e7`; non-integral values are
/// rejected rather than rounded.
inline std::int64_t parse_integer(std::string_view key, std::string_view v) {
  v = detail::trim(v);
  std::int64_t n = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec == std::errc() && end == v.data() + v.size()) return n;
  if (ec == std::errc::result_out_of_range) {
    throw ConfigError(std::string(key) + ": integer out of range '" + std::string(v) + "'");
  }
  const double x = parse_real(key, v);
  if (x != std::floor(x) || std::abs(x) >= 9.2e18) {
    throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
  }
  return static_cast<std::int64_t>(x);
}

inline std::uint64_t parse_seed(std::string_view key, std::string_view v) {
  v = detail::trim(v);
  std::uint64_t n = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec == std::errc() && end == v.data() + v.size()) return n;
  const std::int64_t i = parse_integer(key, v);
  if (i < 0) throw ConfigError(std::string(key) + ": seed must be non-negative");
  return static_cast<std::uint64_t>(i);
}

inline bool parse_bool(std::string_view key, std::string_view v) {
  v = detail::trim(v);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(v) + "'");
}

inline std::vector<std::int64_t> parse_integer_list(std::string_view key, std::string_view v) {
  std::vector<std::int64_t> out;
  for (auto item : detail::split(v, ',')) {
    if (item.empty()) throw ConfigError(std::string(key) + ": empty list element");
    out.push_back(parse_integer(key, item));
  }
  return out;
}

/// Shortest round-trip text for a double; integral values print without an
/// exponent.
inline std::string format_real(double x) {
  char buf[64];
  const bool integral = std::isfinite(x) && x == std::floor(x) && std::abs(x) < 1e17;
  const auto r = integral ? std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed)
                          : std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

template <class Int>
std::string join_list(const std::vector<Int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

// ---------------------------------------------------------------------------

struct ExperimentConfig {
  Command command = Command::Simulate;
  WorkloadSpec workload;
  SimConfig sim;
  SchedParams params;  // simulate and validate
  PsoConfig<3> pso = default_scheduler_pso_config();
  GoldenConfig golden = default_golden_config(DiscoveryAlgorithm::Alg1);
  bool rsm_reference = false;  // analyse the published runs instead of running PSO
  int rsm_particles = 20;
  int rsm_iters = 30;
  rsm::RecommendOptions rsm_options;
  std::vector<std::int64_t> validate_msgs{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::vector<std::int64_t> compare_seeds{1, 2, 3, 4, 5};
  std::vector<std::int64_t> compare_algos{1, 2};
  std::string output;     // empty: CSV to stdout
  std::string plot_data;  // empty: no plot file
  std::uint64_t master_seed = kDefaultMasterSeed;
  std::string seed_source = "default";
};

namespace detail {

inline constexpr unsigned bit(Command c) { return 1u << static_cast<unsigned>(c); }
inline constexpr unsigned kAll = 0x3f;

struct KeySpec {
  const char* name;
  unsigned commands;  // bitmask of commands accepting the key
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

inline int to_int(std::string_view key, std::string_view v) {
  const std::int64_t n = parse_integer(key, v);
  if (n < INT32_MIN || n > INT32_MAX) throw ConfigError(std::string(key) + ": value out of range");
  return static_cast<int>(n);
}

#define CFSTUNE_INT_KEY(NAME, MASK, FIELD)                                            \
  KeySpec{NAME, MASK,                                                                 \
          [](ExperimentConfig& c, std::string_view v) {                               \
            c.FIELD = static_cast<decltype(c.FIELD)>(parse_integer(NAME, v));         \
          },                                                                          \
          [](const ExperimentConfig& c) { return std::to_string(c.FIELD); }}
#define CFSTUNE_SMALL_INT_KEY(NAME, MASK, FIELD)                                      \
  KeySpec{NAME, MASK, [](ExperimentConfig& c, std::string_view v) { c.FIELD = to_int(NAME, v); }, \
          [](const ExperimentConfig& c) { return std::to_string(c.FIELD); }}
#define CFSTUNE_REAL_KEY(NAME, MASK, FIELD)                                           \
  KeySpec{NAME, MASK, [](ExperimentConfig& c, std::string_view v) { c.FIELD = parse_real(NAME, v); }, \
          [](const ExperimentConfig& c) { return format_real(c.FIELD); }}

inline const std::vector<KeySpec>& key_table() {
  using C = Command;
  constexpr unsigned sched = bit(C::Simulate) | bit(C::Validate);
  constexpr unsigned pso = bit(C::Pso) | bit(C::Compare);
  constexpr unsigned golden_tune = bit(C::Golden) | bit(C::Compare);
  static const std::vector<KeySpec> table = {
      KeySpec{"seed", kAll,
              [](ExperimentConfig& c, std::string_view v) { c.master_seed = parse_seed("seed", v); },
              [](const ExperimentConfig& c) { return std::to_string(c.master_seed); }},
      CFSTUNE_SMALL_INT_KEY("workload.groups", kAll, workload.groups),
      CFSTUNE_SMALL_INT_KEY("workload.fanout", kAll, workload.fanout),
      CFSTUNE_INT_KEY("workload.msgs", kAll & ~bit(C::Validate), workload.msgs),
      CFSTUNE_INT_KEY("workload.send_cost_ns", kAll, workload.msg_cost_send_ns),
      CFSTUNE_INT_KEY("workload.recv_cost_ns", kAll, workload.msg_cost_recv_ns),
      CFSTUNE_INT_KEY("workload.channel_capacity", kAll, workload.channel_capacity),
      CFSTUNE_SMALL_INT_KEY("sim.num_cpus", kAll, sim.num_cpus),
      CFSTUNE_INT_KEY("sim.ns_per_jiffy", kAll, sim.ns_per_jiffy),
      CFSTUNE_INT_KEY("sim.max_jiffies", kAll, sim.max_jiffies),
      CFSTUNE_INT_KEY("sim.switch_cost_ns", kAll, sim.switch_cost_ns),
      CFSTUNE_INT_KEY("sched.latency_ns", sched, params.latency_ns),
      CFSTUNE_INT_KEY("sched.min_gran_ns", sched, params.min_gran_ns),
      CFSTUNE_INT_KEY("sched.wakeup_gran_ns", sched, params.wakeup_gran_ns),
      CFSTUNE_REAL_KEY("pso.w", pso, pso.w),
      CFSTUNE_REAL_KEY("pso.phi_p", pso, pso.phi_p),
      CFSTUNE_REAL_KEY("pso.phi_g", pso, pso.phi_g),
      CFSTUNE_SMALL_INT_KEY("pso.n_particles", pso, pso.n_particles),
      CFSTUNE_SMALL_INT_KEY("pso.max_iters", pso, pso.max_iters),
      KeySpec{"golden.algo", bit(C::Golden),
              [](ExperimentConfig& c, std::string_view v) {
                const int a = to_int("golden.algo", v);
                if (a != 1 && a != 2) throw ConfigError("golden.algo must be 1 or 2");
                const auto algo = static_cast<DiscoveryAlgorithm>(a);
                if (algo != c.golden.discovery) {
                  // Switching algorithm switches to that algorithm's bracket.
                  const GoldenConfig d = default_golden_config(algo);
                  c.golden.discovery = algo;
                  c.golden.a0 = d.a0;
                  c.golden.b0 = d.b0;
                }
              },
              [](const ExperimentConfig& c) {
                return std::to_string(static_cast<int>(c.golden.discovery));
              }},
      CFSTUNE_REAL_KEY("golden.a0", bit(C::Golden), golden.a0),
      CFSTUNE_REAL_KEY("golden.b0", bit(C::Golden), golden.b0),
      CFSTUNE_REAL_KEY("golden.tol", golden_tune, golden.tol_ns),
      CFSTUNE_SMALL_INT_KEY("golden.max_evals", golden_tune, golden.max_evals),
      KeySpec{"rsm.reference", bit(C::Rsm),
              [](ExperimentConfig& c, std::string_view v) {
                c.rsm_reference = parse_bool("rsm.reference", v);
              },
              [](const ExperimentConfig& c) { return std::string(c.rsm_reference ? "true" : "false"); }},
      CFSTUNE_SMALL_INT_KEY("rsm.n_particles", bit(C::Rsm), rsm_particles),
      CFSTUNE_SMALL_INT_KEY("rsm.max_iters", bit(C::Rsm), rsm_iters),
      CFSTUNE_REAL_KEY("rsm.screen_alpha", bit(C::Rsm), rsm_options.screen_alpha),
      CFSTUNE_REAL_KEY("rsm.step", bit(C::Rsm), rsm_options.step),
      KeySpec{"validate.msgs", bit(C::Validate),
              [](ExperimentConfig& c, std::string_view v) {
                c.validate_msgs = parse_integer_list("validate.msgs", v);
              },
              [](const ExperimentConfig& c) { return join_list(c.validate_msgs); }},
      KeySpec{"compare.seeds", bit(C::Compare),
              [](ExperimentConfig& c, std::string_view v) {
                c.compare_seeds = parse_integer_list("compare.seeds", v);
              },
              [](const ExperimentConfig& c) { return join_list(c.compare_seeds); }},
      KeySpec{"compare.algos", bit(C::Compare),
              [](ExperimentConfig& c, std::string_view v) {
                c.compare_algos = parse_integer_list("compare.algos", v);
              },
              [](const ExperimentConfig& c) { return join_list(c.compare_algos); }},
      KeySpec{"output.path", kAll,
              [](ExperimentConfig& c, std::string_view v) { c.output = std::string(v); },
              nullptr},
      KeySpec{"output.plot_data", kAll,
              [](ExperimentConfig& c, std::string_view v) { c.plot_data = std::string(v); },
              nullptr},
  };
  return table;
}

#undef CFSTUNE_INT_KEY
#undef CFSTUNE_SMALL_INT_KEY
#undef CFSTUNE_REAL_KEY

inline const KeySpec* find_key(std::string_view name) {
  for (const auto& k : key_table()) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

inline std::string section_of(std::string_view key) {
  const auto dot = key.find('.');
  return dot == std::string_view::npos ? std::string() : std::string(key.substr(0, dot));
}

inline void check_ranges(const ExperimentConfig& c) {
  c.workload.validate();
  c.sim.validate();
  switch (c.command) {
    case Command::Simulate:
    case Command::Validate:
      (void)validated(c.params);
      break;
    case Command::Pso:
      c.pso.validate();
      break;
    case Command::Golden: {
      c.golden.validate();
      const double lo = c.golden.discovery == DiscoveryAlgorithm::Alg1
                            ? static_cast<double>(kAlg1MinPeriod)
                            : static_cast<double>(kAlg2MinPeriod);
      if (c.golden.a0 < lo) {
        throw DomainError("golden.a0 must be >= " + format_real(lo) + " for algorithm " +
                          std::to_string(static_cast<int>(c.golden.discovery)));
      }
      break;
    }
    case Command::Rsm:
      if (c.rsm_particles < 1) throw ConfigError("rsm.n_particles must be >= 1");
      if (c.rsm_iters < 1) throw ConfigError("rsm.max_iters must be >= 1");
      if (!(c.rsm_options.screen_alpha >= 0.0 && c.rsm_options.screen_alpha < 1.0)) {
        throw ConfigError("rsm.screen_alpha must be in [0, 1)");
      }
      if (!(c.rsm_options.step > 0.0)) throw ConfigError("rsm.step must be > 0");
      break;
    case Command::Compare:
      c.pso.validate();
      if (c.golden.tol_ns <= 0.0) throw ConfigError("golden.tol must be > 0");
      if (c.golden.max_evals < 2) throw ConfigError("golden.max_evals must be >= 2");
      if (c.compare_seeds.empty()) throw ConfigError("compare.seeds must not be empty");
      for (auto s : c.compare_seeds) {
        if (s < 0) throw ConfigError("compare.seeds must be non-negative");
      }
      if (c.compare_algos.empty()) throw ConfigError("compare.algos must not be empty");
      for (auto a : c.compare_algos) {
        if (a != 1 && a != 2) throw ConfigError("compare.algos entries must be 1 or 2");
      }
      break;
  }
}

}  // namespace detail

/// Builds the configuration for `command` from a config file's keys and
/// command-line overrides (which win). The master seed falls back to the
/// environment variable, then to the built-in default.
inline ExperimentConfig resolve_config(Command command, const KeyValues& file,
                                       const KeyValues& overrides,
                                       std::optional<std::string> env_seed = std::nullopt) {
  ExperimentConfig c;
  c.command = command;
  if (command == Command::Golden || command == Command::Compare) {
    c.golden = default_golden_config(DiscoveryAlgorithm::Alg1);
  }

  for (const auto& [key, value] : file) {
    const auto* spec = detail::find_key(key);
    if (!spec) throw ConfigError("unknown config key '" + key + "'");
    if (!(spec->commands & detail::bit(command))) {
      const std::string section = detail::section_of(key);
      bool section_used = false;
      for (const auto& k : detail::key_table()) {
        section_used = section_used || (detail::section_of(k.name) == section &&
                                        (k.commands & detail::bit(command)));
      }
      if (!section_used) {
        throw ConfigError("config section '" + section + "' does not belong to command '" +
                          to_string(command) + "'");
      }
      throw ConfigError("config key '" + key + "' is not used by command '" +
                        to_string(command) + "'");
    }
  }

  KeyValues merged = file;
  for (const auto& [key, value] : overrides) merged[key] = value;
  if (overrides.count("seed")) {
    c.seed_source = "flag";
  } else if (file.count("seed")) {
    c.seed_source = "config";
  } else if (env_seed && !detail::trim(*env_seed).empty()) {
    merged["seed"] = *env_seed;
    c.seed_source = "env";
  }

  // golden.algo must be applied before the bracket so an explicit bracket
  // is not replaced by the algorithm's default.
  if (auto it = merged.find("golden.algo"); it != merged.end()) {
    const auto* spec = detail::find_key(it->first);
    if (!(spec->commands & detail::bit(command))) {
      throw ConfigError("option golden.algo is not used by command '" +
                        std::string(to_string(command)) + "'");
    }
    spec->set(c, it->second);
  }
  for (const auto& [key, value] : merged) {
    if (key == "golden.algo") continue;
    const auto* spec = detail::find_key(key);
    if (!spec) throw ConfigError("unknown config key '" + key + "'");
    if (!(spec->commands & detail::bit(command))) {
      throw ConfigError("option " + key + " is not used by command '" + to_string(command) + "'");
    }
    spec->set(c, value);
  }
  c.sim.rng_seed = c.master_seed;
  c.pso.seed = c.master_seed;
  detail::check_ranges(c);
  return c;
}

inline std::optional<std::string> seed_from_environment() {
  if (const char* v = std::getenv(kSeedEnvVar)) return std::string(v);
  return std::nullopt;
}

/// Every setting that can influence `c.command`'s results, as sorted
/// `key = value` lines. Output paths are excluded.
inline std::vector<std::string> resolved_config_lines(const ExperimentConfig& c) {
  std::vector<std::string> lines;
  for (const auto& k : detail::key_table()) {
    if (!k.get || !(k.commands & detail::bit(c.command))) continue;
    lines.push_back(std::string(k.name) + " = " + k.get(c));
  }
  std::sort(lines.begin(), lines.end());
  return lines;
}

}  // namespace cfstune
