// Event-driven CFS-style scheduler simulation.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cfstune/errors.hpp"
#include "cfstune/hackbench.hpp"
#include "cfstune/sched_params.hpp"

namespace cfstune {

struct SimConfig {
  int num_cpus = 1;
  std::int64_t ns_per_jiffy = 1'000'000;
  std::int64_t max_jiffies = 10'000'000;
  std::int64_t switch_cost_ns = 10'000;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (num_cpus < 1) throw ConfigError("sim.num_cpus must be >= 1");
    if (ns_per_jiffy < 1) throw ConfigError("sim.ns_per_jiffy must be >= 1");
    if (max_jiffies < 1) throw ConfigError("sim.max_jiffies must be >= 1");
    if (switch_cost_ns < 0) throw ConfigError("sim.switch_cost_ns must be >= 0");
  }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct SimResult {
  std::int64_t turnaround_jiffies = 0;
  std::int64_t turnaround_ns = 0;
  std::int64_t messages_delivered = 0;
  std::int64_t context_switches = 0;
  bool completed = false;

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

struct TaskState {
  int id = 0;
  std::int64_t vruntime_ns = 0;
  TaskStatus status = TaskStatus::Runnable;
  std::int64_t exec_total_ns = 0;
};

/// Ready tasks ordered by (vruntime, id), plus the queue's min_vruntime floor.
class RunQueue {
 public:
  void enqueue(const TaskState& t) { ready_.emplace(t.vruntime_ns, t.id); }
  void dequeue(const TaskState& t) { ready_.erase({t.vruntime_ns, t.id}); }

  std::optional<int> leftmost() const {
    if (ready_.empty()) return std::nullopt;
    return ready_.begin()->second;
  }
  std::optional<std::int64_t> leftmost_vruntime() const {
    if (ready_.empty()) return std::nullopt;
    return ready_.begin()->first;
  }

  /// min_vruntime := max(min_vruntime, min(running vruntime, leftmost)).
  void update_min_vruntime(std::optional<std::int64_t> running_min) {
    std::optional<std::int64_t> candidate = running_min;
    if (const auto left = leftmost_vruntime()) {
      candidate = candidate ? std::min(*candidate, *left) : *left;
    }
    if (candidate) min_vruntime_ = std::max(min_vruntime_, *candidate);
  }

  std::int64_t min_vruntime() const { return min_vruntime_; }
  std::size_t size() const { return ready_.size(); }
  bool empty() const { return ready_.empty(); }
  const std::set<std::pair<std::int64_t, int>>& ready() const {
    return ready_;
  }

 private:
  std::set<std::pair<std::int64_t, int>> ready_;
  std::int64_t min_vruntime_ = 0;
};

/// The runnable task with the smallest (vruntime, id), if any.
inline std::optional<int> pick_next(const RunQueue& rq) { return rq.leftmost(); }

/// Moves a Blocked task back onto the run queue, lifting its vruntime to the
/// queue's floor.
inline void wake_task(RunQueue& rq, TaskState& task) {
  if (task.status != TaskStatus::Blocked) {
    throw StateError("wake_task on task " + std::to_string(task.id) +
                     " in state " + to_string(task.status));
  }
  task.vruntime_ns = std::max(task.vruntime_ns, rq.min_vruntime());
  task.status = TaskStatus::Runnable;
  rq.enqueue(task);
}

/// Emitted every time a CPU takes a task off the run queue.
struct DispatchEvent {
  std::int64_t time_ns = 0;
  int cpu = 0;
  int task = 0;
  std::int64_t vruntime_ns = 0;
  std::int64_t slice_ns = 0;
  // Smallest vruntime among tasks still waiting after the pick.
  std::optional<std::int64_t> next_ready_vruntime;
  bool context_switch = false;
};

/// Single-use simulation instance. Not thread-safe; independent instances
/// share nothing.
class Simulator {
 public:
  using DispatchHook = std::function<void(const DispatchEvent&)>;

  Simulator(const SchedParams& params, Workload workload,
            const SimConfig& config)
      : params_(params), workload_(std::move(workload)), config_(config) {
    config_.validate();
    if (workload_.num_tasks() < 1) {
      throw ConfigError("workload has no tasks");
    }
    // Surfaces a zero min_gran before any time passes.
    (void)compute_nr_latency(params_);
    tasks_.resize(static_cast<std::size_t>(workload_.num_tasks()));
    for (int i = 0; i < workload_.num_tasks(); ++i) {
      tasks_[static_cast<std::size_t>(i)].id = i;
      rq_.enqueue(tasks_[static_cast<std::size_t>(i)]);
    }
    cpus_.resize(static_cast<std::size_t>(config_.num_cpus));
  }

  void on_dispatch(DispatchHook hook) { hook_ = std::move(hook); }

  SimResult run() {
    const std::int64_t cap = config_.max_jiffies * config_.ns_per_jiffy;
    fill_idle_cpus(0);
    while (done_count_ < static_cast<int>(tasks_.size())) {
      int next = -1;
      for (int c = 0; c < static_cast<int>(cpus_.size()); ++c) {
        const Cpu& cpu = cpus_[static_cast<std::size_t>(c)];
        if (cpu.phase == Phase::Idle) continue;
        if (next < 0 ||
            cpu.event_ns < cpus_[static_cast<std::size_t>(next)].event_ns) {
          next = c;
        }
      }
      if (next < 0) throw StateError("simulation stalled with no runnable task");
      const std::int64_t t = cpus_[static_cast<std::size_t>(next)].event_ns;
      if (t > cap) {
        now_ = cap;
        return finish(false);
      }
      now_ = t;
      update_curr_all();
      update_min_vruntime();
      handle_event(next);
      fill_idle_cpus(0);
    }
    return finish(true);
  }

  const std::vector<TaskState>& tasks() const { return tasks_; }
  const RunQueue& run_queue() const { return rq_; }
  const Workload& workload() const { return workload_; }
  std::int64_t now_ns() const { return now_; }

 private:
  enum class Phase { Idle, Switching, Executing };

  struct Cpu {
    Phase phase = Phase::Idle;
    int current = -1;
    int last = -1;
    std::int64_t event_ns = 0;
    std::int64_t charged_until = 0;
    std::int64_t slice_remaining = 0;
    std::int64_t op_cost = 0;
  };

  TaskState& task(int id) { return tasks_[static_cast<std::size_t>(id)]; }

  void update_curr_all() {
    for (Cpu& cpu : cpus_) {
      if (cpu.phase != Phase::Executing) continue;
      const std::int64_t delta = now_ - cpu.charged_until;
      TaskState& t = task(cpu.current);
      t.vruntime_ns += delta;
      t.exec_total_ns += delta;
      cpu.charged_until = now_;
    }
  }

  void update_min_vruntime() {
    std::optional<std::int64_t> running;
    for (const Cpu& cpu : cpus_) {
      if (cpu.current < 0) continue;
      const std::int64_t vr = tasks_[static_cast<std::size_t>(cpu.current)].vruntime_ns;
      running = running ? std::min(*running, vr) : vr;
    }
    rq_.update_min_vruntime(running);
  }

  std::int64_t nr_running() const {
    std::int64_t n = static_cast<std::int64_t>(rq_.size());
    for (const Cpu& cpu : cpus_) n += cpu.current >= 0 ? 1 : 0;
    return n;
  }

  void handle_event(int c) {
    Cpu& cpu = cpus_[static_cast<std::size_t>(c)];
    if (cpu.phase == Phase::Switching) {
      begin_execution(c);
      return;
    }
    // Operation completed.
    const int id = cpu.current;
    cpu.slice_remaining -= cpu.op_cost;
    StepOutcome out = workload_.perform_one(id);
    for (int peer : out.notified) {
      TaskState& p = task(peer);
      if (p.status == TaskStatus::Blocked) {
        update_min_vruntime();
        wake_task(rq_, p);
      }
    }
    continue_task(c, false);
  }

  void begin_execution(int c) {
    Cpu& cpu = cpus_[static_cast<std::size_t>(c)];
    cpu.phase = Phase::Executing;
    cpu.charged_until = now_;
    continue_task(c, true);
  }

  // Decides what the CPU's current task does next at time now_.
  void continue_task(int c, bool fresh_dispatch) {
    Cpu& cpu = cpus_[static_cast<std::size_t>(c)];
    TaskState& t = task(cpu.current);
    const NextAction a = workload_.peek(t.id);
    if (a.kind == NextAction::Kind::Done) {
      t.status = TaskStatus::Done;
      ++done_count_;
      release(c);
      return;
    }
    if (a.kind == NextAction::Kind::Blocked) {
      t.status = TaskStatus::Blocked;
      release(c);
      return;
    }
    // A dispatched task always completes at least one operation, even when
    // the slice is shorter than the operation.
    if (!fresh_dispatch && cpu.slice_remaining < a.cost_ns) {
      if (!rq_.empty()) {
        t.status = TaskStatus::Runnable;
        rq_.enqueue(t);
        release(c);
        return;
      }
      cpu.slice_remaining = compute_time_slice(params_, nr_running());
    }
    cpu.op_cost = a.cost_ns;
    cpu.event_ns = now_ + a.cost_ns;
  }

  void release(int c) {
    Cpu& cpu = cpus_[static_cast<std::size_t>(c)];
    cpu.current = -1;
    cpu.phase = Phase::Idle;
    dispatch(c);
  }

  void dispatch(int c) {
    Cpu& cpu = cpus_[static_cast<std::size_t>(c)];
    update_min_vruntime();
    const std::optional<int> pick = pick_next(rq_);
    if (!pick) return;
    TaskState& t = task(*pick);
    rq_.dequeue(t);
    t.status = TaskStatus::Running;
    cpu.current = t.id;
    cpu.slice_remaining = compute_time_slice(params_, nr_running());
    const bool switched = cpu.last >= 0 && cpu.last != t.id;
    cpu.last = t.id;
    if (hook_) {
      hook_(DispatchEvent{now_, c, t.id, t.vruntime_ns, cpu.slice_remaining,
                          rq_.leftmost_vruntime(), switched});
    }
    if (switched) {
      ++context_switches_;
      cpu.phase = Phase::Switching;
      cpu.event_ns = now_ + config_.switch_cost_ns;
      if (config_.switch_cost_ns > 0) return;
    }
    begin_execution(c);
  }

  void fill_idle_cpus(int from) {
    for (int c = from; c < static_cast<int>(cpus_.size()); ++c) {
      if (rq_.empty()) return;
      if (cpus_[static_cast<std::size_t>(c)].phase == Phase::Idle) dispatch(c);
    }
  }

  SimResult finish(bool completed) {
    SimResult r;
    r.completed = completed;
    r.turnaround_ns = now_;
    r.turnaround_jiffies =
        (now_ + config_.ns_per_jiffy - 1) / config_.ns_per_jiffy;
    r.messages_delivered = workload_.messages_delivered();
    r.context_switches = context_switches_;
    return r;
  }

  SchedParams params_;
  Workload workload_;
  SimConfig config_;
  std::vector<TaskState> tasks_;
  RunQueue rq_;
  std::vector<Cpu> cpus_;
  std::int64_t now_ = 0;
  std::int64_t context_switches_ = 0;
  int done_count_ = 0;
  DispatchHook hook_;
};

/// Runs the workload to completion (or the wall-clock cap) under `params`.
/// A pure function of its inputs.
inline SimResult run_simulation(const SchedParams& params, Workload workload,
                                const SimConfig& config = {}) {
  return Simulator(params, std::move(workload), config).run();
}

inline SimResult run_simulation(const SchedParams& params,
                                const WorkloadSpec& spec,
                                const SimConfig& config = {}) {
  return run_simulation(params, Workload(spec), config);
}

/// Optimizer response: turnaround in jiffies, or max_jiffies on timeout.
inline double response_jiffies(const SimResult& r, const SimConfig& config) {
  return r.completed ? static_cast<double>(r.turnaround_jiffies)
                     : static_cast<double>(config.max_jiffies);
}

}  // namespace cfstune
