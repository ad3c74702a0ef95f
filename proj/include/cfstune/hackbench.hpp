// Hackbench-style chat workload: groups of sender and receiver state machines
// exchanging messages over bounded per-pair FIFO channels.
#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cfstune/errors.hpp"

namespace cfstune {

struct WorkloadSpec {
  int groups = 5;
  int fanout = 20;  // senders == receivers per group
  std::int64_t msgs = 1;  // per sender-receiver pair
  std::int64_t msg_cost_send_ns = 750'000;
  std::int64_t msg_cost_recv_ns = 750'000;
  std::int64_t channel_capacity = 64;

  void validate() const {
    if (groups < 1) throw ConfigError("workload.groups must be >= 1");
    if (fanout < 1) throw ConfigError("workload.fanout must be >= 1");
    if (msgs < 0) throw ConfigError("workload.msgs must be >= 0");
    if (msg_cost_send_ns < 0 || msg_cost_recv_ns < 0) {
      throw ConfigError("workload message costs must be >= 0");
    }
    if (channel_capacity < 1) {
      throw ConfigError("workload.channel_capacity must be >= 1");
    }
  }

  int num_tasks() const { return groups * 2 * fanout; }
  std::int64_t total_messages() const {
    return static_cast<std::int64_t>(groups) * fanout * fanout * msgs;
  }

  friend bool operator==(const WorkloadSpec&, const WorkloadSpec&) = default;
};

enum class TaskStatus { Runnable, Running, Blocked, Done };

inline const char* to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::Runnable: return "Runnable";
    case TaskStatus::Running: return "Running";
    case TaskStatus::Blocked: return "Blocked";
    case TaskStatus::Done: return "Done";
  }
  return "?";
}

struct Channel {
  int sender_id = 0;
  int receiver_id = 0;
  std::deque<std::int64_t> queue;  // message sequence numbers, FIFO
  std::int64_t capacity = 1;

  bool full() const {
    return static_cast<std::int64_t>(queue.size()) >= capacity;
  }
  bool empty() const { return queue.empty(); }
};

/// One group's channels, row-major by (local sender, local receiver).
class ChannelGrid {
 public:
  ChannelGrid(std::span<Channel> cells, int fanout)
      : cells_(cells), fanout_(fanout) {}

  Channel& at(int sender, int receiver) {
    return cells_[static_cast<std::size_t>(sender * fanout_ + receiver)];
  }
  const Channel& at(int sender, int receiver) const {
    return cells_[static_cast<std::size_t>(sender * fanout_ + receiver)];
  }
  int fanout() const { return fanout_; }

 private:
  std::span<Channel> cells_;
  int fanout_;
};

struct SenderState {
  int local = 0;  // index within the group
  int next_receiver_index = 0;
  std::int64_t next_msg_index = 0;
  std::int64_t msgs = 0;

  bool done() const { return next_msg_index >= msgs; }
};

struct ReceiverState {
  int local = 0;
  int next_sender_index = 0;  // round-robin cursor
  std::int64_t received_count = 0;
  std::int64_t expected_count = 0;

  bool done() const { return received_count >= expected_count; }
};

using FsmState = std::variant<SenderState, ReceiverState>;

struct StepOutcome {
  std::int64_t consumed_ns = 0;
  TaskStatus new_status = TaskStatus::Runnable;
  // Local peer indices (receivers for a sender, senders for a receiver)
  // whose channel changed in a way that may unblock them.
  std::vector<int> notified;
  std::int64_t messages = 0;
};

namespace detail {

// The single atomic send; assumes the sender is not done and its target
// channel has room. Returns the local receiver index.
inline int send_one(SenderState& s, ChannelGrid grid) {
  const int r = s.next_receiver_index;
  Channel& ch = grid.at(s.local, r);
  ch.queue.push_back(s.next_msg_index);
  if (++s.next_receiver_index == grid.fanout()) {
    s.next_receiver_index = 0;
    ++s.next_msg_index;
  }
  return r;
}

// Index of the first non-empty channel at or after the cursor, or -1.
inline int next_ready_sender(const ReceiverState& r, const ChannelGrid& grid) {
  const int n = grid.fanout();
  for (int k = 0; k < n; ++k) {
    const int s = (r.next_sender_index + k) % n;
    if (!grid.at(s, r.local).empty()) return s;
  }
  return -1;
}

// The single atomic receive; returns the local sender index if the channel
// was full before the dequeue, -1 otherwise.
inline int recv_one(ReceiverState& r, ChannelGrid grid, int s) {
  Channel& ch = grid.at(s, r.local);
  const bool was_full = ch.full();
  ch.queue.pop_front();
  ++r.received_count;
  r.next_sender_index = (s + 1) % grid.fanout();
  return was_full ? s : -1;
}

}  // namespace detail

/// Runs a sender until its budget, a full channel, or its last message.
/// Sends are atomic: a send that does not fit in the remaining budget is not
/// started.
inline StepOutcome sender_step(SenderState& s, ChannelGrid grid,
                               std::int64_t cost_ns, std::int64_t budget_ns) {
  StepOutcome out;
  for (;;) {
    if (s.done()) {
      out.new_status = TaskStatus::Done;
      return out;
    }
    if (grid.at(s.local, s.next_receiver_index).full()) {
      out.new_status = TaskStatus::Blocked;
      return out;
    }
    if (budget_ns - out.consumed_ns < cost_ns) {
      out.new_status = TaskStatus::Runnable;
      return out;
    }
    out.notified.push_back(detail::send_one(s, grid));
    out.consumed_ns += cost_ns;
    ++out.messages;
  }
}

/// Drains a receiver's channels in round-robin sender order.
inline StepOutcome receiver_step(ReceiverState& r, ChannelGrid grid,
                                 std::int64_t cost_ns,
                                 std::int64_t budget_ns) {
  StepOutcome out;
  for (;;) {
    if (r.done()) {
      out.new_status = TaskStatus::Done;
      return out;
    }
    const int s = detail::next_ready_sender(r, grid);
    if (s < 0) {
      out.new_status = TaskStatus::Blocked;
      return out;
    }
    if (budget_ns - out.consumed_ns < cost_ns) {
      out.new_status = TaskStatus::Runnable;
      return out;
    }
    if (const int woken = detail::recv_one(r, grid, s); woken >= 0) {
      out.notified.push_back(woken);
    }
    out.consumed_ns += cost_ns;
    ++out.messages;
  }
}

/// What a task would do if dispatched right now.
struct NextAction {
  enum class Kind { Operation, Blocked, Done };
  Kind kind = Kind::Done;
  std::int64_t cost_ns = 0;
};

/// The full workload: task FSMs plus all channels.
///
/// Task ids are laid out group by group; within a group the `fanout` senders
/// come first, then the `fanout` receivers.
class Workload {
 public:
  explicit Workload(const WorkloadSpec& spec) : spec_(spec) {
    spec_.validate();
    const int f = spec_.fanout;
    fsm_.reserve(static_cast<std::size_t>(spec_.num_tasks()));
    for (int g = 0; g < spec_.groups; ++g) {
      for (int i = 0; i < f; ++i) {
        fsm_.emplace_back(SenderState{i, 0, 0, spec_.msgs});
      }
      for (int i = 0; i < f; ++i) {
        fsm_.emplace_back(ReceiverState{i, 0, 0, f * spec_.msgs});
      }
      for (int s = 0; s < f; ++s) {
        for (int r = 0; r < f; ++r) {
          Channel ch;
          ch.sender_id = task_id(g, s, true);
          ch.receiver_id = task_id(g, r, false);
          ch.capacity = spec_.channel_capacity;
          channels_.push_back(std::move(ch));
        }
      }
    }
  }

  const WorkloadSpec& spec() const { return spec_; }
  int num_tasks() const { return static_cast<int>(fsm_.size()); }
  std::size_t num_channels() const { return channels_.size(); }
  const std::vector<Channel>& channels() const { return channels_; }
  const FsmState& fsm(int task) const {
    return fsm_[static_cast<std::size_t>(task)];
  }

  int task_id(int group, int local, bool sender) const {
    return group * 2 * spec_.fanout + (sender ? 0 : spec_.fanout) + local;
  }
  int group_of(int task) const { return task / (2 * spec_.fanout); }
  bool is_sender(int task) const {
    return task % (2 * spec_.fanout) < spec_.fanout;
  }

  NextAction peek(int task) const {
    const auto grid = group_grid(group_of(task));
    const auto& state = fsm_[static_cast<std::size_t>(task)];
    if (const auto* s = std::get_if<SenderState>(&state)) {
      if (s->done()) return {NextAction::Kind::Done, 0};
      if (grid.at(s->local, s->next_receiver_index).full()) {
        return {NextAction::Kind::Blocked, 0};
      }
      return {NextAction::Kind::Operation, spec_.msg_cost_send_ns};
    }
    const auto& r = std::get<ReceiverState>(state);
    if (r.done()) return {NextAction::Kind::Done, 0};
    if (detail::next_ready_sender(r, grid) < 0) {
      return {NextAction::Kind::Blocked, 0};
    }
    return {NextAction::Kind::Operation, spec_.msg_cost_recv_ns};
  }

  /// Runs the task's callback with the given budget. Notified peers are
  /// returned as global task ids.
  StepOutcome step(int task, std::int64_t budget_ns) {
    const int g = group_of(task);
    auto grid = group_grid(g);
    auto& state = fsm_[static_cast<std::size_t>(task)];
    StepOutcome out;
    if (auto* s = std::get_if<SenderState>(&state)) {
      out = sender_step(*s, grid, spec_.msg_cost_send_ns, budget_ns);
      for (int& peer : out.notified) peer = task_id(g, peer, false);
    } else {
      out = receiver_step(std::get<ReceiverState>(state), grid,
                          spec_.msg_cost_recv_ns, budget_ns);
      for (int& peer : out.notified) peer = task_id(g, peer, true);
      delivered_ += out.messages;
    }
    return out;
  }

  /// Performs exactly one send or receive; the caller has checked peek().
  StepOutcome perform_one(int task) {
    const NextAction a = peek(task);
    if (a.kind != NextAction::Kind::Operation) {
      throw StateError("perform_one on task " + std::to_string(task) +
                       " with no pending operation");
    }
    const int g = group_of(task);
    auto grid = group_grid(g);
    auto& state = fsm_[static_cast<std::size_t>(task)];
    StepOutcome out;
    out.consumed_ns = a.cost_ns;
    out.messages = 1;
    if (auto* s = std::get_if<SenderState>(&state)) {
      out.notified.push_back(task_id(g, detail::send_one(*s, grid), false));
      out.new_status = s->done() ? TaskStatus::Done : TaskStatus::Runnable;
    } else {
      auto& r = std::get<ReceiverState>(state);
      const int from = detail::next_ready_sender(r, grid);
      if (const int woken = detail::recv_one(r, grid, from); woken >= 0) {
        out.notified.push_back(task_id(g, woken, true));
      }
      out.new_status = r.done() ? TaskStatus::Done : TaskStatus::Runnable;
      ++delivered_;
    }
    return out;
  }

  std::int64_t messages_delivered() const { return delivered_; }

  bool all_channels_empty() const {
    for (const auto& ch : channels_) {
      if (!ch.empty()) return false;
    }
    return true;
  }

 private:
  ChannelGrid group_grid(int g) const {
    const auto n = static_cast<std::size_t>(spec_.fanout * spec_.fanout);
    // The grid is a mutable view; const callers only read through it.
    auto* base = const_cast<Channel*>(channels_.data()) + n * g;
    return ChannelGrid(std::span<Channel>(base, n), spec_.fanout);
  }

  WorkloadSpec spec_;
  std::vector<FsmState> fsm_;
  std::vector<Channel> channels_;
  std::int64_t delivered_ = 0;
};

/// build_workload: validates the spec and constructs all tasks and channels.
inline Workload build_workload(const WorkloadSpec& spec) {
  return Workload(spec);
}

}  // namespace cfstune
