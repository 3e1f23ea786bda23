#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "ftccl/errors.hpp"
#include "ftccl/ids.hpp"

namespace ftccl {

enum class Mode : std::uint8_t { Sync = 0, Async = 1 };

inline std::string to_string(Mode m) { return m == Mode::Sync ? "sync" : "async"; }

/// Fully determines a simulated execution: same seed + same inputs give an
/// identical delivery order and trace.
struct Schedule {
  std::uint64_t seed = 0;
  Mode mode = Mode::Async;
  /// Async progress guarantee: a message is delivered at most this many
  /// scheduler sweeps after it was sent.
  std::uint32_t max_delay = 3;
};

template <class Payload>
struct Envelope {
  RankId src = 0;
  RankId dst = 0;
  std::uint64_t seq = 0;  // strictly increasing per (src, dst) pair
  Payload payload;
};

/// Global sent/received counters plus per-rank idle flags; quiescence holds
/// when the sums match and every rank is idle.
struct QuiescenceState {
  std::vector<std::uint64_t> sent;
  std::vector<std::uint64_t> received;
  std::vector<std::uint8_t> idle;

  bool operator==(const QuiescenceState&) const = default;

  bool counters_match() const {
    return std::accumulate(sent.begin(), sent.end(), std::uint64_t{0}) ==
           std::accumulate(received.begin(), received.end(), std::uint64_t{0});
  }
  bool all_idle() const {
    return std::all_of(idle.begin(), idle.end(), [](std::uint8_t f) { return f != 0; });
  }
  bool quiescent() const { return counters_match() && all_idle(); }
};

/// Centralized double-count termination: two consecutive matching quiescent
/// snapshots are required, so no in-flight message can be missed. feed()
/// returns true once the confirmation pass observes the same counts.
class TerminationDetector {
 public:
  bool feed(const QuiescenceState& q) {
    if (!q.quiescent()) {
      has_candidate_ = false;
      return false;
    }
    if (has_candidate_ && candidate_ == q) return true;
    candidate_ = q;
    has_candidate_ = true;
    return false;
  }
  void reset() { has_candidate_ = false; }

 private:
  QuiescenceState candidate_;
  bool has_candidate_ = false;
};

/// One-shot form: terminated iff the confirmation snapshot repeats a
/// quiescent observation exactly.
inline bool detect_termination(const QuiescenceState& first,
                               const QuiescenceState& confirmation) {
  return first.quiescent() && first == confirmation;
}

/// In-process message transport with barrier-synchronized and fully
/// asynchronous modes. Deliveries are exactly-once and FIFO per (src, dst)
/// pair; in async mode the delivery schedule is a seeded pseudo-random
/// bounded-delay interleaving, so runs replay identically for a fixed seed.
template <class Payload>
class SimTransport {
 public:
  SimTransport(std::uint32_t num_ranks, Schedule schedule)
      : num_ranks_(num_ranks),
        schedule_(schedule),
        rng_(schedule.seed ^ 0x9e3779b97f4a7c15ull),
        inboxes_(num_ranks),
        pending_(static_cast<std::size_t>(num_ranks) * num_ranks),
        next_seq_(static_cast<std::size_t>(num_ranks) * num_ranks, 0),
        sent_per_rank_(num_ranks, 0),
        delivered_per_rank_(num_ranks, 0) {}

  std::uint32_t num_ranks() const { return num_ranks_; }
  Mode mode() const { return schedule_.mode; }

  void send(RankId src, RankId dst, Payload payload) {
    if (dst >= num_ranks_ || src >= num_ranks_)
      throw InputError("send: rank out of range");
    if (terminated_) throw ProtocolError("send after global termination");
    Envelope<Payload> env{src, dst, next_seq_[pair_index(src, dst)]++, std::move(payload)};
    pending_[pair_index(src, dst)].push_back(InFlight{std::move(env), sweep_});
    ++sent_per_rank_[src];
    ++total_sent_;
  }

  /// All currently delivered, not-yet-consumed messages for `rank`, in
  /// delivery order. In sync mode only messages sent before the last barrier
  /// are visible.
  std::vector<Envelope<Payload>> drain(RankId rank) {
    if (rank >= num_ranks_) throw InputError("drain: rank out of range");
    std::vector<Envelope<Payload>> out;
    out.swap(inboxes_[rank]);
    return out;
  }

  /// Sync mode only: delivers every in-flight message and returns the OR of
  /// the per-rank change flags (true as well whenever anything was delivered,
  /// since an undelivered message can still cause a change).
  bool barrier(const std::vector<bool>& rank_changed) {
    if (schedule_.mode != Mode::Sync)
      throw ProtocolError("barrier called in async mode");
    bool delivered_any = false;
    for (RankId src = 0; src < num_ranks_; ++src)
      for (RankId dst = 0; dst < num_ranks_; ++dst) {
        auto& q = pending_[pair_index(src, dst)];
        while (!q.empty()) {
          deliver(std::move(q.front().env));
          q.pop_front();
          delivered_any = true;
        }
      }
    ++barriers_;
    const bool changed =
        std::any_of(rank_changed.begin(), rank_changed.end(), [](bool b) { return b; });
    return changed || delivered_any;
  }

  /// Async mode: moves a seeded-random prefix of every queue addressed to
  /// `rank` into its inbox; messages older than max_delay sweeps are forced
  /// through so progress is guaranteed.
  void deliver_for(RankId rank) {
    if (schedule_.mode != Mode::Async)
      throw ProtocolError("deliver_for called in sync mode");
    for (RankId src = 0; src < num_ranks_; ++src) {
      auto& q = pending_[pair_index(src, rank)];
      if (q.empty()) continue;
      // Random prefix length, biased towards full delivery.
      std::size_t n = q.size();
      std::size_t take = (rng_() % 4 == 0) ? rng_() % (n + 1) : n;
      while (take < n && q[take].sent_sweep + schedule_.max_delay <= sweep_) ++take;
      for (std::size_t i = 0; i < take; ++i) {
        deliver(std::move(q.front().env));
        q.pop_front();
      }
    }
  }

  bool has_pending_for(RankId rank) const {
    for (RankId src = 0; src < num_ranks_; ++src)
      if (!pending_[pair_index(src, rank)].empty()) return true;
    return false;
  }

  void begin_sweep() { ++sweep_; }

  bool fully_drained() const {
    if (total_sent_ != total_delivered_) return false;
    for (const auto& box : inboxes_)
      if (!box.empty()) return false;
    return true;
  }

  void mark_terminated() { terminated_ = true; }

  std::uint64_t total_sent() const { return total_sent_; }
  std::uint64_t total_delivered() const { return total_delivered_; }
  std::uint64_t sent_by(RankId r) const { return sent_per_rank_[r]; }
  std::uint64_t delivered_to(RankId r) const { return delivered_per_rank_[r]; }
  std::uint32_t barriers() const { return barriers_; }

  void set_delivery_cap(std::uint64_t cap) { delivery_cap_ = cap; }

  /// Deterministic helper for schedule decisions outside the transport.
  std::uint64_t rng() { return rng_(); }

 private:
  struct InFlight {
    Envelope<Payload> env;
    std::uint64_t sent_sweep;
  };

  std::size_t pair_index(RankId src, RankId dst) const {
    return static_cast<std::size_t>(src) * num_ranks_ + dst;
  }

  void deliver(Envelope<Payload>&& env) {
    ++total_delivered_;
    ++delivered_per_rank_[env.dst];
    if (delivery_cap_ && total_delivered_ > delivery_cap_)
      throw LivelockError("delivered message cap exceeded (" +
                          std::to_string(delivery_cap_) + "); sent=" +
                          std::to_string(total_sent_) +
                          " delivered=" + std::to_string(total_delivered_));
    inboxes_[env.dst].push_back(std::move(env));
  }

  std::uint32_t num_ranks_;
  Schedule schedule_;
  std::mt19937_64 rng_;
  std::vector<std::vector<Envelope<Payload>>> inboxes_;
  std::vector<std::deque<InFlight>> pending_;  // per (src, dst) pair
  std::vector<std::uint64_t> next_seq_;
  std::vector<std::uint64_t> sent_per_rank_;
  std::vector<std::uint64_t> delivered_per_rank_;
  std::uint64_t total_sent_ = 0;
  std::uint64_t total_delivered_ = 0;
  std::uint64_t delivery_cap_ = 0;
  std::uint64_t sweep_ = 0;
  std::uint32_t barriers_ = 0;
  bool terminated_ = false;
};

struct RankMetrics {
  std::uint64_t rounds = 0;
  std::uint64_t msgs_sent = 0;
  std::uint64_t msgs_received = 0;
  std::uint64_t busy_time_ns = 0;
  std::uint64_t idle_time_ns = 0;
};

struct RunMetrics {
  std::vector<RankMetrics> per_rank;
  std::uint32_t barriers = 0;
  std::uint64_t total_sent = 0;
  std::uint64_t total_delivered = 0;
  bool terminated = false;
};

template <class Payload>
struct StepOutput {
  std::vector<std::pair<RankId, Payload>> out;
  bool changed = false;
};

struct RunOptions {
  /// Abort with LivelockError once more than this many messages have been
  /// delivered; 0 disables the guard.
  std::uint64_t msg_cap = 0;
  /// Sync mode only: called after every barrier with the round number; used
  /// by tests to audit cross-round invariants.
  std::function<void(std::uint32_t)> on_barrier;
};

/// Executes one step function per rank against a deterministic simulated
/// transport until global termination. States are confined to their rank;
/// the step function must be deterministic given (state, drained messages).
template <class State, class Payload, class StepFn>
RunMetrics run_ranks(std::vector<State>& states, StepFn&& step, SimTransport<Payload>& transport,
                     const Schedule& schedule, const RunOptions& options = {}) {
  const auto num_ranks = transport.num_ranks();
  if (states.size() != num_ranks) throw InputError("run_ranks: one state per rank required");
  if (options.msg_cap) transport.set_delivery_cap(options.msg_cap);

  RunMetrics metrics;
  metrics.per_rank.resize(num_ranks);

  using Clock = std::chrono::steady_clock;
  auto run_step = [&](RankId r, std::vector<Envelope<Payload>>&& inbox) {
    auto& m = metrics.per_rank[r];
    m.msgs_received += inbox.size();
    std::vector<Payload> payloads;
    payloads.reserve(inbox.size());
    for (auto& env : inbox) payloads.push_back(std::move(env.payload));
    const auto t0 = Clock::now();
    StepOutput<Payload> out = step(r, states[r], std::move(payloads));
    m.busy_time_ns += static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count());
    ++m.rounds;
    m.msgs_sent += out.out.size();
    for (auto& [dst, payload] : out.out) transport.send(r, dst, std::move(payload));
    return out.changed;
  };

  if (schedule.mode == Mode::Sync) {
    std::vector<bool> changed(num_ranks, false);
    std::vector<std::uint64_t> round_busy(num_ranks, 0);
    for (std::uint32_t round = 0;; ++round) {
      for (RankId r = 0; r < num_ranks; ++r) {
        const auto before = metrics.per_rank[r].busy_time_ns;
        changed[r] = run_step(r, transport.drain(r));
        round_busy[r] = metrics.per_rank[r].busy_time_ns - before;
      }
      // Idle time models waiting for the round's slowest rank.
      const auto slowest = *std::max_element(round_busy.begin(), round_busy.end());
      for (RankId r = 0; r < num_ranks; ++r)
        metrics.per_rank[r].idle_time_ns += slowest - round_busy[r];
      const bool global_change = transport.barrier(changed);
      if (options.on_barrier) options.on_barrier(round);
      if (!global_change) break;
    }
  } else {
    std::vector<RankId> order(num_ranks);
    std::iota(order.begin(), order.end(), RankId{0});
    QuiescenceState q{std::vector<std::uint64_t>(num_ranks, 0),
                      std::vector<std::uint64_t>(num_ranks, 0),
                      std::vector<std::uint8_t>(num_ranks, 0)};
    for (;;) {
      transport.begin_sweep();
      // Seeded shuffle of the stepping order for this sweep.
      for (std::uint32_t i = num_ranks; i > 1; --i)
        std::swap(order[i - 1], order[transport.rng() % i]);
      for (RankId r : order) {
        // A rank that reported idle stays parked until a message heads its way.
        if (q.idle[r] && !transport.has_pending_for(r)) continue;
        transport.deliver_for(r);
        const auto sent_before = metrics.per_rank[r].msgs_sent;
        const bool changed = run_step(r, transport.drain(r));
        const bool sent = metrics.per_rank[r].msgs_sent != sent_before;
        q.received[r] = metrics.per_rank[r].msgs_received;
        q.sent[r] = transport.sent_by(r);
        q.idle[r] = (!changed && !sent) ? 1 : 0;
      }
      // Double-count termination: the quiescent snapshot must be observed
      // again by a confirmation read of the same counters.
      if (q.quiescent() && transport.fully_drained()) {
        QuiescenceState confirmation = q;
        confirmation.received.assign(q.received.begin(), q.received.end());
        for (RankId r = 0; r < num_ranks; ++r) confirmation.sent[r] = transport.sent_by(r);
        if (detect_termination(q, confirmation)) break;
      }
    }
  }

  transport.mark_terminated();
  metrics.barriers = transport.barriers();
  metrics.total_sent = transport.total_sent();
  metrics.total_delivered = transport.total_delivered();
  metrics.terminated = true;
  return metrics;
}

}  // namespace ftccl
