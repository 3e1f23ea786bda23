#pragma once

#include <map>
#include <string>

#include "ftccl/graph.hpp"
#include "ftccl/messages.hpp"
#include "ftccl/transport.hpp"

namespace ftccl {

/// Socket frame kinds. Every frame is a 4-byte little-endian length prefix
/// followed by the payload; payload byte 0 is the kind, protocol messages use
/// the dufind wire encoding.
enum class FrameKind : std::uint8_t {
  Hello = 1,       // worker -> coord: rank
  Init = 2,        // coord -> worker: mode + local elements and edges
  Msg = 3,         // either way: src, dst, encoded engine message
  Status = 4,      // worker -> coord: processed count, idle flag, confirm id
  Confirm = 5,     // coord -> worker: request a fresh Status
  RoundDone = 6,   // worker -> coord (sync): local change flag
  BarrierGo = 7,   // coord -> worker (sync): continue flag
  Terminate = 8,   // coord -> worker (async)
  Result = 9,      // worker -> coord: pre-finalize parents + counters
};

/// Appends one length-prefixed frame.
void append_frame(std::vector<std::byte>& out, std::span<const std::byte> payload);

struct SocketCclResult {
  std::map<ElementId, ElementId> labels;  // finalized
  RunMetrics metrics;
};

/// Runs distributed CCL across `num_ranks` worker processes connected over
/// local sockets. The coordinator (this process) launches `exe_path _worker`
/// children, routes engine messages, detects termination with the double-count
/// handshake, audits the three-layer property, and resolves final labels.
SocketCclResult run_ccl_sockets(const GraphPartition& partition, Mode mode,
                                const std::string& exe_path);

/// Worker-process entry point: connects to the coordinator, runs the engine
/// loop for one rank, and reports results. Returns a process exit code.
int socket_worker_main(std::uint16_t port, RankId rank);

}  // namespace ftccl
