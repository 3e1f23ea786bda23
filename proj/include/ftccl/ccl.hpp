#pragma once

#include <functional>
#include <map>

#include "ftccl/dufind.hpp"
#include "ftccl/graph.hpp"
#include "ftccl/transport.hpp"

namespace ftccl {

/// Called after every sync-mode barrier with the round number, the per-rank
/// states, and the transport (for in-flight inspection). Test hook.
using CclObserver =
    std::function<void(std::uint32_t, const std::vector<RankState>&, const SimTransport<Message>&)>;

struct CclRun {
  std::vector<RankState> states;  // finalized
  RunMetrics metrics;
};

/// Runs distributed connected-component labeling over a partitioned graph to
/// termination, audits the result (post-termination replay and the three-layer
/// property), finalizes every rank, and returns the states. Throws
/// ProtocolError if an audit fails and LivelockError if msg_cap is exceeded.
CclRun run_ccl(const GraphPartition& partition, const Schedule& schedule,
               std::uint64_t msg_cap = 0, const CclObserver& observer = {});

/// Convenience wrapper: finalized labels, element -> component root.
std::map<ElementId, ElementId> ccl_labels(const GraphPartition& partition,
                                          const Schedule& schedule,
                                          std::uint64_t msg_cap = 0);

}  // namespace ftccl
