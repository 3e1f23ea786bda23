#include "ftccl/ccl.hpp"

namespace ftccl {

CclRun run_ccl(const GraphPartition& partition, const Schedule& schedule,
               std::uint64_t msg_cap, const CclObserver& observer) {
  const auto num_ranks = partition.num_ranks;
  std::vector<RankState> states;
  states.reserve(num_ranks);
  for (RankId r = 0; r < num_ranks; ++r)
    states.push_back(init_rank(r, partition.local_elements[r], partition.local_edges[r]));

  SimTransport<Message> transport(num_ranks, schedule);
  RunOptions options;
  options.msg_cap = msg_cap;
  if (observer)
    options.on_barrier = [&](std::uint32_t round) { observer(round, states, transport); };

  auto step = [](RankId, RankState& state, std::vector<Message>&& inbox) {
    return rank_round(state, std::move(inbox));
  };
  RunMetrics metrics = run_ranks(states, step, transport, schedule, options);

  // Termination audit: replaying any rank on an empty inbox must be a no-op.
  for (auto& s : states) {
    auto out = rank_round(s, {});
    if (out.changed || !out.out.empty())
      throw ProtocolError("termination audit failed: rank " + std::to_string(s.rank) +
                          " still had work after termination");
  }
  if (!transport.fully_drained())
    throw ProtocolError("termination audit failed: undelivered messages remain");

  if (auto bad = three_layer_violations(states); !bad.empty())
    throw ProtocolError("three-layer audit failed: element " + std::to_string(bad.front()) +
                        " is more than two hops from its root");

  for (auto& s : states) finalize(s);
  return CclRun{std::move(states), std::move(metrics)};
}

std::map<ElementId, ElementId> ccl_labels(const GraphPartition& partition,
                                          const Schedule& schedule, std::uint64_t msg_cap) {
  return collect_labels(run_ccl(partition, schedule, msg_cap).states);
}

}  // namespace ftccl
