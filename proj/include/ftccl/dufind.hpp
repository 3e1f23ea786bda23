#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ftccl/graph.hpp"
#include "ftccl/messages.hpp"
#include "ftccl/transport.hpp"

namespace ftccl {

/// Classification of a local element at the start of an update pass.
enum class ElementClass : std::uint8_t { TemporaryRoot, Hub, Ordinary };

/// Outgoing protocol messages collected by the update rules.
struct Outbox {
  std::vector<std::pair<RankId, Message>> msgs;

  void send(RankId dst, Message m) { msgs.emplace_back(dst, std::move(m)); }
};

/// One rank's union-find forest plus the protocol bookkeeping around it.
///
/// Core invariants:
///  - parent(e) <= e for every local e; parent(e) == e iff e is a temporary
///    root, so the forest is structurally acyclic.
///  - set_root and set_nonroot are disjoint; set_nonroot wins permanently.
///  - A hub has at most one outstanding grandparent query.
///  - Every stored edge points downward: the stored other-endpoint id is
///    smaller than the (local) key element.
struct RankState {
  RankId rank = 0;

  std::vector<ElementId> local_ids;  // sorted ascending
  std::unordered_map<ElementId, std::uint32_t> index;

  // Indexed by position in local_ids.
  std::vector<ElementId> parent;
  std::vector<RankId> parent_rank;  // == rank while the parent is local
  std::vector<std::unordered_map<ElementId, RankId>> edges;
  std::vector<std::uint8_t> pending_query;
  std::vector<std::uint8_t> blocked_flag;

  // Local hubs waiting on a remote temporary root, keyed by that root.
  std::unordered_map<ElementId, std::vector<ElementId>> blocked_on_root;
  // Ranks whose hubs were told "this local element is a root".
  std::unordered_map<ElementId, std::set<RankId>> root_subscribers;
  // Ranks this rank told "element is a temporary root" in a reply flag.
  std::unordered_map<ElementId, std::set<RankId>> forwarded_root_info;
  // Remote elements believed to be temporary roots / known to be non-roots.
  std::unordered_set<ElementId> set_root;
  std::unordered_set<ElementId> set_nonroot;

  bool changed = false;

  bool is_local(ElementId e) const { return index.count(e) != 0; }
  std::uint32_t idx(ElementId e) const;
  ElementId parent_of(ElementId e) const { return parent[idx(e)]; }
  RankId parent_rank_of(ElementId e) const { return parent_rank[idx(e)]; }
  bool parent_is_local(std::uint32_t i) const { return parent_rank[i] == rank; }
  std::uint64_t stored_edge_count() const;

  void mark_changed() { changed = true; }
};

/// Initializes a rank: every local element its own parent, edges loaded under
/// their (local, larger) endpoint with remote owner ranks recorded.
RankState init_rank(RankId rank, std::vector<ElementId> elements,
                    const std::vector<GraphEdge>& edges);

ElementClass classify(const RankState& state, ElementId e);

/// Path halving for ordinary elements: re-aim at the grandparent when it is
/// local; leave hubs' children untouched.
void update_ordinary(RankState& state);

/// Sends one grandparent query for `hub` unless one is already outstanding or
/// the hub was told to wait for a root-status notification.
void update_hub(RankState& state, ElementId hub, Outbox& out);
void update_hubs(RankState& state, Outbox& out);

void answer_query(RankState& state, const GrandparentQuery& q, Outbox& out);
void apply_reply(RankState& state, const ReplyIsRoot& r);
void apply_reply(RankState& state, const ReplyGrandparent& r);

/// Unites a temporary root with its smallest smaller neighbor (local
/// neighbors preferred) and notifies subscribed ranks it is no longer a root.
void update_root(RankState& state, ElementId root, Outbox& out);
void update_roots(RankState& state, Outbox& out);

void apply_no_longer_root(RankState& state, const NoLongerRoot& n, Outbox& out);

/// Stores a transferred edge under its larger (local) endpoint, discarding
/// duplicates and self edges.
void ingest_edge(RankState& state, const EdgeTransfer& e);

/// Moves edges one level up the forest: fires for hubs whose parent is a
/// known temporary root, for elements whose parent is a local temporary root,
/// and for ordinary elements whose parent is a local hub. Rewritten edges are
/// routed to the owner of their larger endpoint; local routing bypasses the
/// transport.
void transfer_edges(RankState& state, Outbox& out);

/// One full engine round: ingest drained messages, then ordinary / hub / root
/// updates and edge transfer. Returns outgoing messages plus the change flag.
StepOutput<Message> rank_round(RankState& state, std::vector<Message>&& inbox);

/// Post-termination local rewiring: children of local hubs point directly at
/// the root. Throws ProtocolError if any element sits more than two hops from
/// its root, which a terminated run cannot produce.
void finalize(RankState& state);

/// Single-memory ground truth: every element mapped to the minimum id of its
/// connected component.
std::unordered_map<ElementId, ElementId> sequential_oracle(
    const std::vector<std::pair<ElementId, ElementId>>& edges,
    const std::vector<ElementId>& elements = {});

/// Labels from finalized per-rank states, id -> root.
std::map<ElementId, ElementId> collect_labels(const std::vector<RankState>& states);

/// Pre-finalize audit: ids of elements that cannot reach their root within
/// two hops across the whole forest. Empty on a correctly terminated run.
std::vector<ElementId> three_layer_violations(const std::vector<RankState>& states);

}  // namespace ftccl
