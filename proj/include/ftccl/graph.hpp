#pragma once

#include <unordered_map>
#include <utility>
#include <vector>

#include "ftccl/ids.hpp"

namespace ftccl {

/// One side of an undirected edge. The owner rank travels with the edge so a
/// receiving rank never needs a global ownership table.
struct EdgeEndpoint {
  ElementId id = 0;
  RankId rank = 0;

  bool operator==(const EdgeEndpoint&) const = default;
};

/// An undirected edge, stored exactly once globally at the rank owning its
/// larger-id endpoint.
struct GraphEdge {
  EdgeEndpoint a;
  EdgeEndpoint b;

  bool operator==(const GraphEdge&) const = default;
};

/// A distributed graph: disjoint per-rank element sets covering the universe,
/// plus per-rank edge stores obeying the larger-endpoint placement rule.
struct GraphPartition {
  std::uint32_t num_ranks = 1;
  std::vector<std::vector<ElementId>> local_elements;  // per rank, sorted ascending
  std::vector<std::vector<GraphEdge>> local_edges;     // per rank

  std::uint64_t num_elements() const;
  std::uint64_t num_edges() const;

  /// The unique rank whose local_elements contains `id`; throws InputError for
  /// unknown ids.
  RankId owner_of(ElementId id) const;
  bool contains(ElementId id) const { return owner_.count(id) != 0; }

  /// Checks disjointness, edge placement, and endpoint-rank tags; throws
  /// InputError on the first violation. Builders call this automatically.
  void validate() const;

  /// Partition from an explicit id -> rank assignment.
  static GraphPartition from_assignment(
      const std::unordered_map<ElementId, RankId>& assignment,
      const std::vector<std::pair<ElementId, ElementId>>& edges, std::uint32_t num_ranks);

  /// Sorted ids split into num_ranks near-equal contiguous chunks. `ids` may
  /// omit edge endpoints; they are added automatically.
  static GraphPartition range_partitioned(
      std::vector<ElementId> ids,
      const std::vector<std::pair<ElementId, ElementId>>& edges, std::uint32_t num_ranks);

 private:
  void build_owner_index();
  std::unordered_map<ElementId, RankId> owner_;
};

inline RankId owner_of(ElementId id, const GraphPartition& partition) {
  return partition.owner_of(id);
}

}  // namespace ftccl
