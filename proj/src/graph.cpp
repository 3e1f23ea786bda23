#include "ftccl/graph.hpp"

#include <algorithm>

namespace ftccl {

std::uint64_t GraphPartition::num_elements() const {
  std::uint64_t n = 0;
  for (const auto& v : local_elements) n += v.size();
  return n;
}

std::uint64_t GraphPartition::num_edges() const {
  std::uint64_t n = 0;
  for (const auto& v : local_edges) n += v.size();
  return n;
}

RankId GraphPartition::owner_of(ElementId id) const {
  auto it = owner_.find(id);
  if (it == owner_.end())
    throw InputError("owner_of: unknown element " + std::to_string(id));
  return it->second;
}

void GraphPartition::build_owner_index() {
  owner_.clear();
  owner_.reserve(num_elements());
  for (RankId r = 0; r < num_ranks; ++r)
    for (ElementId e : local_elements[r]) {
      auto [it, inserted] = owner_.emplace(e, r);
      if (!inserted)
        throw InputError("partition: element " + std::to_string(e) +
                         " owned by ranks " + std::to_string(it->second) + " and " +
                         std::to_string(r));
    }
}

void GraphPartition::validate() const {
  if (num_ranks < 1) throw InputError("partition: num_ranks must be >= 1");
  if (local_elements.size() != num_ranks || local_edges.size() != num_ranks)
    throw InputError("partition: per-rank vectors sized inconsistently");

  std::uint64_t counted = 0;
  for (const auto& v : local_elements) counted += v.size();
  if (counted != owner_.size())
    throw InputError("partition: owner index out of sync with element sets");

  std::vector<std::pair<ElementId, ElementId>> seen;
  seen.reserve(num_edges());
  for (RankId r = 0; r < num_ranks; ++r) {
    for (const auto& e : local_edges[r]) {
      if (e.a.id == e.b.id) throw InputError("partition: self edge");
      const EdgeEndpoint& hi = e.a.id > e.b.id ? e.a : e.b;
      const EdgeEndpoint& lo = e.a.id > e.b.id ? e.b : e.a;
      if (owner_of(hi.id) != r)
        throw InputError("partition: edge stored away from its larger endpoint's owner");
      if (hi.rank != owner_of(hi.id) || lo.rank != owner_of(lo.id))
        throw InputError("partition: stale endpoint owner tag");
      seen.emplace_back(lo.id, hi.id);
    }
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw InputError("partition: duplicate edge");
}

GraphPartition GraphPartition::from_assignment(
    const std::unordered_map<ElementId, RankId>& assignment,
    const std::vector<std::pair<ElementId, ElementId>>& edges, std::uint32_t num_ranks) {
  GraphPartition p;
  p.num_ranks = num_ranks;
  p.local_elements.resize(num_ranks);
  p.local_edges.resize(num_ranks);
  for (const auto& [id, rank] : assignment) {
    if (rank >= num_ranks)
      throw InputError("partition: rank " + std::to_string(rank) + " out of range");
    p.local_elements[rank].push_back(id);
  }
  for (auto& v : p.local_elements) std::sort(v.begin(), v.end());
  p.build_owner_index();

  // Deduplicate undirected edges and drop self loops.
  std::vector<std::pair<ElementId, ElementId>> unique_edges;
  unique_edges.reserve(edges.size());
  for (const auto& [u, v] : edges)
    if (u != v) unique_edges.emplace_back(std::min(u, v), std::max(u, v));
  std::sort(unique_edges.begin(), unique_edges.end());
  unique_edges.erase(std::unique(unique_edges.begin(), unique_edges.end()),
                     unique_edges.end());
  for (const auto& [lo, hi] : unique_edges) {
    GraphEdge e{{hi, p.owner_of(hi)}, {lo, p.owner_of(lo)}};
    p.local_edges[e.a.rank].push_back(e);
  }
  p.validate();
  return p;
}

GraphPartition GraphPartition::range_partitioned(
    std::vector<ElementId> ids, const std::vector<std::pair<ElementId, ElementId>>& edges,
    std::uint32_t num_ranks) {
  for (const auto& [u, v] : edges) {
    ids.push_back(u);
    ids.push_back(v);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  std::unordered_map<ElementId, RankId> assignment;
  assignment.reserve(ids.size());
  const std::uint64_t n = ids.size();
  const std::uint64_t base = num_ranks ? n / num_ranks : 0;
  const std::uint64_t extra = num_ranks ? n % num_ranks : 0;
  std::uint64_t i = 0;
  for (RankId r = 0; r < num_ranks; ++r) {
    const std::uint64_t take = base + (r < extra ? 1 : 0);
    for (std::uint64_t k = 0; k < take; ++k) assignment.emplace(ids[i++], r);
  }
  return from_assignment(assignment, edges, num_ranks);
}

}  // namespace ftccl
