#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <vector>

#include "ftccl/features.hpp"
#include "ftccl/graph.hpp"
#include "ftccl/transport.hpp"

namespace ftccl {

/// A feature's spacetime position for balancing, axes ordered (t, x, y, z).
struct FeaturePoint {
  ElementId id = 0;
  std::array<double, 4> coords{0.0, 0.0, 0.0, 0.0};
};

/// An axis-aligned spacetime box; degenerate (lo > hi) when the leaf is empty.
struct KdBox {
  std::array<double, 4> lo{0.0, 0.0, 0.0, 0.0};
  std::array<double, 4> hi{-1.0, -1.0, -1.0, -1.0};
};

struct KdAssignment {
  std::vector<KdBox> boxes;            // per rank, covering that rank's points
  std::vector<std::uint64_t> counts;   // per rank
  std::unordered_map<ElementId, RankId> assignment;
};

/// Recursive median splits along the widest axis of each box (ties broken in
/// t, x, y, z order), with exact order-statistic medians keyed by (coordinate,
/// id) so leaf populations differ by at most one for power-of-two rank counts.
KdAssignment kd_partition(const std::vector<FeaturePoint>& points, std::uint32_t num_ranks,
                          std::size_t axes = 4);

/// Per-rank feature and edge stores flowing through the balancing exchange.
struct RankFeatureSet {
  std::vector<FeatureRecord> features;
  std::vector<GraphEdge> edges;
};

/// Moves every feature to its assigned rank and re-homes each edge to the new
/// owner of its larger endpoint, refreshing endpoint owner tags. The exchange
/// runs over the simulated transport; feature and edge multisets are conserved.
std::pair<std::vector<RankFeatureSet>, RunMetrics> repartition(
    const std::vector<RankFeatureSet>& states, const KdAssignment& assignment,
    std::uint64_t seed);

/// The `auto` policy: balance when max/mean per-rank feature count exceeds 2.
bool should_balance(const std::vector<std::uint64_t>& per_rank_counts);

/// Diagnostic dump of per-rank boxes and counts.
std::string assignment_to_json(const KdAssignment& a);

}  // namespace ftccl
