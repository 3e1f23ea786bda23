#pragma once

#include <string>
#include <vector>

#include "ftccl/dufind.hpp"
#include "ftccl/features.hpp"
#include "ftccl/transport.hpp"

namespace ftccl {

/// All features of one connected component, gathered at the rank owning the
/// component's root (the minimum member id).
struct ComponentBundle {
  ElementId root = 0;
  std::vector<std::pair<FeatureRecord, RankId>> members;  // feature + source rank
};

struct Trajectory {
  ElementId component_id = 0;
  FeatureKind kind = FeatureKind::LevelSet;
  std::vector<FeatureRecord> records;
};

/// Routes every feature to the rank owning its finalized root (one pass over
/// the transport) and returns per-rank bundles plus the pass metrics. Throws
/// ProtocolError when a feature's parent is not a known root.
std::pair<std::vector<std::vector<ComponentBundle>>, RunMetrics> gather_by_root(
    const std::vector<RankState>& finalized,
    const std::vector<std::vector<FeatureRecord>>& features, std::uint64_t seed);

/// Time-ordered records for critical points (sorted by time, then id);
/// id-ordered records for level sets.
Trajectory assemble(const ComponentBundle& bundle, FeatureKind kind);

/// jsonl: one object per trajectory {component_id, kind, records}; csv: one
/// row per record with a component_id column. Trajectories are written in
/// component_id order and records in assembled order, so files are byte-stable
/// across schedules, seeds, and rank counts.
void write_output(const std::vector<Trajectory>& trajectories, const std::string& path,
                  const std::string& format);

/// {n_components, sizes histogram} quick-check document.
std::string component_summary_json(const std::vector<Trajectory>& trajectories);

}  // namespace ftccl
