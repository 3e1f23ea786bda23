#include "ftccl/trajectory.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <json.hpp>

namespace ftccl {

namespace {

struct GatherItem {
  ElementId root;
  FeatureRecord record;
  RankId source;
};

using GatherBatch = std::vector<GatherItem>;

}  // namespace

std::pair<std::vector<std::vector<ComponentBundle>>, RunMetrics> gather_by_root(
    const std::vector<RankState>& finalized,
    const std::vector<std::vector<FeatureRecord>>& features, std::uint64_t seed) {
  const auto num_ranks = static_cast<std::uint32_t>(finalized.size());
  if (features.size() != num_ranks)
    throw InputError("gather_by_root: one feature list per rank required");

  std::vector<std::map<ElementId, ComponentBundle>> gathered(num_ranks);

  auto ingest = [&](RankId rank, const GatherItem& item) {
    const auto& state = finalized[rank];
    if (!state.is_local(item.root) || state.parent_of(item.root) != item.root)
      throw ProtocolError("gather: feature " + std::to_string(item.record.id) +
                          " arrived for unknown root " + std::to_string(item.root));
    auto& bundle = gathered[rank][item.root];
    bundle.root = item.root;
    bundle.members.emplace_back(item.record, item.source);
  };

  auto step = [&](RankId rank, int& phase, std::vector<GatherBatch>&& inbox) {
    StepOutput<GatherBatch> out;
    for (const auto& batch : inbox) {
      for (const auto& item : batch) ingest(rank, item);
      out.changed = true;
    }
    if (phase == 0) {
      phase = 1;
      const auto& state = finalized[rank];
      std::map<RankId, GatherBatch> outgoing;
      for (const auto& f : features[rank]) {
        const ElementId root = state.parent_of(f.id);
        const RankId dst = state.parent_rank_of(f.id);
        const GatherItem item{root, f, rank};
        if (dst == rank)
          ingest(rank, item);
        else
          outgoing[dst].push_back(item);
      }
      for (auto& [dst, batch] : outgoing) out.out.emplace_back(dst, std::move(batch));
      out.changed = true;
    }
    return out;
  };

  std::vector<int> phases(num_ranks, 0);
  Schedule schedule{seed, Mode::Async, 3};
  SimTransport<GatherBatch> transport(num_ranks, schedule);
  RunMetrics metrics = run_ranks(phases, step, transport, schedule);

  std::vector<std::vector<ComponentBundle>> bundles(num_ranks);
  for (RankId r = 0; r < num_ranks; ++r)
    for (auto& [root, bundle] : gathered[r]) bundles[r].push_back(std::move(bundle));
  return {std::move(bundles), std::move(metrics)};
}

Trajectory assemble(const ComponentBundle& bundle, FeatureKind kind) {
  Trajectory traj;
  traj.component_id = bundle.root;
  traj.kind = kind;
  traj.records.reserve(bundle.members.size());
  for (const auto& [record, src] : bundle.members) traj.records.push_back(record);
  if (kind == FeatureKind::Critical) {
    std::sort(traj.records.begin(), traj.records.end(),
              [](const FeatureRecord& a, const FeatureRecord& b) {
                if (a.time != b.time) return a.time < b.time;
                return a.id < b.id;
              });
  } else {
    std::sort(traj.records.begin(), traj.records.end(),
              [](const FeatureRecord& a, const FeatureRecord& b) { return a.id < b.id; });
  }
  return traj;
}

namespace {

nlohmann::json record_to_json(const FeatureRecord& r, std::size_t spatial_axes) {
  nlohmann::json j;
  j["id"] = r.id;
  j["t"] = r.time;
  auto coords = nlohmann::json::array();
  for (std::size_t a = 0; a < spatial_axes; ++a) coords.push_back(r.coords[a]);
  j["coords"] = std::move(coords);
  j["value"] = r.value;
  if (r.kind == FeatureKind::Critical) j["type"] = to_string(r.cp_kind);
  return j;
}

std::string fmt(double v) { return nlohmann::json(v).dump(); }

}  // namespace

void write_output(const std::vector<Trajectory>& trajectories, const std::string& path,
                  const std::string& format) {
  if (format != "jsonl" && format != "csv")
    throw InputError("write_output: format must be jsonl or csv");

  std::vector<const Trajectory*> ordered;
  ordered.reserve(trajectories.size());
  for (const auto& t : trajectories) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(),
            [](const Trajectory* a, const Trajectory* b) {
              return a->component_id < b->component_id;
            });

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);

  if (format == "jsonl") {
    for (const Trajectory* t : ordered) {
      // Level-set records carry up to 3 spatial coords, critical points 2.
      const std::size_t axes = t->kind == FeatureKind::Critical ? 2 : 3;
      nlohmann::json j;
      j["component_id"] = t->component_id;
      j["kind"] = to_string(t->kind);
      auto records = nlohmann::json::array();
      for (const auto& r : t->records) records.push_back(record_to_json(r, axes));
      j["records"] = std::move(records);
      out << j.dump() << '\n';
    }
  } else {
    out << "component_id,kind,id,t,x,y,z,value,type\n";
    for (const Trajectory* t : ordered)
      for (const auto& r : t->records) {
        out << t->component_id << ',' << to_string(t->kind) << ',' << r.id << ','
            << fmt(r.time) << ',' << fmt(r.coords[0]) << ',' << fmt(r.coords[1]) << ','
            << fmt(r.coords[2]) << ',' << fmt(r.value) << ','
            << (r.kind == FeatureKind::Critical ? to_string(r.cp_kind) : std::string())
            << '\n';
      }
  }
  if (!out) throw IoError("failed writing " + path);
}

std::string component_summary_json(const std::vector<Trajectory>& trajectories) {
  std::map<std::size_t, std::uint64_t> histogram;
  for (const auto& t : trajectories) ++histogram[t.records.size()];
  nlohmann::json j;
  j["n_components"] = trajectories.size();
  auto& sizes = j["sizes_histogram"] = nlohmann::json::object();
  for (const auto& [size, count] : histogram) sizes[std::to_string(size)] = count;
  return j.dump(2);
}

}  // namespace ftccl
