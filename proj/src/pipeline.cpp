#include "ftccl/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

namespace ftccl {

namespace {

class StageTimer {
 public:
  template <class Fn>
  auto time(const std::string& name, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record(name, t0);
    } else {
      auto result = fn();
      record(name, t0);
      return result;
    }
  }

  nlohmann::json to_json() const {
    auto stages = nlohmann::json::array();
    for (const auto& [name, seconds] : stages_)
      stages.push_back({{"name", name}, {"seconds", seconds}});
    return stages;
  }

 private:
  void record(const std::string& name, std::chrono::steady_clock::time_point t0) {
    stages_.emplace_back(
        name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::vector<std::pair<std::string, double>> stages_;
};

nlohmann::json metrics_to_json(const RunMetrics& m) {
  nlohmann::json j;
  auto& per_rank = j["per_rank"] = nlohmann::json::array();
  RankMetrics totals;
  for (std::size_t r = 0; r < m.per_rank.size(); ++r) {
    const auto& rm = m.per_rank[r];
    per_rank.push_back({{"rank", r},
                        {"rounds", rm.rounds},
                        {"msgs_sent", rm.msgs_sent},
                        {"msgs_received", rm.msgs_received},
                        {"busy_time_ns", rm.busy_time_ns},
                        {"idle_time_ns", rm.idle_time_ns}});
    totals.rounds += rm.rounds;
    totals.msgs_sent += rm.msgs_sent;
    totals.msgs_received += rm.msgs_received;
    totals.busy_time_ns += rm.busy_time_ns;
    totals.idle_time_ns += rm.idle_time_ns;
  }
  j["totals"] = {{"rounds", totals.rounds},
                 {"msgs_sent", totals.msgs_sent},
                 {"msgs_received", totals.msgs_received},
                 {"busy_time_ns", totals.busy_time_ns},
                 {"idle_time_ns", totals.idle_time_ns}};
  j["barriers"] = m.barriers;
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

nlohmann::json base_metrics(const char* command, const RunConfig& config) {
  nlohmann::json doc;
  doc["metrics_version"] = 1;
  doc["command"] = command;
  doc["mode"] = to_string(config.mode);
  doc["num_ranks"] = config.num_ranks;
  doc["seed"] = config.seed;
  return doc;
}

FeatureRecord to_record(const CriticalPoint& cp) {
  FeatureRecord r;
  r.id = cp.face_id;
  r.kind = FeatureKind::Critical;
  r.cp_kind = cp.kind;
  r.time = cp.position[2];
  r.coords = {cp.position[0], cp.position[1], 0.0};
  r.value = cp.scalar;
  return r;
}

FeatureRecord to_record(const LevelSetVertex& v, const Dims& dims) {
  const GridPoint p = decode_vertex_id(v.vertex_id, dims);
  FeatureRecord r;
  r.id = v.vertex_id;
  r.kind = FeatureKind::LevelSet;
  r.time = p.t;
  r.coords = {static_cast<double>(p.x), static_cast<double>(p.y),
              dims.spatial_nd() == 3 ? static_cast<double>(p.z) : 0.0};
  r.value = v.value;
  return r;
}

FeaturePoint to_point(const FeatureRecord& r) {
  return FeaturePoint{r.id, {r.time, r.coords[0], r.coords[1], r.coords[2]}};
}

}  // namespace

std::uint64_t default_msg_cap(std::uint64_t elements, std::uint64_t edges) {
  return 10'000 + 50 * (elements + edges);
}

TrackResult cmd_track(const RunConfig& config) {
  if (config.kind == FeatureKind::LevelSet && !config.threshold)
    throw InputError("track: level-set runs require a threshold");
  if (config.kind == FeatureKind::Critical && config.threshold)
    throw InputError("track: threshold applies to level-set runs only");

  StageTimer timer;
  nlohmann::json doc = base_metrics("track", config);
  doc["kind"] = to_string(config.kind);
  if (config.threshold) doc["threshold"] = *config.threshold;

  const Volume vol = timer.time("read_volume", [&] { return read_volume(config.input); });
  if (config.kind == FeatureKind::Critical && vol.dims.spatial_nd() != 2)
    throw InputError("track: critical point tracking supports 2D+time volumes only");

  const auto blocks =
      timer.time("decompose", [&] { return decompose(vol.dims, config.num_ranks); });

  // Feature detection, embarrassingly parallel per block; each rank keeps the
  // features whose owner cell lies in its core but detects over its whole
  // ghosted block so cross-rank adjacencies are visible locally.
  std::vector<std::vector<FeatureRecord>> owned(config.num_ranks);
  std::vector<std::vector<CriticalPoint>> detected(config.num_ranks);
  std::vector<std::vector<GraphEdge>> kept_edges(config.num_ranks);
  std::uint64_t degenerate_skipped = 0;

  timer.time("detect_features", [&] {
    for (RankId r = 0; r < config.num_ranks; ++r) {
      if (config.kind == FeatureKind::Critical) {
        auto set = detect_critical_points(vol, blocks[r]);
        degenerate_skipped += set.degenerate_skipped;
        for (const auto& cp : set.points) {
          const FaceKey key = decode_face_id(cp.face_id, vol.dims);
          if (blocks[r].core_contains(key.anchor, vol.dims))
            owned[r].push_back(to_record(cp));
        }
        detected[r] = std::move(set.points);
      } else {
        const auto vertices = detect_level_set(vol, blocks[r], *config.threshold);
        for (const auto& v : vertices) {
          const GridPoint p = decode_vertex_id(v.vertex_id, vol.dims);
          if (blocks[r].core_contains(p, vol.dims)) owned[r].push_back(to_record(v, vol.dims));
        }
      }
    }
  });

  timer.time("local_edges", [&] {
    for (RankId r = 0; r < config.num_ranks; ++r) {
      if (config.kind == FeatureKind::Critical)
        kept_edges[r] = local_edges_critical(detected[r], vol, blocks[r], blocks);
      else
        kept_edges[r] = local_edges_levelset(vol, blocks[r], *config.threshold, blocks);
    }
  });

  TrackResult result;
  std::vector<std::uint64_t> counts(config.num_ranks);
  for (RankId r = 0; r < config.num_ranks; ++r) {
    result.n_features += owned[r].size();
    result.n_edges += kept_edges[r].size();
    counts[r] = owned[r].size();
  }

  // Optional kd-tree balancing of detected features before union-find.
  std::vector<RankFeatureSet> sets(config.num_ranks);
  for (RankId r = 0; r < config.num_ranks; ++r)
    sets[r] = RankFeatureSet{std::move(owned[r]), std::move(kept_edges[r])};

  const bool balance_now =
      config.load_balance == LoadBalance::On ||
      (config.load_balance == LoadBalance::Auto && should_balance(counts));
  result.balanced = balance_now;
  if (balance_now) {
    timer.time("balance", [&] {
      std::vector<FeaturePoint> points;
      points.reserve(result.n_features);
      for (const auto& s : sets)
        for (const auto& f : s.features) points.push_back(to_point(f));
      const std::size_t axes = 1 + vol.dims.spatial_nd();
      const auto assignment = kd_partition(points, config.num_ranks, axes);
      if (!config.assignment_dump.empty())
        write_text_file(config.assignment_dump, assignment_to_json(assignment));
      auto [moved, metrics] = repartition(sets, assignment, config.seed);
      sets = std::move(moved);
      doc["balance_exchange"] = metrics_to_json(metrics);
    });
  }

  // Union-find over the feature graph.
  GraphPartition partition;
  partition.num_ranks = config.num_ranks;
  partition.local_elements.resize(config.num_ranks);
  partition.local_edges.resize(config.num_ranks);
  for (RankId r = 0; r < config.num_ranks; ++r) {
    auto& ids = partition.local_elements[r];
    ids.reserve(sets[r].features.size());
    for (const auto& f : sets[r].features) ids.push_back(f.id);
    std::sort(ids.begin(), ids.end());
    partition.local_edges[r] = sets[r].edges;
  }

  const std::uint64_t cap = config.msg_cap
                                ? config.msg_cap
                                : default_msg_cap(result.n_features, result.n_edges);
  const Schedule schedule{config.seed, config.mode, config.max_delay};
  CclRun run = timer.time("union_find", [&] { return run_ccl(partition, schedule, cap); });
  doc["engine"] = metrics_to_json(run.metrics);

  // Gather features at their roots, assemble, and write.
  std::vector<std::vector<FeatureRecord>> features(config.num_ranks);
  for (RankId r = 0; r < config.num_ranks; ++r) features[r] = std::move(sets[r].features);
  auto [bundles, gather_metrics] = timer.time("gather", [&] {
    return gather_by_root(run.states, features, config.seed);
  });
  doc["gather"] = metrics_to_json(gather_metrics);

  std::vector<Trajectory> trajectories;
  timer.time("assemble", [&] {
    for (const auto& rank_bundles : bundles)
      for (const auto& bundle : rank_bundles)
        trajectories.push_back(assemble(bundle, config.kind));
  });
  result.n_components = trajectories.size();

  timer.time("write_output", [&] {
    write_output(trajectories, config.output, config.format);
    write_text_file(config.output + ".summary.json", component_summary_json(trajectories));
  });

  doc["stages"] = timer.to_json();
  doc["n_features"] = result.n_features;
  doc["n_edges"] = result.n_edges;
  doc["n_components"] = result.n_components;
  doc["balanced"] = result.balanced;
  if (config.kind == FeatureKind::Critical) doc["degenerate_skipped"] = degenerate_skipped;
  result.metrics_json = doc.dump(2);
  if (!config.metrics_path.empty()) write_text_file(config.metrics_path, result.metrics_json);
  return result;
}

CclResult cmd_ccl(const RunConfig& config) {
  StageTimer timer;
  nlohmann::json doc = base_metrics("ccl", config);

  const GraphPartition partition = timer.time("read_graph", [&] {
    return load_graph(config.input, config.partition_path, config.num_ranks);
  });

  CclResult result;
  result.n_elements = partition.num_elements();
  result.n_edges = partition.num_edges();

  const std::uint64_t cap = config.msg_cap
                                ? config.msg_cap
                                : default_msg_cap(result.n_elements, result.n_edges);
  const Schedule schedule{config.seed, config.mode, config.max_delay};
  CclRun run =
      timer.time("union_find", [&] { return run_ccl(partition, schedule, cap); });
  doc["engine"] = metrics_to_json(run.metrics);

  const auto labels = collect_labels(run.states);
  std::unordered_set<ElementId> roots;
  for (const auto& [e, root] : labels) roots.insert(root);
  result.n_components = roots.size();

  timer.time("write_labels", [&] { write_labels_file(config.output, labels); });

  doc["stages"] = timer.to_json();
  doc["n_elements"] = result.n_elements;
  doc["n_edges"] = result.n_edges;
  doc["n_components"] = result.n_components;
  result.metrics_json = doc.dump(2);
  if (!config.metrics_path.empty()) write_text_file(config.metrics_path, result.metrics_json);
  return result;
}

CclResult cmd_oracle(const RunConfig& config) {
  StageTimer timer;
  nlohmann::json doc = base_metrics("oracle", config);

  const auto edges = timer.time("read_graph", [&] { return read_edge_list_file(config.input); });
  std::vector<ElementId> declared;
  if (!config.partition_path.empty())
    for (const auto& [id, rank] : read_partition_file(config.partition_path))
      declared.push_back(id);

  const auto label_map = timer.time("oracle", [&] { return sequential_oracle(edges, declared); });
  std::map<ElementId, ElementId> labels(label_map.begin(), label_map.end());

  CclResult result;
  result.n_elements = labels.size();
  result.n_edges = edges.size();
  std::unordered_set<ElementId> roots;
  for (const auto& [e, root] : labels) roots.insert(root);
  result.n_components = roots.size();

  timer.time("write_labels", [&] { write_labels_file(config.output, labels); });
  doc["stages"] = timer.to_json();
  doc["n_elements"] = result.n_elements;
  doc["n_edges"] = result.n_edges;
  doc["n_components"] = result.n_components;
  result.metrics_json = doc.dump(2);
  if (!config.metrics_path.empty()) write_text_file(config.metrics_path, result.metrics_json);
  return result;
}

void cmd_generate(const SynthSpec& spec, const std::string& out_base) {
  write_volume(out_base, generate(spec));
}

}  // namespace ftccl
