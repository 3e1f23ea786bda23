#pragma once

#include <optional>
#include <string>

#include "ftccl/balance.hpp"
#include "ftccl/ccl.hpp"
#include "ftccl/graph_io.hpp"
#include "ftccl/mesh.hpp"
#include "ftccl/synth.hpp"
#include "ftccl/trajectory.hpp"

namespace ftccl {

enum class LoadBalance : std::uint8_t { Off = 0, On = 1, Auto = 2 };

struct RunConfig {
  std::string input;             // volume base path (track) / graph path (ccl)
  std::string partition_path;    // optional `id rank` file (ccl)
  std::string output;            // trajectory or label file
  std::string metrics_path;      // optional metrics JSON
  std::string format = "jsonl";  // trajectory format: jsonl | csv
  std::string assignment_dump;   // optional kd assignment diagnostic JSON
  FeatureKind kind = FeatureKind::LevelSet;
  std::optional<double> threshold;  // required iff kind == LevelSet
  std::uint32_t num_ranks = 1;
  Mode mode = Mode::Async;
  LoadBalance load_balance = LoadBalance::Off;
  std::uint64_t seed = 0;
  std::uint64_t msg_cap = 0;  // 0: derived from the problem size
  std::uint32_t max_delay = 3;
};

struct TrackResult {
  std::uint64_t n_features = 0;
  std::uint64_t n_edges = 0;
  std::uint64_t n_components = 0;
  bool balanced = false;
  std::string metrics_json;
};

/// The end-to-end tracking pipeline: decompose, detect, local edges, optional
/// kd balancing, distributed union-find, finalize, gather, assemble, write.
/// Writes the trajectory file, `<output>.summary.json`, and optionally the
/// metrics document. All internal audits run; failures throw.
TrackResult cmd_track(const RunConfig& config);

struct CclResult {
  std::uint64_t n_elements = 0;
  std::uint64_t n_edges = 0;
  std::uint64_t n_components = 0;
  std::string metrics_json;
};

/// Distributed CCL over a raw-graph file; labels written as `element root`
/// lines sorted by element.
CclResult cmd_ccl(const RunConfig& config);

/// Sequential ground truth over the same input and output format.
CclResult cmd_oracle(const RunConfig& config);

/// Generates a synthetic volume and writes the `<out>.json` / `<out>.raw` pair.
void cmd_generate(const SynthSpec& spec, const std::string& out_base);

/// Message cap fallback when the config leaves it 0.
std::uint64_t default_msg_cap(std::uint64_t elements, std::uint64_t edges);

}  // namespace ftccl
