#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "ftccl/pipeline.hpp"
#include "ftccl/socket_transport.hpp"

namespace {

using namespace ftccl;

Dims parse_dims(const std::string& text) {
  // TxYxX or TxZxYxX, e.g. 32x64x64.
  std::vector<std::uint32_t> shape;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find('x', pos);
    const std::string tok = text.substr(pos, next == std::string::npos ? next : next - pos);
    try {
      shape.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
    } catch (const std::exception&) {
      throw InputError("bad --dims value '" + text + "'");
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (shape.size() < 2 || shape.size() > 4)
    throw InputError("--dims expects 2-4 axis lengths, e.g. 32x64x64");
  Dims dims;
  dims.t = shape[0];
  for (std::size_t i = shape.size(); i-- > 1;) dims.spatial.push_back(shape[i]);
  dims.validate();
  return dims;
}

std::uint64_t msg_cap_from_env(std::uint64_t flag_value) {
  if (const char* env = std::getenv("FTCCL_MSG_CAP")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw InputError("FTCCL_MSG_CAP is not a number");
    }
  }
  return flag_value;
}

void add_engine_flags(CLI::App* cmd, RunConfig& config, std::string& mode,
                      std::string& transport) {
  cmd->add_option("--ranks", config.num_ranks, "Number of simulated ranks")
      ->check(CLI::Range(1u, 1u << 20));
  cmd->add_option("--mode", mode, "Engine communication mode: sync or async")
      ->check(CLI::IsMember({"sync", "async"}));
  cmd->add_option("--seed", config.seed, "Scheduler seed");
  cmd->add_option("--msg-cap", config.msg_cap,
                  "Abort after this many delivered messages (0 = auto)");
  cmd->add_option("--max-delay", config.max_delay,
                  "Async simulator delivery bound, in sweeps");
  cmd->add_option("--transport", transport, "Rank execution: sim or sockets")
      ->check(CLI::IsMember({"sim", "sockets"}));
  cmd->add_option("--metrics", config.metrics_path, "Write a metrics JSON document here");
}

int run_ccl_command(RunConfig config, const std::string& transport) {
  config.msg_cap = msg_cap_from_env(config.msg_cap);
  if (transport == "sockets") {
    const GraphPartition partition =
        load_graph(config.input, config.partition_path, config.num_ranks);
    auto result = run_ccl_sockets(partition, config.mode, "/proc/self/exe");
    write_labels_file(config.output, result.labels);
    std::cout << "elements " << partition.num_elements() << " edges "
              << partition.num_edges() << " (sockets, " << to_string(config.mode) << ")\n";
    return 0;
  }
  const auto result = cmd_ccl(config);
  std::cout << "elements " << result.n_elements << " edges " << result.n_edges
            << " components " << result.n_components << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed connected-component labeling and feature tracking"};
  app.require_subcommand(1);

  // generate
  std::string gen_dims = "32x32x32", gen_out;
  SynthSpec synth;
  auto* gen = app.add_subcommand("generate", "Write a synthetic spiral/columnar volume");
  gen->add_option("--dims", gen_dims, "T x Y x X grid extents")->required();
  gen->add_option("--out", gen_out, "Output base path (.json/.raw pair)")->required();
  gen->add_option("--seed", synth.seed, "Generator seed");
  gen->add_option("--spirals", synth.n_spirals, "Number of helical bumps");
  gen->add_option("--columns", synth.n_columns, "Number of static columnar bumps");
  gen->add_option("--bump-width", synth.bump_width, "Gaussian sigma in grid units");
  gen->add_option("--amplitude", synth.amplitude, "Bump amplitude");
  gen->add_option("--noise", synth.noise, "Background noise amplitude (0 disables)");

  // track
  RunConfig track_config;
  std::string track_mode = "async", track_transport = "sim", track_kind = "levelset";
  std::string track_balance = "off";
  double track_threshold = 0.0;
  auto* track = app.add_subcommand("track", "Run the feature tracking pipeline");
  track->add_option("--input", track_config.input, "Volume base path")->required();
  track->add_option("--out", track_config.output, "Trajectory output file")->required();
  track->add_option("--kind", track_kind, "Feature kind: critical or levelset")
      ->check(CLI::IsMember({"critical", "levelset"}));
  auto* thr = track->add_option("--threshold", track_threshold,
                                "Super-level-set threshold (levelset runs)");
  track->add_option("--format", track_config.format, "Output format: jsonl or csv")
      ->check(CLI::IsMember({"jsonl", "csv"}));
  track->add_option("--load-balance", track_balance, "kd-tree balancing: on, off, or auto")
      ->check(CLI::IsMember({"on", "off", "auto"}));
  track->add_option("--dump-assignment", track_config.assignment_dump,
                    "Write the kd assignment diagnostic JSON here");
  add_engine_flags(track, track_config, track_mode, track_transport);

  // ccl
  RunConfig ccl_config;
  std::string ccl_mode = "async", ccl_transport = "sim";
  auto* ccl = app.add_subcommand("ccl", "Label connected components of a raw graph");
  ccl->add_option("--graph", ccl_config.input, "Edge list file")->required();
  ccl->add_option("--partition", ccl_config.partition_path,
                  "Optional `id rank` ownership file");
  ccl->add_option("--out", ccl_config.output, "Label output file")->required();
  add_engine_flags(ccl, ccl_config, ccl_mode, ccl_transport);

  // oracle
  RunConfig oracle_config;
  auto* oracle = app.add_subcommand("oracle", "Sequential ground-truth labels");
  oracle->add_option("--graph", oracle_config.input, "Edge list file")->required();
  oracle->add_option("--partition", oracle_config.partition_path,
                     "Optional `id rank` file declaring isolated elements");
  oracle->add_option("--out", oracle_config.output, "Label output file")->required();
  oracle->add_option("--metrics", oracle_config.metrics_path, "Metrics JSON path");

  // _worker (internal; spawned by --transport sockets)
  std::uint32_t worker_port = 0, worker_rank = 0;
  auto* worker = app.add_subcommand("_worker");
  worker->group("");  // hidden
  worker->add_option("--port", worker_port)->required();
  worker->add_option("--rank", worker_rank)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      synth.dims = parse_dims(gen_dims);
      cmd_generate(synth, gen_out);
      std::cout << "wrote " << gen_out << ".json and " << gen_out << ".raw\n";
      return 0;
    }
    if (track->parsed()) {
      track_config.mode = track_mode == "sync" ? Mode::Sync : Mode::Async;
      track_config.kind =
          track_kind == "critical" ? FeatureKind::Critical : FeatureKind::LevelSet;
      if (thr->count()) track_config.threshold = track_threshold;
      track_config.load_balance = track_balance == "on"
                                      ? LoadBalance::On
                                      : (track_balance == "auto" ? LoadBalance::Auto
                                                                 : LoadBalance::Off);
      track_config.msg_cap = msg_cap_from_env(track_config.msg_cap);
      if (track_transport == "sockets")
        throw InputError("--transport sockets supports the ccl command only");
      const auto result = cmd_track(track_config);
      std::cout << "features " << result.n_features << " edges " << result.n_edges
                << " components " << result.n_components
                << (result.balanced ? " (balanced)" : "") << '\n';
      return 0;
    }
    if (ccl->parsed()) {
      ccl_config.mode = ccl_mode == "sync" ? Mode::Sync : Mode::Async;
      return run_ccl_command(ccl_config, ccl_transport);
    }
    if (oracle->parsed()) {
      const auto result = cmd_oracle(oracle_config);
      std::cout << "elements " << result.n_elements << " edges " << result.n_edges
                << " components " << result.n_components << '\n';
      return 0;
    }
    if (worker->parsed())
      return socket_worker_main(static_cast<std::uint16_t>(worker_port), worker_rank);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
