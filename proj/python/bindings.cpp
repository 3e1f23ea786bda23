#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ftccl/pipeline.hpp"

namespace py = pybind11;
using namespace ftccl;

namespace {

Dims dims_from_shape(const std::vector<std::uint32_t>& shape) {
  if (shape.size() < 2 || shape.size() > 4)
    throw InputError("shape must list 2-4 axes (T, [Z,] Y, X)");
  Dims dims;
  dims.t = shape[0];
  for (std::size_t i = shape.size(); i-- > 1;) dims.spatial.push_back(shape[i]);
  dims.validate();
  return dims;
}

py::array_t<float> volume_to_array(const Volume& vol) {
  std::vector<py::ssize_t> shape;
  shape.push_back(vol.dims.t);
  for (std::size_t i = vol.dims.spatial_nd(); i-- > 0;)
    shape.push_back(vol.dims.spatial[i]);
  py::array_t<float> arr(shape);
  std::memcpy(arr.mutable_data(), vol.values.data(), vol.values.size() * sizeof(float));
  return arr;
}

Volume volume_from_array(const py::array& array) {
  auto arr = py::array_t<float, py::array::c_style | py::array::forcecast>::ensure(array);
  if (!arr) throw InputError("expected a float array");
  Volume vol;
  std::vector<std::uint32_t> shape;
  for (py::ssize_t i = 0; i < arr.ndim(); ++i)
    shape.push_back(static_cast<std::uint32_t>(arr.shape(i)));
  vol.dims = dims_from_shape(shape);
  vol.values.assign(arr.data(), arr.data() + arr.size());
  return vol;
}

std::vector<std::pair<ElementId, ElementId>> edges_from_list(
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& edges) {
  return edges;
}

Schedule make_schedule(const std::string& mode, std::uint64_t seed) {
  if (mode != "sync" && mode != "async") throw InputError("mode must be sync or async");
  return Schedule{seed, mode == "sync" ? Mode::Sync : Mode::Async, 3};
}

}  // namespace

PYBIND11_MODULE(_ftccl, m) {
  m.doc() = "Distributed union-find connected component labeling and feature tracking";

  py::register_exception<Error>(m, "FtcclError");

  m.def(
      "generate",
      [](const std::vector<std::uint32_t>& shape, std::uint64_t seed, std::uint32_t spirals,
         std::uint32_t columns, double bump_width, double amplitude, double noise) {
        SynthSpec spec;
        spec.dims = dims_from_shape(shape);
        spec.seed = seed;
        spec.n_spirals = spirals;
        spec.n_columns = columns;
        spec.bump_width = bump_width;
        spec.amplitude = amplitude;
        spec.noise = noise;
        return volume_to_array(generate(spec));
      },
      py::arg("shape"), py::arg("seed") = 0, py::arg("spirals") = 2, py::arg("columns") = 1,
      py::arg("bump_width") = 5.0, py::arg("amplitude") = 1.0, py::arg("noise") = 0.02,
      "Generate a synthetic spiral/columnar volume as a (T, [Z,] Y, X) float32 array");

  m.def(
      "write_volume",
      [](const std::string& base_path, const py::array& array) {
        write_volume(base_path, volume_from_array(array));
      },
      py::arg("base_path"), py::arg("array"),
      "Write a volume as the <base>.json / <base>.raw pair");

  m.def(
      "read_volume",
      [](const std::string& base_path) { return volume_to_array(read_volume(base_path)); },
      py::arg("base_path"));

  m.def(
      "ccl",
      [](const std::vector<std::pair<std::uint64_t, std::uint64_t>>& edges,
         std::uint32_t ranks, const std::string& mode, std::uint64_t seed) {
        const auto partition = GraphPartition::range_partitioned({}, edges_from_list(edges), ranks);
        const auto labels = ccl_labels(partition, make_schedule(mode, seed));
        return std::map<std::uint64_t, std::uint64_t>(labels.begin(), labels.end());
      },
      py::arg("edges"), py::arg("ranks") = 1, py::arg("mode") = "async", py::arg("seed") = 0,
      "Distributed connected-component labels: {element: component_root}");

  m.def(
      "oracle",
      [](const std::vector<std::pair<std::uint64_t, std::uint64_t>>& edges) {
        const auto labels = sequential_oracle(edges_from_list(edges));
        return std::map<std::uint64_t, std::uint64_t>(labels.begin(), labels.end());
      },
      py::arg("edges"), "Single-memory ground-truth labels");

  m.def(
      "kd_partition",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> coords,
         std::uint32_t ranks) {
        if (coords.ndim() != 2 || coords.shape(1) < 1 || coords.shape(1) > 4)
          throw InputError("coords must be (n, axes<=4)");
        std::vector<FeaturePoint> points(static_cast<std::size_t>(coords.shape(0)));
        const auto axes = static_cast<std::size_t>(coords.shape(1));
        auto view = coords.unchecked<2>();
        for (std::size_t i = 0; i < points.size(); ++i) {
          points[i].id = i;
          for (std::size_t a = 0; a < axes; ++a)
            points[i].coords[a] = view(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(a));
        }
        const auto assignment = kd_partition(points, ranks, axes);
        py::array_t<std::uint32_t> out(static_cast<py::ssize_t>(points.size()));
        auto mut = out.mutable_unchecked<1>();
        for (std::size_t i = 0; i < points.size(); ++i)
          mut(static_cast<py::ssize_t>(i)) = assignment.assignment.at(i);
        return out;
      },
      py::arg("coords"), py::arg("ranks"),
      "Balanced kd-tree assignment of points (row i) to ranks");

  m.def(
      "track",
      [](const std::string& input, const std::string& out, const std::string& kind,
         py::object threshold, std::uint32_t ranks, const std::string& mode,
         const std::string& load_balance, std::uint64_t seed, const std::string& format,
         const std::string& metrics) {
        RunConfig config;
        config.input = input;
        config.output = out;
        config.format = format;
        config.metrics_path = metrics;
        config.kind = kind == "critical" ? FeatureKind::Critical : FeatureKind::LevelSet;
        if (!threshold.is_none()) config.threshold = threshold.cast<double>();
        config.num_ranks = ranks;
        config.mode = make_schedule(mode, seed).mode;
        config.seed = seed;
        config.load_balance = load_balance == "on"
                                  ? LoadBalance::On
                                  : (load_balance == "auto" ? LoadBalance::Auto
                                                            : LoadBalance::Off);
        const auto result = cmd_track(config);
        py::dict summary;
        summary["n_features"] = result.n_features;
        summary["n_edges"] = result.n_edges;
        summary["n_components"] = result.n_components;
        summary["balanced"] = result.balanced;
        return summary;
      },
      py::arg("input"), py::arg("out"), py::arg("kind") = "levelset",
      py::arg("threshold") = py::none(), py::arg("ranks") = 1, py::arg("mode") = "async",
      py::arg("load_balance") = "off", py::arg("seed") = 0, py::arg("format") = "jsonl",
      py::arg("metrics") = "",
      "Run the feature tracking pipeline over a volume on disk");

  m.def(
      "encode_vertex_id",
      [](const std::vector<std::uint32_t>& shape, std::uint32_t t, std::uint32_t y,
         std::uint32_t x, std::uint32_t z) {
        const Dims dims = dims_from_shape(shape);
        return encode_vertex_id(GridPoint{x, y, z, t}, dims);
      },
      py::arg("shape"), py::arg("t"), py::arg("y"), py::arg("x"), py::arg("z") = 0);

  m.def(
      "decode_vertex_id",
      [](const std::vector<std::uint32_t>& shape, std::uint64_t id) {
        const Dims dims = dims_from_shape(shape);
        const GridPoint p = decode_vertex_id(id, dims);
        return py::make_tuple(p.t, p.y, p.x, p.z);
      },
      py::arg("shape"), py::arg("id"));
}
