#pragma once

#include <array>
#include <string>
#include <vector>

#include "ftccl/features.hpp"
#include "ftccl/graph.hpp"
#include "ftccl/ids.hpp"

namespace ftccl {

/// A time-varying scalar field: 32-bit float samples, row-major with time as
/// the slowest axis.
struct Volume {
  Dims dims;
  std::vector<float> values;

  std::uint64_t index(const GridPoint& p) const;
  float at(const GridPoint& p) const { return values[index(p)]; }
  void validate() const;
};

/// On disk a volume is `<base>.json` (dims/dtype/order sidecar) plus
/// `<base>.raw` (little-endian f32 samples).
void write_volume(const std::string& base_path, const Volume& vol);
Volume read_volume(const std::string& base_path);

struct AxisRange {
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;  // half-open

  std::uint32_t length() const { return hi - lo; }
  bool contains(std::uint32_t v) const { return v >= lo && v < hi; }
  bool operator==(const AxisRange&) const = default;
};

/// A rank's rectangular sub-domain. Axes are ordered fastest-first (x, y,
/// [z,] t) like Dims. `ghosted` is `core` grown by one layer per side,
/// clamped to the domain.
struct Block {
  RankId rank = 0;
  std::vector<AxisRange> core;
  std::vector<AxisRange> ghosted;

  bool core_contains(const GridPoint& p, const Dims& dims) const;
  bool ghosted_contains(const GridPoint& p, const Dims& dims) const;
};

/// Near-equal-volume rectangular tiling: recursive splits along the longest
/// axis (ties prefer x, y, z, then t). Cores are disjoint and cover the grid.
std::vector<Block> decompose(const Dims& dims, std::uint32_t num_ranks);

/// Rank whose core contains the vertex; every vertex has exactly one.
RankId core_owner(const std::vector<Block>& blocks, const GridPoint& p, const Dims& dims);

/// Spatial gradient (df/dx, df/dy) at a vertex of a 2D+time volume: central
/// differences within the time slice, one-sided at slice borders.
std::array<double, 2> spatial_gradient(const Volume& vol, const GridPoint& p);

/// A gradient zero located on one triangle of a spacetime 2-face.
struct CriticalPoint {
  ElementId face_id = 0;
  std::array<double, 3> position{0.0, 0.0, 0.0};  // x, y, t (continuous)
  CriticalKind kind = CriticalKind::Maximum;
  double scalar = 0.0;
  std::array<double, 3> barycentric{0.0, 0.0, 0.0};
};

struct CriticalPointSet {
  std::vector<CriticalPoint> points;
  std::uint64_t triangles_evaluated = 0;
  std::uint64_t degenerate_skipped = 0;
};

/// Interpolated-gradient zeros on every face triangle inside the ghosted
/// block. Per-vertex gradients are linearly interpolated over each triangle;
/// a solution of the 2x2 barycentric system with all coordinates in [0, 1]
/// yields a critical point, classified by the Jacobian of the interpolated
/// gradient map (det < 0 saddle, det > 0 and trace < 0 maximum, trace > 0
/// minimum). Triangles singular within 1e-12 are skipped and counted.
CriticalPointSet detect_critical_points(const Volume& vol, const Block& block);

struct LevelSetVertex {
  ElementId vertex_id = 0;
  float value = 0.0f;
};

/// Every vertex in the ghosted block whose value is strictly greater than the
/// threshold.
std::vector<LevelSetVertex> detect_level_set(const Volume& vol, const Block& block,
                                             double threshold);

/// Links all pairs of critical-point-carrying face triangles sharing a unit
/// spacetime cube in the ghosted block. Each edge is kept only by the rank
/// whose core holds the anchor of its larger endpoint, so global edge sets
/// match a single-rank run exactly.
std::vector<GraphEdge> local_edges_critical(const std::vector<CriticalPoint>& points,
                                            const Volume& vol, const Block& block,
                                            const std::vector<Block>& all_blocks);

/// Links all pairs of above-threshold vertices sharing a unit spacetime cell
/// (diagonals included); ownership and placement as for critical points.
std::vector<GraphEdge> local_edges_levelset(const Volume& vol, const Block& block,
                                            double threshold,
                                            const std::vector<Block>& all_blocks);

}  // namespace ftccl
