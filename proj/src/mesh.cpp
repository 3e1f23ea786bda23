#include "ftccl/mesh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "raw volume files are little-endian");

namespace ftccl {

std::uint64_t Volume::index(const GridPoint& p) const {
  return encode_vertex_id(p, dims);
}

void Volume::validate() const {
  dims.validate();
  if (values.size() != dims.num_vertices())
    throw InputError("volume: value count does not match dims");
}

void write_volume(const std::string& base_path, const Volume& vol) {
  vol.validate();
  nlohmann::json sidecar;
  std::vector<std::uint32_t> shape;  // slowest first: T, (Z,) Y, X
  shape.push_back(vol.dims.t);
  for (std::size_t i = vol.dims.spatial_nd(); i-- > 0;)
    shape.push_back(vol.dims.spatial[i]);
  sidecar["dims"] = shape;
  sidecar["dtype"] = "f32";
  sidecar["order"] = "row-major-time-slowest";

  std::ofstream meta(base_path + ".json", std::ios::binary);
  if (!meta) throw IoError("cannot write " + base_path + ".json");
  meta << sidecar.dump(2) << '\n';

  std::ofstream raw(base_path + ".raw", std::ios::binary);
  if (!raw) throw IoError("cannot write " + base_path + ".raw");
  raw.write(reinterpret_cast<const char*>(vol.values.data()),
            static_cast<std::streamsize>(vol.values.size() * sizeof(float)));
  if (!raw) throw IoError("failed writing " + base_path + ".raw");
}

Volume read_volume(const std::string& base_path) {
  std::string base = base_path;
  if (base.size() > 5 && base.substr(base.size() - 5) == ".json")
    base = base.substr(0, base.size() - 5);

  std::ifstream meta(base + ".json");
  if (!meta) throw IoError("cannot open " + base + ".json");
  nlohmann::json sidecar;
  try {
    meta >> sidecar;
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(base + ".json: " + ex.what());
  }
  if (sidecar.value("dtype", "") != "f32" ||
      sidecar.value("order", "") != "row-major-time-slowest")
    throw InputError(base + ".json: unsupported dtype or sample order");
  const auto shape = sidecar.at("dims").get<std::vector<std::uint32_t>>();
  if (shape.size() < 2 || shape.size() > 4)
    throw InputError(base + ".json: dims must list 2-4 axes");

  Volume vol;
  vol.dims.t = shape[0];
  for (std::size_t i = shape.size(); i-- > 1;) vol.dims.spatial.push_back(shape[i]);
  vol.dims.validate();

  std::ifstream raw(base + ".raw", std::ios::binary);
  if (!raw) throw IoError("cannot open " + base + ".raw");
  vol.values.resize(vol.dims.num_vertices());
  raw.read(reinterpret_cast<char*>(vol.values.data()),
           static_cast<std::streamsize>(vol.values.size() * sizeof(float)));
  if (raw.gcount() != static_cast<std::streamsize>(vol.values.size() * sizeof(float)))
    throw InputError(base + ".raw: file shorter than dims require");
  return vol;
}

bool Block::core_contains(const GridPoint& p, const Dims& dims) const {
  for (std::size_t a = 0; a < core.size(); ++a)
    if (!core[a].contains(p.active_axis(a, dims))) return false;
  return true;
}

bool Block::ghosted_contains(const GridPoint& p, const Dims& dims) const {
  for (std::size_t a = 0; a < ghosted.size(); ++a)
    if (!ghosted[a].contains(p.active_axis(a, dims))) return false;
  return true;
}

namespace {

std::uint64_t box_volume(const std::vector<AxisRange>& box) {
  std::uint64_t v = 1;
  for (const auto& r : box) v *= r.length();
  return v;
}

void split_box(const std::vector<AxisRange>& box, std::uint32_t rank_lo, std::uint32_t rank_hi,
               std::vector<std::vector<AxisRange>>& out) {
  const std::uint32_t ranks = rank_hi - rank_lo;
  if (ranks == 1) {
    out[rank_lo] = box;
    return;
  }
  // Longest axis wins; ties prefer x, y, z over t (axes are fastest-first).
  std::size_t axis = 0;
  for (std::size_t a = 1; a < box.size(); ++a)
    if (box[a].length() > box[axis].length()) axis = a;

  const std::uint32_t left_ranks = (ranks + 1) / 2;
  const std::uint32_t len = box[axis].length();
  std::uint64_t rest = 1;
  for (std::size_t a = 0; a < box.size(); ++a)
    if (a != axis) rest *= box[a].length();

  std::uint32_t k = static_cast<std::uint32_t>(
      (static_cast<std::uint64_t>(len) * left_ranks + ranks / 2) / ranks);
  k = std::clamp<std::uint32_t>(k, 1, len - 1);
  // Keep both halves large enough for their rank counts.
  while (static_cast<std::uint64_t>(k) * rest < left_ranks && k < len - 1) ++k;
  while (static_cast<std::uint64_t>(len - k) * rest < ranks - left_ranks && k > 1) --k;

  auto left = box, right = box;
  left[axis].hi = box[axis].lo + k;
  right[axis].lo = box[axis].lo + k;
  split_box(left, rank_lo, rank_lo + left_ranks, out);
  split_box(right, rank_lo + left_ranks, rank_hi, out);
}

}  // namespace

std::vector<Block> decompose(const Dims& dims, std::uint32_t num_ranks) {
  dims.validate();
  if (num_ranks < 1) throw InputError("decompose: num_ranks must be >= 1");
  const auto axes = dims.axes_fastest_first();
  std::vector<AxisRange> domain;
  for (auto len : axes) domain.push_back({0, len});
  if (num_ranks > box_volume(domain))
    throw InputError("decompose: more ranks than grid cells");

  std::vector<std::vector<AxisRange>> cores(num_ranks);
  split_box(domain, 0, num_ranks, cores);

  std::vector<Block> blocks(num_ranks);
  for (RankId r = 0; r < num_ranks; ++r) {
    blocks[r].rank = r;
    blocks[r].core = cores[r];
    blocks[r].ghosted = cores[r];
    for (std::size_t a = 0; a < axes.size(); ++a) {
      auto& g = blocks[r].ghosted[a];
      if (g.lo > 0) --g.lo;
      if (g.hi < axes[a]) ++g.hi;
    }
  }
  return blocks;
}

RankId core_owner(const std::vector<Block>& blocks, const GridPoint& p, const Dims& dims) {
  for (const auto& b : blocks)
    if (b.core_contains(p, dims)) return b.rank;
  throw InputError("core_owner: vertex outside every core");
}

std::array<double, 2> spatial_gradient(const Volume& vol, const GridPoint& p) {
  if (vol.dims.spatial_nd() != 2)
    throw InputError("spatial_gradient: 2D+time volumes only");
  const std::uint32_t nx = vol.dims.spatial[0], ny = vol.dims.spatial[1];
  auto sample = [&vol](GridPoint q) { return static_cast<double>(vol.at(q)); };

  auto diff = [&](std::uint32_t c, std::uint32_t n, auto get) {
    if (c > 0 && c + 1 < n) return (get(c + 1) - get(c - 1)) * 0.5;
    if (c == 0) return get(1) - get(0);
    return get(n - 1) - get(n - 2);
  };
  const double gx = diff(p.x, nx, [&](std::uint32_t x) {
    return sample(GridPoint{x, p.y, 0, p.t});
  });
  const double gy = diff(p.y, ny, [&](std::uint32_t y) {
    return sample(GridPoint{p.x, y, 0, p.t});
  });
  return {gx, gy};
}

namespace {

constexpr double kSingularTolerance = 1e-12;

// In-plane offsets of triangle corners 1 and 2 relative to corner 0, in the
// face's (u, v) axes. Corner order comes from face_triangle_corners.
struct PlaneOffsets {
  double u1, v1, u2, v2;
};

PlaneOffsets plane_offsets(FaceTriangle tri) {
  if (tri == FaceTriangle::Lower) return {1.0, 0.0, 1.0, 1.0};  // c00, cu, c11
  return {1.0, 1.0, 0.0, 1.0};                                  // c00, c11, cv
}

struct TriangleResult {
  bool found = false;
  bool degenerate = false;
  std::array<double, 3> bary{};
  CriticalKind kind = CriticalKind::Maximum;
};

TriangleResult solve_triangle(const std::array<std::array<double, 2>, 3>& g,
                              FaceTriangle tri) {
  TriangleResult res;
  // Solve sum(lambda_i * g_i) = 0 with sum(lambda_i) = 1.
  const double a00 = g[0][0] - g[2][0], a01 = g[1][0] - g[2][0];
  const double a10 = g[0][1] - g[2][1], a11 = g[1][1] - g[2][1];
  const double det = a00 * a11 - a01 * a10;
  if (std::abs(det) <= kSingularTolerance) {
    res.degenerate = true;
    return res;
  }
  const double b0 = -g[2][0], b1 = -g[2][1];
  const double l0 = (b0 * a11 - a01 * b1) / det;
  const double l1 = (a00 * b1 - b0 * a10) / det;
  const double l2 = 1.0 - l0 - l1;
  if (l0 < 0.0 || l0 > 1.0 || l1 < 0.0 || l1 > 1.0 || l2 < 0.0 || l2 > 1.0) return res;

  // Jacobian of the interpolated gradient over the face plane: J * P = G.
  const auto off = plane_offsets(tri);
  const double pdet = off.u1 * off.v2 - off.u2 * off.v1;
  const double G00 = g[1][0] - g[0][0], G01 = g[2][0] - g[0][0];
  const double G10 = g[1][1] - g[0][1], G11 = g[2][1] - g[0][1];
  const double j00 = (G00 * off.v2 - G01 * off.v1) / pdet;
  const double j01 = (G01 * off.u1 - G00 * off.u2) / pdet;
  const double j10 = (G10 * off.v2 - G11 * off.v1) / pdet;
  const double j11 = (G11 * off.u1 - G10 * off.u2) / pdet;
  const double jdet = j00 * j11 - j01 * j10;
  const double jtrace = j00 + j11;
  if (jdet == 0.0 || (jdet > 0.0 && jtrace == 0.0)) {
    res.degenerate = true;
    return res;
  }
  res.found = true;
  res.bary = {l0, l1, l2};
  res.kind = jdet < 0.0 ? CriticalKind::Saddle
                        : (jtrace < 0.0 ? CriticalKind::Maximum : CriticalKind::Minimum);
  return res;
}

// Anchor grid of faces with every corner inside `box`, respecting global
// extents. Returns per-axis anchor ranges (x, y, t); empty when degenerate.
struct AnchorRanges {
  AxisRange x, y, t;
  bool empty;
};

AnchorRanges face_anchor_ranges(const Block& block, const Dims& dims, FaceOrientation o) {
  const std::uint32_t nx = dims.spatial[0], ny = dims.spatial[1], nt = dims.t;
  AxisRange gx = block.ghosted[0], gy = block.ghosted[1], gt = block.ghosted[2];
  AnchorRanges r{gx, gy, gt, false};
  auto shrink = [](AxisRange a, std::uint32_t n) {
    return AxisRange{a.lo, std::min(a.hi - 1, n - 1)};
  };
  switch (o) {
    case FaceOrientation::XY:
      r.x = shrink(gx, nx);
      r.y = shrink(gy, ny);
      break;
    case FaceOrientation::XT:
      r.x = shrink(gx, nx);
      r.t = shrink(gt, nt);
      break;
    default:
      r.y = shrink(gy, ny);
      r.t = shrink(gt, nt);
      break;
  }
  r.empty = r.x.lo >= r.x.hi || r.y.lo >= r.y.hi || r.t.lo >= r.t.hi;
  return r;
}

}  // namespace

CriticalPointSet detect_critical_points(const Volume& vol, const Block& block) {
  vol.validate();
  if (vol.dims.spatial_nd() != 2)
    throw InputError("critical point detection supports 2D+time volumes only");

  CriticalPointSet out;
  for (FaceOrientation o : {FaceOrientation::XY, FaceOrientation::XT, FaceOrientation::YT}) {
    const auto ranges = face_anchor_ranges(block, vol.dims, o);
    if (ranges.empty) continue;
    for (std::uint32_t t = ranges.t.lo; t < ranges.t.hi; ++t)
      for (std::uint32_t y = ranges.y.lo; y < ranges.y.hi; ++y)
        for (std::uint32_t x = ranges.x.lo; x < ranges.x.hi; ++x)
          for (FaceTriangle tri : {FaceTriangle::Lower, FaceTriangle::Upper}) {
            const FaceKey key{GridPoint{x, y, 0, t}, o, tri};
            const auto corners = face_triangle_corners(key);
            std::array<std::array<double, 2>, 3> g;
            for (int i = 0; i < 3; ++i) g[i] = spatial_gradient(vol, corners[i]);
            ++out.triangles_evaluated;
            const auto res = solve_triangle(g, tri);
            if (res.degenerate) {
              ++out.degenerate_skipped;
              continue;
            }
            if (!res.found) continue;
            CriticalPoint cp;
            cp.face_id = encode_face_id(key, vol.dims);
            cp.kind = res.kind;
            cp.barycentric = res.bary;
            for (int i = 0; i < 3; ++i) {
              cp.position[0] += res.bary[i] * corners[i].x;
              cp.position[1] += res.bary[i] * corners[i].y;
              cp.position[2] += res.bary[i] * corners[i].t;
              cp.scalar += res.bary[i] * static_cast<double>(vol.at(corners[i]));
            }
            out.points.push_back(cp);
          }
  }
  return out;
}

std::vector<LevelSetVertex> detect_level_set(const Volume& vol, const Block& block,
                                             double threshold) {
  vol.validate();
  const auto& g = block.ghosted;
  std::vector<LevelSetVertex> out;
  const std::size_t sd = vol.dims.spatial_nd();
  if (g.size() != sd + 1) throw InputError("detect_level_set: block/volume axis mismatch");

  GridPoint p;
  const AxisRange zr = sd == 3 ? g[2] : AxisRange{0, 1};
  for (std::uint32_t t = g[sd].lo; t < g[sd].hi; ++t)
    for (std::uint32_t z = zr.lo; z < zr.hi; ++z)
      for (std::uint32_t y = g[1].lo; y < g[1].hi; ++y)
        for (std::uint32_t x = g[0].lo; x < g[0].hi; ++x) {
          p = GridPoint{x, y, sd == 3 ? z : 0, t};
          const float v = vol.at(p);
          if (static_cast<double>(v) > threshold)
            out.push_back({encode_vertex_id(p, vol.dims), v});
        }
  return out;
}

namespace {

RankId face_owner(const std::vector<Block>& blocks, const FaceKey& key, const Dims& dims) {
  return core_owner(blocks, key.anchor, dims);
}

// Cubes (unit spacetime cells) whose corners all lie inside `box` and the
// domain: per-axis anchor range [lo, min(hi, n) - 1).
AxisRange cell_anchors(AxisRange ghost, std::uint32_t n) {
  return AxisRange{ghost.lo, std::min(ghost.hi, n) - 1};
}

}  // namespace

std::vector<GraphEdge> local_edges_critical(const std::vector<CriticalPoint>& points,
                                            const Volume& vol, const Block& block,
                                            const std::vector<Block>& all_blocks) {
  if (vol.dims.spatial_nd() != 2)
    throw InputError("critical point edges support 2D+time volumes only");
  std::unordered_set<ElementId> present;
  present.reserve(points.size() * 2);
  for (const auto& p : points) present.insert(p.face_id);

  const Dims& dims = vol.dims;
  const AxisRange cx = cell_anchors(block.ghosted[0], dims.spatial[0]);
  const AxisRange cy = cell_anchors(block.ghosted[1], dims.spatial[1]);
  const AxisRange ct = cell_anchors(block.ghosted[2], dims.t);

  std::vector<GraphEdge> edges;
  std::unordered_set<std::uint64_t> emitted;  // hash of (lo, hi) pairs
  auto pair_hash = [](ElementId lo, ElementId hi) {
    return lo * 0x9e3779b97f4a7c15ull ^ hi;
  };

  std::vector<ElementId> cell_faces;
  for (std::uint32_t t = ct.lo; t < ct.hi; ++t)
    for (std::uint32_t y = cy.lo; y < cy.hi; ++y)
      for (std::uint32_t x = cx.lo; x < cx.hi; ++x) {
        cell_faces.clear();
        auto add_face = [&](FaceOrientation o, GridPoint anchor) {
          for (FaceTriangle tri : {FaceTriangle::Lower, FaceTriangle::Upper}) {
            const ElementId id = encode_face_id(FaceKey{anchor, o, tri}, dims);
            if (present.count(id)) cell_faces.push_back(id);
          }
        };
        add_face(FaceOrientation::XY, {x, y, 0, t});
        add_face(FaceOrientation::XY, {x, y, 0, t + 1});
        add_face(FaceOrientation::XT, {x, y, 0, t});
        add_face(FaceOrientation::XT, {x, y + 1, 0, t});
        add_face(FaceOrientation::YT, {x, y, 0, t});
        add_face(FaceOrientation::YT, {x + 1, y, 0, t});

        for (std::size_t i = 0; i < cell_faces.size(); ++i)
          for (std::size_t j = i + 1; j < cell_faces.size(); ++j) {
            const ElementId lo = std::min(cell_faces[i], cell_faces[j]);
            const ElementId hi = std::max(cell_faces[i], cell_faces[j]);
            if (!emitted.insert(pair_hash(lo, hi)).second) continue;
            const RankId hi_owner =
                face_owner(all_blocks, decode_face_id(hi, dims), dims);
            if (hi_owner != block.rank) continue;
            const RankId lo_owner =
                face_owner(all_blocks, decode_face_id(lo, dims), dims);
            edges.push_back(GraphEdge{{hi, hi_owner}, {lo, lo_owner}});
          }
      }
  std::sort(edges.begin(), edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return std::tie(a.a.id, a.b.id) < std::tie(b.a.id, b.b.id);
  });
  return edges;
}

std::vector<GraphEdge> local_edges_levelset(const Volume& vol, const Block& block,
                                            double threshold,
                                            const std::vector<Block>& all_blocks) {
  vol.validate();
  const Dims& dims = vol.dims;
  const std::size_t sd = dims.spatial_nd();
  const AxisRange cx = cell_anchors(block.ghosted[0], dims.spatial[0]);
  const AxisRange cy = cell_anchors(block.ghosted[1], dims.spatial[1]);
  const AxisRange cz = sd == 3 ? cell_anchors(block.ghosted[2], dims.spatial[2])
                               : AxisRange{0, 1};
  const AxisRange ct = cell_anchors(block.ghosted[sd], dims.t);

  const std::size_t corners = std::size_t{1} << (sd + 1);
  std::vector<GraphEdge> edges;
  std::unordered_set<std::uint64_t> emitted;
  auto pair_hash = [](ElementId lo, ElementId hi) {
    return lo * 0x9e3779b97f4a7c15ull ^ hi;
  };

  std::vector<std::pair<ElementId, GridPoint>> hot;
  for (std::uint32_t t = ct.lo; t < ct.hi; ++t)
    for (std::uint32_t z = cz.lo; z < cz.hi; ++z)
      for (std::uint32_t y = cy.lo; y < cy.hi; ++y)
        for (std::uint32_t x = cx.lo; x < cx.hi; ++x) {
          hot.clear();
          for (std::size_t c = 0; c < corners; ++c) {
            GridPoint p{x + (static_cast<std::uint32_t>(c) & 1u),
                        y + ((static_cast<std::uint32_t>(c) >> 1) & 1u),
                        sd == 3 ? z + ((static_cast<std::uint32_t>(c) >> 2) & 1u) : 0,
                        t + ((static_cast<std::uint32_t>(c) >> (sd)) & 1u)};
            if (static_cast<double>(vol.at(p)) > threshold)
              hot.emplace_back(encode_vertex_id(p, dims), p);
          }
          for (std::size_t i = 0; i < hot.size(); ++i)
            for (std::size_t j = i + 1; j < hot.size(); ++j) {
              auto [id_i, p_i] = hot[i];
              auto [id_j, p_j] = hot[j];
              const ElementId lo = std::min(id_i, id_j);
              const ElementId hi = std::max(id_i, id_j);
              if (!emitted.insert(pair_hash(lo, hi)).second) continue;
              const GridPoint& hi_p = id_i > id_j ? p_i : p_j;
              const GridPoint& lo_p = id_i > id_j ? p_j : p_i;
              const RankId hi_owner = core_owner(all_blocks, hi_p, dims);
              if (hi_owner != block.rank) continue;
              edges.push_back(
                  GraphEdge{{hi, hi_owner}, {lo, core_owner(all_blocks, lo_p, dims)}});
            }
        }
  std::sort(edges.begin(), edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return std::tie(a.a.id, a.b.id) < std::tie(b.a.id, b.b.id);
  });
  return edges;
}

}  // namespace ftccl
