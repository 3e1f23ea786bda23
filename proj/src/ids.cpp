#include "ftccl/ids.hpp"

namespace ftccl {

void Dims::validate() const {
  if (spatial.empty() || spatial.size() > 3)
    throw InputError("dims: expected 1-3 spatial axes, got " + std::to_string(spatial.size()));
  if (t < 2) throw InputError("dims: time axis must have at least 2 samples");
  for (auto s : spatial)
    if (s < 2) throw InputError("dims: every spatial axis must have at least 2 samples");
}

ElementId encode_vertex_id(const GridPoint& p, const Dims& dims) {
  dims.validate();
  if (p.t >= dims.t) throw InputError("encode_vertex_id: t index out of bounds");
  for (std::size_t i = 0; i < dims.spatial_nd(); ++i)
    if (p.axis(i) >= dims.spatial[i])
      throw InputError("encode_vertex_id: spatial index out of bounds");
  for (std::size_t i = dims.spatial_nd(); i < 3; ++i)
    if (p.axis(i) != 0) throw InputError("encode_vertex_id: coordinate on inactive axis");

  ElementId id = p.t;
  for (std::size_t i = dims.spatial_nd(); i-- > 0;) id = id * dims.spatial[i] + p.axis(i);
  return id;
}

GridPoint decode_vertex_id(ElementId id, const Dims& dims) {
  dims.validate();
  if (id >= dims.num_vertices()) throw InputError("decode_vertex_id: id out of range");
  GridPoint p;
  for (std::size_t i = 0; i < dims.spatial_nd(); ++i) {
    p.axis(i) = static_cast<std::uint32_t>(id % dims.spatial[i]);
    id /= dims.spatial[i];
  }
  p.t = static_cast<std::uint32_t>(id);
  return p;
}

namespace {

struct FaceBlocks {
  // quad counts per orientation, in XY, XT, YT order
  std::array<std::uint64_t, 3> quads;
  std::array<std::uint64_t, 3> offsets;  // triangle-id offsets within the face block
  std::uint64_t total_triangles;
};

FaceBlocks face_blocks(const Dims& dims) {
  if (dims.spatial_nd() != 2)
    throw InputError("face ids are defined for 2D+time grids only");
  const std::uint64_t x = dims.spatial[0], y = dims.spatial[1], t = dims.t;
  FaceBlocks b{};
  b.quads = {(x - 1) * (y - 1) * t, (x - 1) * y * (t - 1), x * (y - 1) * (t - 1)};
  std::uint64_t off = 0;
  for (int i = 0; i < 3; ++i) {
    b.offsets[i] = off;
    off += 2 * b.quads[i];
  }
  b.total_triangles = off;
  return b;
}

// Per-orientation anchor grid extents (x, y, t).
std::array<std::uint32_t, 3> anchor_extents(FaceOrientation o, const Dims& dims) {
  const std::uint32_t x = dims.spatial[0], y = dims.spatial[1], t = dims.t;
  switch (o) {
    case FaceOrientation::XY: return {x - 1, y - 1, t};
    case FaceOrientation::XT: return {x - 1, y, t - 1};
    default: return {x, y - 1, t - 1};
  }
}

}  // namespace

ElementId face_id_begin(const Dims& dims) { return dims.num_vertices(); }

ElementId face_id_end(const Dims& dims) {
  return dims.num_vertices() + face_blocks(dims).total_triangles;
}

ElementId encode_face_id(const FaceKey& key, const Dims& dims) {
  dims.validate();
  const auto blocks = face_blocks(dims);
  const auto ext = anchor_extents(key.orientation, dims);
  const auto& a = key.anchor;
  if (a.x >= ext[0] || a.y >= ext[1] || a.t >= ext[2] || a.z != 0)
    throw InputError("encode_face_id: anchor out of bounds");
  const std::uint64_t quad =
      (static_cast<std::uint64_t>(a.t) * ext[1] + a.y) * ext[0] + a.x;
  return face_id_begin(dims) + blocks.offsets[static_cast<int>(key.orientation)] +
         2 * quad + static_cast<std::uint64_t>(key.triangle);
}

FaceKey decode_face_id(ElementId id, const Dims& dims) {
  const auto blocks = face_blocks(dims);
  const ElementId begin = face_id_begin(dims);
  if (id < begin || id >= begin + blocks.total_triangles)
    throw InputError("decode_face_id: id outside the face block");
  std::uint64_t rel = id - begin;
  int orient = 2;
  while (orient > 0 && rel < blocks.offsets[orient]) --orient;
  rel -= blocks.offsets[orient];

  FaceKey key;
  key.orientation = static_cast<FaceOrientation>(orient);
  key.triangle = static_cast<FaceTriangle>(rel & 1);
  std::uint64_t quad = rel >> 1;
  const auto ext = anchor_extents(key.orientation, dims);
  key.anchor.x = static_cast<std::uint32_t>(quad % ext[0]);
  quad /= ext[0];
  key.anchor.y = static_cast<std::uint32_t>(quad % ext[1]);
  key.anchor.t = static_cast<std::uint32_t>(quad / ext[1]);
  return key;
}

std::array<GridPoint, 3> face_triangle_corners(const FaceKey& key) {
  GridPoint c00 = key.anchor, cu = key.anchor, cv = key.anchor, c11 = key.anchor;
  auto bump = [](GridPoint& p, FaceOrientation o, bool u, bool v) {
    switch (o) {
      case FaceOrientation::XY:
        p.x += u;
        p.y += v;
        break;
      case FaceOrientation::XT:
        p.x += u;
        p.t += v;
        break;
      default:
        p.y += u;
        p.t += v;
        break;
    }
  };
  bump(cu, key.orientation, true, false);
  bump(cv, key.orientation, false, true);
  bump(c11, key.orientation, true, true);
  // Diagonal c00-c11 is shared by both triangles.
  if (key.triangle == FaceTriangle::Lower) return {c00, cu, c11};
  return {c00, c11, cv};
}

std::string to_string(FaceOrientation o) {
  switch (o) {
    case FaceOrientation::XY: return "xy";
    case FaceOrientation::XT: return "xt";
    default: return "yt";
  }
}

}  // namespace ftccl
