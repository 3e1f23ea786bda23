#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ftccl/errors.hpp"

namespace ftccl {

/// Globally unique, totally ordered identifier of a mesh entity or abstract
/// graph node. Vertex ids occupy [0, num_vertices); triangulated face ids
/// occupy a disjoint block above them.
using ElementId = std::uint64_t;

/// Identity of a simulated processor, in [0, num_ranks).
using RankId = std::uint32_t;

inline constexpr RankId kInvalidRank = 0xffffffffu;

/// Extents of a spacetime grid: one time axis (slowest varying) plus 1-3
/// spatial axes. `spatial` is ordered fastest-first: X[, Y[, Z]].
struct Dims {
  std::uint32_t t = 0;
  std::vector<std::uint32_t> spatial;

  std::size_t spatial_nd() const { return spatial.size(); }
  std::size_t nd() const { return spatial.size() + 1; }

  std::uint64_t num_vertices() const {
    std::uint64_t n = t;
    for (auto s : spatial) n *= s;
    return n;
  }

  /// Axis lengths ordered fastest-to-slowest: X, Y, Z, T (active axes only).
  std::vector<std::uint32_t> axes_fastest_first() const {
    std::vector<std::uint32_t> a(spatial);
    a.push_back(t);
    return a;
  }

  /// Throws InputError unless every axis length is >= 2 and 1-3 spatial axes exist.
  void validate() const;

  bool operator==(const Dims&) const = default;
};

/// Vertex coordinates; unused spatial axes stay zero.
struct GridPoint {
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  std::uint32_t z = 0;
  std::uint32_t t = 0;

  std::uint32_t axis(std::size_t i) const {
    switch (i) {
      case 0: return x;
      case 1: return y;
      case 2: return z;
      default: return t;
    }
  }
  std::uint32_t& axis(std::size_t i) {
    switch (i) {
      case 0: return x;
      case 1: return y;
      case 2: return z;
      default: return t;
    }
  }
  /// Coordinate along the i-th active axis of `dims`, fastest first
  /// (time is axis dims.spatial_nd()).
  std::uint32_t active_axis(std::size_t i, const Dims& dims) const {
    return i == dims.spatial_nd() ? t : axis(i);
  }

  bool operator==(const GridPoint&) const = default;
};

/// Row-major linearization with time as the slowest axis.
ElementId encode_vertex_id(const GridPoint& p, const Dims& dims);

/// Inverse of encode_vertex_id.
GridPoint decode_vertex_id(ElementId id, const Dims& dims);

/// Orientation of a quad 2-face of the 3D spacetime grid (2 spatial axes + time).
enum class FaceOrientation : std::uint8_t { XY = 0, XT = 1, YT = 2 };

/// Each quad face splits into two triangles along the fixed lower-left to
/// upper-right diagonal; Lower keeps the +u corner, Upper the +v corner.
enum class FaceTriangle : std::uint8_t { Lower = 0, Upper = 1 };

struct FaceKey {
  GridPoint anchor;  // minimum corner of the quad
  FaceOrientation orientation = FaceOrientation::XY;
  FaceTriangle triangle = FaceTriangle::Lower;

  bool operator==(const FaceKey&) const = default;
};

/// First id of the triangulated-face block (== num_vertices).
ElementId face_id_begin(const Dims& dims);
/// One past the last face id.
ElementId face_id_end(const Dims& dims);

/// Unique id for a face triangle, disjoint from the vertex block and strictly
/// monotone in (t, y, x, triangle) within each orientation class.
ElementId encode_face_id(const FaceKey& key, const Dims& dims);

/// Inverse of encode_face_id.
FaceKey decode_face_id(ElementId id, const Dims& dims);

/// The three corner vertices of a face triangle, in barycentric order
/// (shared diagonal corners first and last).
std::array<GridPoint, 3> face_triangle_corners(const FaceKey& key);

std::string to_string(FaceOrientation o);

}  // namespace ftccl
