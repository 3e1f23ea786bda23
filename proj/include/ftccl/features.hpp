#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "ftccl/ids.hpp"

namespace ftccl {

enum class FeatureKind : std::uint8_t { Critical = 0, LevelSet = 1 };

enum class CriticalKind : std::uint8_t { Maximum = 0, Minimum = 1, Saddle = 2 };

/// One detected feature as it travels through balancing, union-find gather,
/// and trajectory output. For critical points `time` and `coords` are the
/// continuous spacetime position; for level-set vertices they are the grid
/// indices of the vertex.
struct FeatureRecord {
  ElementId id = 0;
  FeatureKind kind = FeatureKind::LevelSet;
  CriticalKind cp_kind = CriticalKind::Maximum;  // critical points only
  double time = 0.0;
  std::array<double, 3> coords{0.0, 0.0, 0.0};  // x, y[, z]
  double value = 0.0;

  bool operator==(const FeatureRecord&) const = default;
};

inline std::string to_string(FeatureKind k) {
  return k == FeatureKind::Critical ? "critical" : "levelset";
}

inline std::string to_string(CriticalKind k) {
  switch (k) {
    case CriticalKind::Maximum: return "maximum";
    case CriticalKind::Minimum: return "minimum";
    default: return "saddle";
  }
}

}  // namespace ftccl
