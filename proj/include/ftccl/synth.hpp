#pragma once

#include "ftccl/mesh.hpp"

namespace ftccl {

/// Parameters of the synthetic spiral-and-columnar test family. Output values
/// always lie in [-1, 1]; the same spec produces bitwise-identical volumes.
struct SynthSpec {
  Dims dims;                  // 2D+time
  std::uint64_t seed = 0;
  std::uint32_t n_spirals = 0;
  std::uint32_t n_columns = 0;
  double bump_width = 5.0;    // Gaussian sigma, grid units
  double amplitude = 1.0;
  double noise = 0.02;        // smooth background noise amplitude; 0 disables
};

/// Sum of Gaussian bumps whose centers follow helical paths through time,
/// static columnar Gaussians, and low-frequency seeded noise, clamped to
/// [-1, 1]. More spirals/columns produce more detected features.
Volume generate(const SynthSpec& spec);

}  // namespace ftccl
