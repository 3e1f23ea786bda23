#include "ftccl/synth.hpp"

#include <cmath>
#include <random>

namespace ftccl {

namespace {

constexpr double kTwoPi = 6.283185307179586;

// Engine output mapped to [0, 1) without std::uniform_real_distribution,
// whose rounding is implementation-defined.
double u01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * u01(rng);
}

struct Bump {
  double cx, cy;      // center at t = 0
  double radius;      // spiral radius; 0 for columns
  double omega, phase;

  void center_at(double t, double& x, double& y) const {
    x = cx + radius * std::cos(omega * t + phase);
    y = cy + radius * std::sin(omega * t + phase);
  }
};

struct NoiseWave {
  double fx, fy, ft, phase, weight;
};

}  // namespace

Volume generate(const SynthSpec& spec) {
  spec.dims.validate();
  if (spec.dims.spatial_nd() != 2)
    throw InputError("generate: the synthetic family is 2D+time");

  const double nx = spec.dims.spatial[0], ny = spec.dims.spatial[1], nt = spec.dims.t;
  std::mt19937_64 rng(spec.seed ^ 0x5851f42d4c957f2dull);

  std::vector<Bump> bumps;
  for (std::uint32_t i = 0; i < spec.n_spirals; ++i) {
    Bump b;
    b.cx = uniform(rng, 0.3 * nx, 0.7 * nx);
    b.cy = uniform(rng, 0.3 * ny, 0.7 * ny);
    b.radius = uniform(rng, 0.12, 0.3) * std::min(nx, ny);
    b.omega = uniform(rng, 0.5, 2.0) * kTwoPi / nt;
    b.phase = uniform(rng, 0.0, kTwoPi);
    bumps.push_back(b);
  }
  for (std::uint32_t i = 0; i < spec.n_columns; ++i) {
    Bump b;
    b.cx = uniform(rng, 0.1 * nx, 0.9 * nx);
    b.cy = uniform(rng, 0.1 * ny, 0.9 * ny);
    b.radius = 0.0;
    b.omega = 0.0;
    b.phase = 0.0;
    bumps.push_back(b);
  }

  std::vector<NoiseWave> waves;
  if (spec.noise > 0.0) {
    for (int i = 0; i < 3; ++i) {
      NoiseWave w;
      w.fx = uniform(rng, 0.5, 2.0) / nx;
      w.fy = uniform(rng, 0.5, 2.0) / ny;
      w.ft = uniform(rng, 0.5, 2.0) / nt;
      w.phase = uniform(rng, 0.0, kTwoPi);
      w.weight = spec.noise / 3.0;
      waves.push_back(w);
    }
  }

  const double inv_two_sigma_sq = 1.0 / (2.0 * spec.bump_width * spec.bump_width);
  Volume vol;
  vol.dims = spec.dims;
  vol.values.resize(vol.dims.num_vertices());

  std::uint64_t idx = 0;
  for (std::uint32_t t = 0; t < spec.dims.t; ++t) {
    std::vector<std::pair<double, double>> centers(bumps.size());
    for (std::size_t b = 0; b < bumps.size(); ++b)
      bumps[b].center_at(t, centers[b].first, centers[b].second);
    for (std::uint32_t y = 0; y < spec.dims.spatial[1]; ++y)
      for (std::uint32_t x = 0; x < spec.dims.spatial[0]; ++x, ++idx) {
        double v = 0.0;
        for (const auto& [bx, by] : centers) {
          const double dx = x - bx, dy = y - by;
          v += spec.amplitude * std::exp(-(dx * dx + dy * dy) * inv_two_sigma_sq);
        }
        for (const auto& w : waves)
          v += w.weight *
               std::sin(kTwoPi * (w.fx * x + w.fy * y + w.ft * t) + w.phase);
        vol.values[idx] = static_cast<float>(std::clamp(v, -1.0, 1.0));
      }
  }
  return vol;
}

}  // namespace ftccl
