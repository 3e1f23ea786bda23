#include "ftccl/balance.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

namespace ftccl {

namespace {

KdBox bounding_box(const std::vector<FeaturePoint>& points, std::size_t lo, std::size_t hi,
                   std::size_t axes) {
  KdBox box;
  if (lo >= hi) return box;
  for (std::size_t a = 0; a < axes; ++a) box.lo[a] = box.hi[a] = points[lo].coords[a];
  for (std::size_t i = lo + 1; i < hi; ++i)
    for (std::size_t a = 0; a < axes; ++a) {
      box.lo[a] = std::min(box.lo[a], points[i].coords[a]);
      box.hi[a] = std::max(box.hi[a], points[i].coords[a]);
    }
  return box;
}

std::size_t widest_axis(const KdBox& box, std::size_t axes) {
  std::size_t best = 0;
  double best_extent = -1.0;
  for (std::size_t a = 0; a < axes; ++a) {
    const double extent = box.hi[a] - box.lo[a];
    if (extent > best_extent) {
      best_extent = extent;
      best = a;
    }
  }
  return best;
}

struct KdBuilder {
  std::vector<FeaturePoint>& points;
  std::size_t axes;
  KdAssignment& out;

  void build(std::size_t lo, std::size_t hi, RankId rank_lo, RankId rank_hi) {
    if (rank_hi - rank_lo == 1) {
      out.boxes[rank_lo] = bounding_box(points, lo, hi, axes);
      out.counts[rank_lo] = hi - lo;
      for (std::size_t i = lo; i < hi; ++i) out.assignment.emplace(points[i].id, rank_lo);
      return;
    }
    const RankId ranks = rank_hi - rank_lo;
    const RankId left_ranks = (ranks + 1) / 2;
    const std::size_t n = hi - lo;
    const std::size_t k =
        (n * static_cast<std::size_t>(left_ranks) + ranks - 1) / ranks;  // ceil

    const auto box = bounding_box(points, lo, hi, axes);
    const std::size_t axis = widest_axis(box, axes);
    if (k > 0 && k < n) {
      std::nth_element(points.begin() + lo, points.begin() + lo + k, points.begin() + hi,
                       [axis](const FeaturePoint& a, const FeaturePoint& b) {
                         if (a.coords[axis] != b.coords[axis])
                           return a.coords[axis] < b.coords[axis];
                         return a.id < b.id;
                       });
    }
    build(lo, lo + std::min(k, n), rank_lo, rank_lo + left_ranks);
    build(lo + std::min(k, n), hi, rank_lo + left_ranks, rank_hi);
  }
};

}  // namespace

KdAssignment kd_partition(const std::vector<FeaturePoint>& points, std::uint32_t num_ranks,
                          std::size_t axes) {
  if (num_ranks < 1) throw InputError("kd_partition: num_ranks must be >= 1");
  if (axes < 1 || axes > 4) throw InputError("kd_partition: 1-4 axes supported");
  KdAssignment out;
  out.boxes.resize(num_ranks);
  out.counts.assign(num_ranks, 0);
  out.assignment.reserve(points.size());
  std::vector<FeaturePoint> scratch(points);
  KdBuilder builder{scratch, axes, out};
  builder.build(0, scratch.size(), 0, num_ranks);
  return out;
}

namespace {

struct MoveBatch {
  std::vector<FeatureRecord> features;
  std::vector<GraphEdge> edges;
};

RankId assigned_rank(const KdAssignment& assignment, ElementId id) {
  auto it = assignment.assignment.find(id);
  if (it == assignment.assignment.end())
    throw InputError("repartition: feature " + std::to_string(id) +
                     " missing from the assignment");
  return it->second;
}

}  // namespace

std::pair<std::vector<RankFeatureSet>, RunMetrics> repartition(
    const std::vector<RankFeatureSet>& states, const KdAssignment& assignment,
    std::uint64_t seed) {
  const auto num_ranks = static_cast<std::uint32_t>(states.size());
  std::vector<RankFeatureSet> result(num_ranks);

  auto step = [&](RankId rank, int& phase, std::vector<MoveBatch>&& inbox) {
    StepOutput<MoveBatch> out;
    for (auto& batch : inbox) {
      auto& mine = result[rank];
      mine.features.insert(mine.features.end(), batch.features.begin(), batch.features.end());
      mine.edges.insert(mine.edges.end(), batch.edges.begin(), batch.edges.end());
      out.changed = true;
    }
    if (phase == 0) {
      phase = 1;
      std::map<RankId, MoveBatch> outgoing;
      for (const auto& f : states[rank].features)
        outgoing[assigned_rank(assignment, f.id)].features.push_back(f);
      for (const auto& e : states[rank].edges) {
        GraphEdge moved = e;
        moved.a.rank = assigned_rank(assignment, e.a.id);
        moved.b.rank = assigned_rank(assignment, e.b.id);
        const RankId dst = moved.a.id > moved.b.id ? moved.a.rank : moved.b.rank;
        outgoing[dst].edges.push_back(moved);
      }
      for (auto& [dst, batch] : outgoing) {
        if (dst == rank) {
          auto& mine = result[rank];
          mine.features.insert(mine.features.end(), batch.features.begin(),
                               batch.features.end());
          mine.edges.insert(mine.edges.end(), batch.edges.begin(), batch.edges.end());
        } else {
          out.out.emplace_back(dst, std::move(batch));
        }
      }
      out.changed = true;
    }
    return out;
  };

  std::vector<int> phases(num_ranks, 0);
  Schedule schedule{seed, Mode::Async, 3};
  SimTransport<MoveBatch> transport(num_ranks, schedule);
  RunMetrics metrics = run_ranks(phases, step, transport, schedule);
  return {std::move(result), std::move(metrics)};
}

bool should_balance(const std::vector<std::uint64_t>& per_rank_counts) {
  if (per_rank_counts.empty()) return false;
  std::uint64_t total = 0, max = 0;
  for (auto c : per_rank_counts) {
    total += c;
    max = std::max(max, c);
  }
  if (total == 0) return false;
  const double mean = static_cast<double>(total) / per_rank_counts.size();
  return static_cast<double>(max) / mean > 2.0;
}

std::string assignment_to_json(const KdAssignment& a) {
  nlohmann::json doc;
  doc["num_ranks"] = a.boxes.size();
  auto& ranks = doc["ranks"] = nlohmann::json::array();
  for (std::size_t r = 0; r < a.boxes.size(); ++r) {
    nlohmann::json entry;
    entry["rank"] = r;
    entry["count"] = a.counts[r];
    if (a.counts[r] > 0) {
      entry["box"] = {{"lo", a.boxes[r].lo}, {"hi", a.boxes[r].hi}};
    }
    ranks.push_back(std::move(entry));
  }
  return doc.dump(2);
}

}  // namespace ftccl
