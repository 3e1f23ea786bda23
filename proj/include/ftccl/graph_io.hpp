#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ftccl/graph.hpp"

namespace ftccl {

/// Edge list parsed from the raw-graph text format: one edge per line as two
/// decimal ids separated by whitespace; lines starting with '#' are comments.
/// Malformed lines are reported with their line number.
std::vector<std::pair<ElementId, ElementId>> read_edge_list(std::istream& in,
                                                            const std::string& name);
std::vector<std::pair<ElementId, ElementId>> read_edge_list_file(const std::string& path);

/// Partition file: `id rank` pairs, one per line, '#' comments.
std::vector<std::pair<ElementId, RankId>> read_partition_pairs(std::istream& in,
                                                               const std::string& name);
std::vector<std::pair<ElementId, RankId>> read_partition_file(const std::string& path);

/// Builds the distributed input graph for the ccl/oracle commands. With a
/// partition file every edge endpoint must be listed; without one, ids are
/// range-partitioned evenly across num_ranks.
GraphPartition load_graph(const std::string& graph_path, const std::string& partition_path,
                          std::uint32_t num_ranks);

/// Label output: text lines `element root`, sorted by element id.
void write_labels(std::ostream& out, const std::map<ElementId, ElementId>& labels);
void write_labels_file(const std::string& path, const std::map<ElementId, ElementId>& labels);

}  // namespace ftccl
