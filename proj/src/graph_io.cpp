#include "ftccl/graph_io.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>

namespace ftccl {

namespace {

bool blank_or_comment(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

// Parses exactly two unsigned decimal fields with nothing but whitespace
// around them. strtoull-based: edge files run to millions of lines.
bool parse_u64_pair(const std::string& line, std::uint64_t& a, std::uint64_t& b) {
  const char* p = line.c_str();
  auto skip_ws = [&p] {
    while (*p == ' ' || *p == '\t' || *p == '\r') ++p;
  };
  auto parse_one = [&](std::uint64_t& v) {
    skip_ws();
    if (*p < '0' || *p > '9') return false;
    char* end = nullptr;
    errno = 0;
    v = std::strtoull(p, &end, 10);
    if (errno == ERANGE) return false;
    p = end;
    return true;
  };
  if (!parse_one(a) || !parse_one(b)) return false;
  skip_ws();
  return *p == '\0';
}

[[noreturn]] void malformed(const std::string& name, std::size_t line_no,
                            const std::string& line) {
  throw InputError(name + ":" + std::to_string(line_no) + ": malformed line '" + line + "'");
}

template <class Fn>
void for_each_data_line(std::istream& in, const std::string& name, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_or_comment(line)) continue;
    fn(line, line_no);
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

}  // namespace

std::vector<std::pair<ElementId, ElementId>> read_edge_list(std::istream& in,
                                                            const std::string& name) {
  std::vector<std::pair<ElementId, ElementId>> edges;
  for_each_data_line(in, name, [&](const std::string& line, std::size_t line_no) {
    std::uint64_t a, b;
    if (!parse_u64_pair(line, a, b)) malformed(name, line_no, line);
    edges.emplace_back(a, b);
  });
  return edges;
}

std::vector<std::pair<ElementId, ElementId>> read_edge_list_file(const std::string& path) {
  auto in = open_input(path);
  return read_edge_list(in, path);
}

std::vector<std::pair<ElementId, RankId>> read_partition_pairs(std::istream& in,
                                                               const std::string& name) {
  std::vector<std::pair<ElementId, RankId>> pairs;
  for_each_data_line(in, name, [&](const std::string& line, std::size_t line_no) {
    std::uint64_t id, rank;
    if (!parse_u64_pair(line, id, rank) || rank > 0xffffffffull)
      malformed(name, line_no, line);
    pairs.emplace_back(id, static_cast<RankId>(rank));
  });
  return pairs;
}

std::vector<std::pair<ElementId, RankId>> read_partition_file(const std::string& path) {
  auto in = open_input(path);
  return read_partition_pairs(in, path);
}

GraphPartition load_graph(const std::string& graph_path, const std::string& partition_path,
                          std::uint32_t num_ranks) {
  const auto edges = read_edge_list_file(graph_path);
  if (partition_path.empty())
    return GraphPartition::range_partitioned({}, edges, num_ranks);

  std::unordered_map<ElementId, RankId> assignment;
  for (const auto& [id, rank] : read_partition_file(partition_path)) {
    if (rank >= num_ranks)
      throw InputError(partition_path + ": rank " + std::to_string(rank) +
                       " out of range for " + std::to_string(num_ranks) + " ranks");
    if (auto [it, inserted] = assignment.emplace(id, rank); !inserted && it->second != rank)
      throw InputError(partition_path + ": element " + std::to_string(id) +
                       " assigned to two ranks");
  }
  for (const auto& [a, b] : edges) {
    if (!assignment.count(a))
      throw InputError(graph_path + ": element " + std::to_string(a) +
                       " missing from the partition file");
    if (!assignment.count(b))
      throw InputError(graph_path + ": element " + std::to_string(b) +
                       " missing from the partition file");
  }
  return GraphPartition::from_assignment(assignment, edges, num_ranks);
}

void write_labels(std::ostream& out, const std::map<ElementId, ElementId>& labels) {
  for (const auto& [element, root] : labels) out << element << ' ' << root << '\n';
}

void write_labels_file(const std::string& path, const std::map<ElementId, ElementId>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_labels(out, labels);
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace ftccl
