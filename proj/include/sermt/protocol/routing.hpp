#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace sermt::protocol {

/// Directed graph over dense local indices. Callers that care about the
/// lexicographic tie-break must number nodes in ascending entity-ID order.
class Graph {
 public:
  struct Edge {
    std::size_t to;
    double weight;
  };

  explicit Graph(std::size_t nodes) : adj_(nodes) {}

  std::size_t size() const { return adj_.size(); }
  /// Infinite or NaN weights are ignored: such links are unusable.
  void add_edge(std::size_t from, std::size_t to, double weight);
  const std::vector<Edge>& out(std::size_t node) const { return adj_.at(node); }

 private:
  std::vector<std::vector<Edge>> adj_;
};

struct Path {
  std::vector<std::size_t> nodes;  // source first
  double cost = 0.0;
};

/// Minimum-total-weight path; among equal-cost paths the lexicographically
/// smallest node sequence wins. Weights must be positive.
std::optional<Path> shortest_path(const Graph& graph, std::size_t source, std::size_t target);

/// Same labels, every reachable node at once (index = node).
std::vector<std::optional<Path>> shortest_paths_from(const Graph& graph, std::size_t source);

}  // namespace sermt::protocol
