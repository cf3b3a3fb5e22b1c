#include "sermt/protocol/routing.hpp"

#include <cmath>
#include <queue>

namespace sermt::protocol {

void Graph::add_edge(std::size_t from, std::size_t to, double weight) {
  if (!std::isfinite(weight)) return;
  adj_.at(from).push_back(Edge{to, weight});
}

std::vector<std::optional<Path>> shortest_paths_from(const Graph& graph, std::size_t source) {
  std::vector<std::optional<Path>> best(graph.size());
  std::vector<bool> settled(graph.size(), false);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  best.at(source) = Path{{source}, 0.0};
  open.emplace(0.0, source);
  while (!open.empty()) {
    const auto [cost, u] = open.top();
    open.pop();
    if (settled[u] || cost != best[u]->cost) continue;
    settled[u] = true;
    for (const auto& e : graph.out(u)) {
      if (settled[e.to]) continue;
      const double c = cost + e.weight;
      auto& cur = best[e.to];
      bool better = !cur || c < cur->cost;
      if (!better && c == cur->cost) {
        // equal cost: compare the full node sequences
        std::vector<std::size_t> cand = best[u]->nodes;
        cand.push_back(e.to);
        better = cand < cur->nodes;
      }
      if (better) {
        Path p{best[u]->nodes, c};
        p.nodes.push_back(e.to);
        cur = std::move(p);
        open.emplace(c, e.to);
      }
    }
  }
  return best;
}

std::optional<Path> shortest_path(const Graph& graph, std::size_t source, std::size_t target) {
  if (source == target) return Path{{source}, 0.0};
  return shortest_paths_from(graph, source).at(target);
}

}  // namespace sermt::protocol
