#include "sermt/protocol/formulas.hpp"

namespace sermt::protocol {

double compute_trust(std::uint32_t delivered, std::uint32_t sent) {
  if (sent == 0) throw ProtocolError(ProtocolError::Kind::UndefinedTrust, "trust undefined: no test messages sent");
  if (delivered > sent) throw ProtocolError(ProtocolError::Kind::Format, "delivered exceeds sent");
  return static_cast<double>(delivered) / static_cast<double>(sent) * 100.0;
}

double route_weight(double distance, double bp, double tv) {
  const double denom = bp * tv;
  if (!(denom > 0.0)) return kInfiniteWeight;
  return distance / denom;
}

std::optional<EntityId> argmax_score(const std::vector<std::pair<EntityId, double>>& scored) {
  std::optional<std::pair<EntityId, double>> best;
  for (const auto& s : scored) {
    if (!best || s.second > best->second || (s.second == best->second && s.first < best->first)) best = s;
  }
  if (!best) return std::nullopt;
  return best->first;
}

std::optional<EntityId> select_forwarder(const std::vector<Candidate>& candidates) {
  std::vector<std::pair<EntityId, double>> scored;
  for (const auto& c : candidates) scored.emplace_back(c.id, forwarding_score(c.bp, c.tv, c.connectivity));
  return argmax_score(scored);
}

std::optional<EntityId> elect_cluster_head(const std::vector<Candidate>& members) {
  std::vector<std::pair<EntityId, double>> scored;
  for (const auto& c : members) scored.emplace_back(c.id, candidate_value(c.bp, c.tv, c.connectivity));
  return argmax_score(scored);
}

}  // namespace sermt::protocol
