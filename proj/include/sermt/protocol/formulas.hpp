#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sermt/grid/types.hpp"

namespace sermt::protocol {

using grid::EntityId;

class ProtocolError : public std::runtime_error {
 public:
  enum class Kind { UndefinedTrust, Format, Config };
  ProtocolError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr double kTrustThreshold = 40.0;
inline constexpr double kInfiniteWeight = std::numeric_limits<double>::infinity();

/// TV = 100 * delivered / sent. Throws UndefinedTrust when sent == 0 and
/// Format when delivered > sent.
double compute_trust(std::uint32_t delivered, std::uint32_t sent);

/// Strictly above the threshold: TV = 40 is not trusted.
inline bool is_trusted(double tv) { return tv > kTrustThreshold; }

/// DF = BP * TV * C
inline double forwarding_score(double bp, double tv, double c) { return bp * tv * c; }
/// CV = BP * TV * Cn
inline double candidate_value(double bp, double tv, double cn) { return bp * tv * cn; }

/// W = D / (BP * TV); +inf when BP * TV == 0 (node unusable as next hop).
double route_weight(double distance, double bp, double tv);

struct Candidate {
  EntityId id = 0;
  double bp = 0.0;
  double tv = 0.0;
  double connectivity = 0.0;  // C for forwarders, Cn for cluster heads
};

/// Index-free argmax of a score; ties resolve to the lower ID.
std::optional<EntityId> argmax_score(const std::vector<std::pair<EntityId, double>>& scored);

/// argmax DF over the candidates (lower ID on ties).
std::optional<EntityId> select_forwarder(const std::vector<Candidate>& candidates);
/// argmax CV over the candidates (lower ID on ties).
std::optional<EntityId> elect_cluster_head(const std::vector<Candidate>& members);

}  // namespace sermt::protocol
