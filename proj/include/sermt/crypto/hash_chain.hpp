#pragma once

#include <optional>

#include "sermt/crypto/sha1.hpp"

namespace sermt::crypto {

using ChainKey = Digest;

/// One-way SHA-1 chain K_1..K_n with sha1(K_i) = K_{i+1}. K_n is the public
/// anchor; keys are released in reverse generation order (K_{n-1} first) and
/// each index is released at most once.
class HashChain {
 public:
  HashChain(ByteView seed, std::size_t length);

  const ChainKey& anchor() const { return keys_.back(); }
  std::size_t length() const { return keys_.size(); }
  /// 1-based index K_i.
  const ChainKey& key(std::size_t index) const { return keys_.at(index - 1); }

  /// Keys still releasable, excluding the anchor.
  std::size_t remaining() const { return next_ - 1; }
  /// Index the next release() will hand out (0 once exhausted).
  std::size_t next_index() const { return next_ - 1; }
  std::optional<ChainKey> release();

 private:
  std::vector<ChainKey> keys_;
  std::size_t next_;  // 1-based index of the last key released (length() before any release)
};

HashChain build_hash_chain(ByteView seed, std::size_t length);

struct ChainCheck {
  bool accepted = false;
  std::size_t steps = 0;
};

/// Accepted iff hashing `candidate` between 0 and max_steps times yields `anchor`.
ChainCheck verify_chain_key(ByteView candidate, ByteView anchor, std::size_t max_steps);

/// Receiver-side state for one server's chain: tracks the most recently
/// accepted key so that keys older than it are rejected as replays.
class ChainVerifier {
 public:
  ChainVerifier() = default;
  ChainVerifier(const ChainKey& anchor, std::size_t max_steps);

  /// `allow_current` lets the latest accepted key be presented again (batched
  /// frames released under one key); otherwise the candidate must be strictly
  /// newer. Accepting advances the state.
  ChainCheck accept(ByteView candidate, bool allow_current);
  /// Same check without advancing the state.
  ChainCheck peek(ByteView candidate, bool allow_current) const;

  void reset_anchor(const ChainKey& anchor);
  const ChainKey& latest() const { return latest_; }

 private:
  ChainKey latest_{};
  std::size_t max_steps_ = 0;
};

}  // namespace sermt::crypto
