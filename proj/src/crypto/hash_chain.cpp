#include "sermt/crypto/hash_chain.hpp"

#include <algorithm>

namespace sermt::crypto {

HashChain::HashChain(ByteView seed, std::size_t length) {
  if (length == 0) throw std::invalid_argument("hash chain length must be >= 1");
  keys_.reserve(length);
  keys_.push_back(sha1(seed));
  while (keys_.size() < length) keys_.push_back(sha1(keys_.back()));
  next_ = length;
}

std::optional<ChainKey> HashChain::release() {
  if (next_ <= 1) return std::nullopt;
  --next_;
  return keys_[next_ - 1];
}

HashChain build_hash_chain(ByteView seed, std::size_t length) { return HashChain(seed, length); }

ChainCheck verify_chain_key(ByteView candidate, ByteView anchor, std::size_t max_steps) {
  if (candidate.size() != kDigestSize || anchor.size() != kDigestSize) return {};
  ChainKey cur{};
  std::copy(candidate.begin(), candidate.end(), cur.begin());
  for (std::size_t steps = 0;; ++steps) {
    if (equal_constant_shape(cur, anchor)) return {true, steps};
    if (steps == max_steps) return {};
    cur = sha1(cur);
  }
}

ChainVerifier::ChainVerifier(const ChainKey& anchor, std::size_t max_steps)
    : latest_(anchor), max_steps_(max_steps) {}

ChainCheck ChainVerifier::peek(ByteView candidate, bool allow_current) const {
  ChainCheck check = verify_chain_key(candidate, latest_, max_steps_);
  if (check.accepted && check.steps == 0 && !allow_current) return {};
  return check;
}

ChainCheck ChainVerifier::accept(ByteView candidate, bool allow_current) {
  const ChainCheck check = peek(candidate, allow_current);
  if (check.accepted) std::copy(candidate.begin(), candidate.end(), latest_.begin());
  return check;
}

void ChainVerifier::reset_anchor(const ChainKey& anchor) { latest_ = anchor; }

}  // namespace sermt::crypto
