#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <mutex>
#include <span>
#include <string>
#include <unordered_set>

#include "campus/bytes.hpp"

/// secp256k1 ECDSA with deterministic (RFC 6979, HMAC-SHA256) nonces and
/// low-S normalised signatures encoded as 64 bytes r || s.
namespace campus::ecdsa {

using PrivateKey = std::array<std::uint8_t, 32>;
using PublicKey = std::array<std::uint8_t, 33>;
using Signature = std::array<std::uint8_t, 64>;

/// True iff 1 <= key < n.
bool is_valid_private_key(const PrivateKey& key);

/// Compressed point key * G. Requires a valid private key.
PublicKey public_key_of(const PrivateKey& key);

/// Accepts only 33-byte compressed encodings of points on the curve.
bool is_valid_public_key(std::span<const std::uint8_t> encoded);

/// The RFC 6979 candidate nonce for (key, digest); exposed for vector tests.
PrivateKey deterministic_nonce(const PrivateKey& key, const Hash256& digest);

Signature sign(const PrivateKey& key, const Hash256& digest);

/// Public key recovery for recovery id 0 (even R.y) or 1 (odd R.y).
/// Returns nullopt when no valid key results.
std::optional<PublicKey> recover(const Hash256& digest, const Signature& signature, int recovery_id);

/// Rejects high-S signatures and r, s outside [1, n-1].
bool verify(const PublicKey& key, const Hash256& digest, const Signature& signature);

/// Bounded set of (key, digest, signature) triples already proven valid.
/// Only successes are stored, so a lookup miss always falls back to full
/// verification. Thread-safe; cleared wholesale when it reaches capacity.
class VerificationCache {
 public:
  explicit VerificationCache(std::size_t capacity = 1 << 17) : capacity_(capacity) {}

  static VerificationCache& shared();

  static Hash256 entry_key(std::span<const std::uint8_t> key, const Hash256& digest, const Signature& signature);

  bool contains(const Hash256& entry) const;
  void insert(const Hash256& entry);
  void clear();

 private:
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::unordered_set<std::string> entries_;
};

/// verify() backed by VerificationCache::shared().
bool verify_cached(const PublicKey& key, const Hash256& digest, const Signature& signature);

}  // namespace campus::ecdsa
