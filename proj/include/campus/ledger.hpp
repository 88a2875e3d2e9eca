#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "campus/address.hpp"
#include "campus/bytes.hpp"
#include "campus/canonical_json.hpp"
#include "campus/ecdsa.hpp"
#include "campus/error.hpp"

namespace campus::ledger {

enum class TxKind { kTransfer, kMint };

std::string_view to_string(TxKind kind);

inline constexpr std::size_t kMaxMemoBytes = 256;

/// A signed value transfer or validator issuance.
///
/// `tx_id` is SHA-256 of the canonical JSON of every field except `tx_id` and
/// `signature`; the signature is ECDSA over that same digest. An empty
/// signature marks a transaction that has not been signed yet.
struct Transaction {
  Hash256 tx_id{};
  TxKind kind = TxKind::kTransfer;
  Address from;
  Address to;
  std::uint64_t amount = 0;
  std::uint64_t nonce = 0;
  std::uint64_t timestamp = 0;
  std::string memo;
  ecdsa::PublicKey public_key{};
  std::optional<ecdsa::Signature> signature;

  bool operator==(const Transaction&) const = default;
};

struct BlockHeader {
  std::uint64_t height = 0;
  Hash256 prev_hash{};
  Hash256 merkle_root{};
  std::uint64_t timestamp = 0;
  Address proposer;
  std::optional<ecdsa::Signature> seal_signature;

  bool operator==(const BlockHeader&) const = default;
};

struct Block {
  BlockHeader header;
  std::vector<Transaction> transactions;

  bool operator==(const Block&) const = default;
};

// Canonical encoding ------------------------------------------------------

Json to_json(const Transaction& tx);
Json to_json(const BlockHeader& header);
Json to_json(const Block& block);

/// Strict decoders: exact field set, exact types, lowercase hex. Throw Error(MALFORMED).
Transaction transaction_from_json(const Json& j);
BlockHeader header_from_json(const Json& j);
Block block_from_json(const Json& j);

std::string encode(const Transaction& tx);
std::string encode(const Block& block);
Transaction decode_transaction(std::string_view bytes);
Block decode_block(std::string_view bytes);

/// Canonical bytes of the transaction without `tx_id` and `signature`.
std::string unsigned_bytes(const Transaction& tx);
/// Canonical bytes of the header without `seal_signature`.
std::string header_bytes(const BlockHeader& header);

Hash256 compute_tx_id(const Transaction& tx);

/// Fills `tx_id` from the current field values.
Transaction with_tx_id(Transaction tx);

// Hashing -----------------------------------------------------------------

/// Bitcoin-style tree over SHA-256 leaves of each full canonical transaction;
/// an odd level duplicates its last node; no transactions hash the empty string.
Hash256 compute_merkle_root(const std::vector<Transaction>& txs);

Hash256 hash_block(const BlockHeader& header);

// Validation --------------------------------------------------------------

/// Structural successor check of `block` against the current tip `prev`.
/// Checks run in order height, prev_hash, merkle_root, timestamp, signatures;
/// the verdict names the first failure.
Verdict validate_block(const Block& block, const Block& prev);

struct ChainVerdict {
  std::optional<Errc> failure;
  std::uint64_t height = 0;
  std::string detail;

  bool ok() const noexcept { return !failure.has_value(); }
  explicit operator bool() const noexcept { return ok(); }
};

/// Per-block seal check supplied by the consensus layer.
using SealCheck = std::function<Verdict(const Block&)>;

/// Accepts iff chain[0] equals `genesis`, every adjacent pair passes
/// validate_block, and every non-genesis block passes `seal_check`.
/// Reports the first failing height.
ChainVerdict verify_chain(const std::vector<Block>& chain, const Block& genesis, const SealCheck& seal_check);

}  // namespace campus::ledger
