#include "campus/ledger.hpp"

#include <algorithm>
#include <set>

#include "campus/wallet.hpp"

namespace campus::ledger {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(Errc::MALFORMED, what); }

void expect_keys(const Json& j, std::initializer_list<const char*> keys, const char* what) {
  if (!j.is_object()) malformed(std::string(what) + " must be an object");
  if (j.size() != keys.size()) malformed(std::string(what) + " has unexpected fields");
  for (const char* k : keys)
    if (!j.contains(k)) malformed(std::string(what) + " missing field " + k);
}

std::uint64_t get_u64(const Json& j, const char* key) {
  const Json& v = j.at(key);
  if (!v.is_number_unsigned()) malformed(std::string(key) + " must be an unsigned integer");
  return v.get<std::uint64_t>();
}

const std::string& get_str(const Json& j, const char* key) {
  const Json& v = j.at(key);
  if (!v.is_string()) malformed(std::string(key) + " must be a string");
  return v.get_ref<const std::string&>();
}

template <std::size_t N>
std::array<std::uint8_t, N> get_hex(const Json& j, const char* key) {
  auto v = from_hex_fixed<N>(get_str(j, key));
  if (!v) malformed(std::string(key) + " must be " + std::to_string(N) + " bytes of lowercase hex");
  return *v;
}

template <std::size_t N>
std::optional<std::array<std::uint8_t, N>> get_optional_hex(const Json& j, const char* key) {
  if (get_str(j, key).empty()) return std::nullopt;
  return get_hex<N>(j, key);
}

Address get_address(const Json& j, const char* key) {
  auto a = Address::parse(get_str(j, key));
  if (!a) malformed(std::string(key) + " is not an address");
  return *a;
}

TxKind get_kind(const Json& j) {
  const auto& s = get_str(j, "kind");
  if (s == "TRANSFER") return TxKind::kTransfer;
  if (s == "MINT") return TxKind::kMint;
  malformed("unknown transaction kind " + s);
}

std::string optional_hex(const std::optional<ecdsa::Signature>& sig) { return sig ? to_hex(*sig) : std::string(); }

Json unsigned_json(const Transaction& tx) {
  return Json{{"amount", tx.amount},     {"from", tx.from.str()},
              {"kind", to_string(tx.kind)}, {"memo", tx.memo},
              {"nonce", tx.nonce},       {"public_key", to_hex(tx.public_key)},
              {"timestamp", tx.timestamp}, {"to", tx.to.str()}};
}

Json header_json_unsealed(const BlockHeader& h) {
  return Json{{"height", h.height},
              {"merkle_root", to_hex(h.merkle_root)},
              {"prev_hash", to_hex(h.prev_hash)},
              {"proposer", h.proposer.str()},
              {"timestamp", h.timestamp}};
}

Hash256 hash_pair(const Hash256& left, const Hash256& right) {
  std::array<std::uint8_t, 64> buf{};
  std::copy(left.begin(), left.end(), buf.begin());
  std::copy(right.begin(), right.end(), buf.begin() + 32);
  return sha256(buf);
}

}  // namespace

std::string_view to_string(TxKind kind) { return kind == TxKind::kMint ? "MINT" : "TRANSFER"; }

Json to_json(const Transaction& tx) {
  Json j = unsigned_json(tx);
  j["signature"] = optional_hex(tx.signature);
  j["tx_id"] = to_hex(tx.tx_id);
  return j;
}

Json to_json(const BlockHeader& header) {
  Json j = header_json_unsealed(header);
  j["seal_signature"] = optional_hex(header.seal_signature);
  return j;
}

Json to_json(const Block& block) {
  Json txs = Json::array();
  for (const auto& tx : block.transactions) txs.push_back(to_json(tx));
  return Json{{"header", to_json(block.header)}, {"transactions", std::move(txs)}};
}

Transaction transaction_from_json(const Json& j) {
  expect_keys(j, {"amount", "from", "kind", "memo", "nonce", "public_key", "signature", "timestamp", "to", "tx_id"},
              "transaction");
  Transaction tx;
  tx.tx_id = get_hex<32>(j, "tx_id");
  tx.kind = get_kind(j);
  tx.from = get_address(j, "from");
  tx.to = get_address(j, "to");
  tx.amount = get_u64(j, "amount");
  tx.nonce = get_u64(j, "nonce");
  tx.timestamp = get_u64(j, "timestamp");
  tx.memo = get_str(j, "memo");
  tx.public_key = get_hex<33>(j, "public_key");
  tx.signature = get_optional_hex<64>(j, "signature");
  if (tx.amount < 1) malformed("amount must be at least 1");
  if (tx.memo.size() > kMaxMemoBytes) malformed("memo exceeds 256 bytes");
  if (tx.to.is_authority()) malformed("AUTHORITY cannot receive coins");
  return tx;
}

BlockHeader header_from_json(const Json& j) {
  expect_keys(j, {"height", "merkle_root", "prev_hash", "proposer", "seal_signature", "timestamp"}, "header");
  BlockHeader h;
  h.height = get_u64(j, "height");
  h.prev_hash = get_hex<32>(j, "prev_hash");
  h.merkle_root = get_hex<32>(j, "merkle_root");
  h.timestamp = get_u64(j, "timestamp");
  h.proposer = get_address(j, "proposer");
  h.seal_signature = get_optional_hex<64>(j, "seal_signature");
  return h;
}

Block block_from_json(const Json& j) {
  expect_keys(j, {"header", "transactions"}, "block");
  Block b;
  b.header = header_from_json(j.at("header"));
  const Json& txs = j.at("transactions");
  if (!txs.is_array()) malformed("transactions must be an array");
  b.transactions.reserve(txs.size());
  for (const auto& t : txs) b.transactions.push_back(transaction_from_json(t));
  return b;
}

std::string encode(const Transaction& tx) { return canonical_dump(to_json(tx)); }
std::string encode(const Block& block) { return canonical_dump(to_json(block)); }

Transaction decode_transaction(std::string_view bytes) {
  return transaction_from_json(parse_canonical(bytes));
}

Block decode_block(std::string_view bytes) { return block_from_json(parse_canonical(bytes)); }

std::string unsigned_bytes(const Transaction& tx) { return canonical_dump(unsigned_json(tx)); }

std::string header_bytes(const BlockHeader& header) { return canonical_dump(header_json_unsealed(header)); }

Hash256 compute_tx_id(const Transaction& tx) { return sha256(unsigned_bytes(tx)); }

Transaction with_tx_id(Transaction tx) {
  tx.tx_id = compute_tx_id(tx);
  return tx;
}

Hash256 compute_merkle_root(const std::vector<Transaction>& txs) {
  if (txs.empty()) return sha256(std::string_view{});
  std::vector<Hash256> level;
  level.reserve(txs.size());
  for (const auto& tx : txs) level.push_back(sha256(encode(tx)));
  while (level.size() > 1) {
    if (level.size() % 2 == 1) level.push_back(level.back());
    std::vector<Hash256> parents;
    parents.reserve(level.size() / 2);
    for (std::size_t i = 0; i < level.size(); i += 2) parents.push_back(hash_pair(level[i], level[i + 1]));
    level = std::move(parents);
  }
  return level.front();
}

Hash256 hash_block(const BlockHeader& header) { return sha256(header_bytes(header)); }

Verdict validate_block(const Block& block, const Block& prev) {
  const BlockHeader& h = block.header;
  if (h.height != prev.header.height + 1)
    return Verdict::reject(Errc::BAD_HEIGHT, "expected height " + std::to_string(prev.header.height + 1));
  if (h.prev_hash != hash_block(prev.header)) return Verdict::reject(Errc::BAD_PREV_HASH, "prev_hash does not link");
  if (h.merkle_root != compute_merkle_root(block.transactions))
    return Verdict::reject(Errc::BAD_MERKLE, "merkle_root does not commit to the body");
  if (h.timestamp < prev.header.timestamp) return Verdict::reject(Errc::BAD_TIMESTAMP, "timestamp precedes parent");
  for (std::size_t i = 0; i < block.transactions.size(); ++i) {
    Verdict v = wallet::verify_signature(block.transactions[i]);
    if (!v) return Verdict::reject(Errc::BAD_SIGNATURE, "tx " + std::to_string(i) + ": " + std::string(to_string(*v.failure)));
  }
  return Verdict::accept();
}

ChainVerdict verify_chain(const std::vector<Block>& chain, const Block& genesis, const SealCheck& seal_check) {
  if (chain.empty()) return {Errc::BAD_GENESIS, 0, "empty chain"};
  if (chain.front() != genesis) return {Errc::BAD_GENESIS, 0, "genesis does not match configuration"};
  for (std::size_t i = 1; i < chain.size(); ++i) {
    if (Verdict v = validate_block(chain[i], chain[i - 1]); !v) return {v.failure, i, v.detail};
    if (Verdict v = seal_check(chain[i]); !v) return {v.failure, i, v.detail};
  }
  return {};
}

}  // namespace campus::ledger
