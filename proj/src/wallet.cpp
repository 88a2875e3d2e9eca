#include "campus/wallet.hpp"

#include <fstream>
#include <sstream>

#include <openssl/rand.h>

namespace campus::wallet {

namespace fs = std::filesystem;

KeyPair generate_keypair(std::optional<std::span<const std::uint8_t, 32>> seed) {
  ecdsa::PrivateKey candidate{};
  if (seed) {
    std::copy(seed->begin(), seed->end(), candidate.begin());
    while (!ecdsa::is_valid_private_key(candidate)) candidate = sha256(candidate);
  } else {
    do {
      if (RAND_bytes(candidate.data(), static_cast<int>(candidate.size())) != 1)
        throw Error(Errc::INTERNAL, "system entropy unavailable");
    } while (!ecdsa::is_valid_private_key(candidate));
  }
  return KeyPair{candidate, ecdsa::public_key_of(candidate)};
}

KeyPair keypair_from_seed(std::uint64_t value) {
  std::array<std::uint8_t, 32> seed{};
  for (int i = 0; i < 8; ++i) seed[31 - i] = static_cast<std::uint8_t>(value >> (8 * i));
  return generate_keypair(std::span<const std::uint8_t, 32>(seed));
}

Address derive_address(std::span<const std::uint8_t> public_key) {
  if (!ecdsa::is_valid_public_key(public_key))
    throw Error(Errc::INVALID_PUBKEY, "expected a 33-byte compressed secp256k1 point");
  const Hash256 digest = sha256(public_key);
  return *Address::parse(std::string(Address::kPrefix) + to_hex(std::span(digest).last<20>()));
}

ledger::Transaction sign_transaction(ledger::Transaction tx, const KeyPair& key) {
  if (tx.kind == ledger::TxKind::kTransfer && tx.from != address_of(key))
    throw Error(Errc::ADDRESS_MISMATCH, "transaction sender is not the signing key's address",
                {{"from", tx.from.str()}, {"key_address", address_of(key).str()}});
  tx.public_key = key.public_key;
  tx = ledger::with_tx_id(std::move(tx));
  tx.signature = ecdsa::sign(key.private_key, tx.tx_id);
  return tx;
}

Verdict verify_signature(const ledger::Transaction& tx) {
  if (tx.amount < 1 || tx.memo.size() > ledger::kMaxMemoBytes || tx.to.is_authority())
    return Verdict::reject(Errc::MALFORMED, "transaction fields out of range");
  if (!tx.signature) return Verdict::reject(Errc::BAD_SIG, "unsigned");
  const Hash256 digest = ledger::compute_tx_id(tx);
  if (digest != tx.tx_id) return Verdict::reject(Errc::BAD_SIG, "tx_id does not match contents");
  if (!ecdsa::verify_cached(tx.public_key, digest, *tx.signature)) return Verdict::reject(Errc::BAD_SIG, "signature invalid");
  if (tx.kind == ledger::TxKind::kMint) {
    if (!tx.from.is_authority()) return Verdict::reject(Errc::ADDRESS_MISMATCH, "MINT sender must be AUTHORITY");
  } else if (tx.from.is_authority() || derive_address(tx.public_key) != tx.from) {
    return Verdict::reject(Errc::ADDRESS_MISMATCH, "public key does not own the sender address");
  }
  return Verdict::accept();
}

void save_keyfile(const fs::path& path, const KeyPair& key) {
  const Json doc{{"address", address_of(key).str()},
                 {"private_key", to_hex(key.private_key)},
                 {"public_key", to_hex(key.public_key)}};
  {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(Errc::IO_ERROR, "cannot write keyfile " + path.string());
    fs::permissions(path, fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace);
    out << canonical_dump(doc) << '\n';
  }
}

KeyPair load_keyfile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IO_ERROR, "cannot read keyfile " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  const Json doc = parse_canonical(text);
  auto priv = from_hex_fixed<32>(doc.value("private_key", ""));
  if (!priv || !ecdsa::is_valid_private_key(*priv)) throw Error(Errc::MALFORMED, "keyfile private_key invalid");
  KeyPair key{*priv, ecdsa::public_key_of(*priv)};
  if (doc.value("public_key", "") != to_hex(key.public_key) || doc.value("address", "") != address_of(key).str())
    throw Error(Errc::MALFORMED, "keyfile public_key/address inconsistent with private_key");
  return key;
}

}  // namespace campus::wallet
