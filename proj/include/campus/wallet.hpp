#pragma once

#include <filesystem>
#include <optional>
#include <span>

#include "campus/address.hpp"
#include "campus/ecdsa.hpp"
#include "campus/error.hpp"
#include "campus/ledger.hpp"

namespace campus::wallet {

struct KeyPair {
  ecdsa::PrivateKey private_key{};
  ecdsa::PublicKey public_key{};
};

/// Without a seed, draws from the OS CSPRNG. With a seed (test mode), the seed
/// bytes are the first candidate scalar; a candidate outside [1, n-1] is
/// replaced by SHA-256 of itself until one is in range.
KeyPair generate_keypair(std::optional<std::span<const std::uint8_t, 32>> seed = std::nullopt);

/// Convenience for tests: the seed is the big-endian 256-bit integer `value`.
KeyPair keypair_from_seed(std::uint64_t value);

/// "vj1" + hex of the last 20 bytes of SHA-256(compressed public key).
/// Throws Error(INVALID_PUBKEY) for anything but a valid 33-byte compressed point.
Address derive_address(std::span<const std::uint8_t> public_key);

inline Address address_of(const KeyPair& key) { return derive_address(key.public_key); }

/// Sets public_key, recomputes tx_id and attaches a deterministic signature.
/// TRANSFER requires tx.from to be the key's address (ADDRESS_MISMATCH).
ledger::Transaction sign_transaction(ledger::Transaction tx, const KeyPair& key);

/// Signature validity over the canonical unsigned bytes plus sender binding.
/// For MINT the sender must be the AUTHORITY sentinel; validator membership is
/// the economy's check. Reasons: BAD_SIG, ADDRESS_MISMATCH, MALFORMED.
Verdict verify_signature(const ledger::Transaction& tx);

// Keyfile: canonical JSON {address, private_key, public_key}, mode 0600.
void save_keyfile(const std::filesystem::path& path, const KeyPair& key);
KeyPair load_keyfile(const std::filesystem::path& path);

}  // namespace campus::wallet
