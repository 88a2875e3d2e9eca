#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "campus/address.hpp"
#include "campus/ledger.hpp"
#include "campus/wallet.hpp"

/// Proof-of-Authority: a static, ordered validator set fixed at genesis; the
/// proposer for height h is validators[h mod |validators|].
namespace campus::consensus {

class ValidatorSet {
 public:
  ValidatorSet() = default;
  /// Throws Error(MALFORMED) on duplicate addresses or the AUTHORITY sentinel.
  explicit ValidatorSet(std::vector<Address> validators);

  const std::vector<Address>& validators() const { return validators_; }
  std::uint64_t epoch() const { return 0; }
  bool empty() const { return validators_.empty(); }
  std::size_t size() const { return validators_.size(); }
  bool contains(const Address& a) const;

 private:
  std::vector<Address> validators_;
};

struct Seal {
  Address proposer;
  ecdsa::Signature signature{};
};

/// Genesis configuration: canonical JSON {"chain_id": string, "validators": [address...]}.
struct Genesis {
  std::string chain_id;
  ValidatorSet validators;

  static Genesis from_json(const Json& j);
  static Genesis load(const std::filesystem::path& path);
  Json to_json() const;

  /// Height 0, zero prev_hash, empty body, timestamp 0, proposer validators[0], unsealed.
  ledger::Block block() const;
};

/// Throws Error(EMPTY_VALIDATOR_SET).
const Address& expected_proposer(std::uint64_t height, const ValidatorSet& vset);

/// Signs the canonical header bytes. Throws Error(NOT_SCHEDULED) unless the
/// key's address is the scheduled proposer for header.height.
Seal seal_block(const ledger::BlockHeader& header, const wallet::KeyPair& validator_key, const ValidatorSet& vset);

/// The seal signature commits to the header with proposer set; the public key
/// is recovered from the signature and must hash to the proposer address.
Verdict verify_seal(const ledger::Block& block, const ValidatorSet& vset);

/// Builds, commits and seals the successor of `prev`.
ledger::Block propose_block(const ledger::Block& prev, std::vector<ledger::Transaction> txs, std::uint64_t timestamp,
                            const wallet::KeyPair& validator_key, const ValidatorSet& vset);

ledger::ChainVerdict verify_chain(const std::vector<ledger::Block>& chain, const Genesis& genesis);

/// Longer chain wins; equal length goes to the lexicographically smaller tip
/// hash. Throws Error(INVALID_CHAIN) when either input fails verify_chain.
const std::vector<ledger::Block>& fork_choice(const std::vector<ledger::Block>& a, const std::vector<ledger::Block>& b,
                                              const Genesis& genesis);

}  // namespace campus::consensus
