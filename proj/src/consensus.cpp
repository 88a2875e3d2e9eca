#include "campus/consensus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace campus::consensus {

ValidatorSet::ValidatorSet(std::vector<Address> validators) : validators_(std::move(validators)) {
  std::set<Address> seen;
  for (const auto& v : validators_) {
    if (v.is_authority()) throw Error(Errc::MALFORMED, "AUTHORITY cannot be a validator");
    if (!seen.insert(v).second) throw Error(Errc::MALFORMED, "duplicate validator " + v.str());
  }
}

bool ValidatorSet::contains(const Address& a) const {
  return std::find(validators_.begin(), validators_.end(), a) != validators_.end();
}

Genesis Genesis::from_json(const Json& j) {
  if (!j.is_object() || j.size() != 2 || !j.contains("chain_id") || !j.contains("validators") ||
      !j["chain_id"].is_string() || !j["validators"].is_array())
    throw Error(Errc::MALFORMED, "genesis must be {\"chain_id\": string, \"validators\": [address...]}");
  std::vector<Address> vs;
  for (const auto& v : j["validators"]) {
    auto a = v.is_string() ? Address::parse(v.get<std::string>()) : std::nullopt;
    if (!a || a->is_authority()) throw Error(Errc::MALFORMED, "invalid validator address in genesis");
    vs.push_back(*a);
  }
  if (vs.empty()) throw Error(Errc::EMPTY_VALIDATOR_SET, "genesis lists no validators");
  return Genesis{j["chain_id"].get<std::string>(), ValidatorSet(std::move(vs))};
}

Genesis Genesis::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IO_ERROR, "cannot read genesis " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_json(Json::parse(ss.str()));
  } catch (const Json::exception& e) {
    throw Error(Errc::MALFORMED, std::string("genesis is not JSON: ") + e.what());
  }
}

Json Genesis::to_json() const {
  Json vs = Json::array();
  for (const auto& v : validators.validators()) vs.push_back(v.str());
  return Json{{"chain_id", chain_id}, {"validators", std::move(vs)}};
}

ledger::Block Genesis::block() const {
  ledger::Block b;
  b.header.height = 0;
  b.header.merkle_root = ledger::compute_merkle_root({});
  b.header.timestamp = 0;
  b.header.proposer = expected_proposer(0, validators);
  return b;
}

const Address& expected_proposer(std::uint64_t height, const ValidatorSet& vset) {
  if (vset.empty()) throw Error(Errc::EMPTY_VALIDATOR_SET, "validator set is empty");
  return vset.validators()[height % vset.size()];
}

Seal seal_block(const ledger::BlockHeader& header, const wallet::KeyPair& validator_key, const ValidatorSet& vset) {
  const Address signer = wallet::address_of(validator_key);
  const Address& scheduled = expected_proposer(header.height, vset);
  if (signer != scheduled)
    throw Error(Errc::NOT_SCHEDULED, "key is not the scheduled proposer for this height",
                {{"height", header.height}, {"scheduled", scheduled.str()}, {"signer", signer.str()}});
  ledger::BlockHeader signed_header = header;
  signed_header.proposer = signer;
  return Seal{signer, ecdsa::sign(validator_key.private_key, ledger::hash_block(signed_header))};
}

Verdict verify_seal(const ledger::Block& block, const ValidatorSet& vset) {
  const auto& h = block.header;
  if (vset.empty()) return Verdict::reject(Errc::EMPTY_VALIDATOR_SET);
  if (h.proposer != expected_proposer(h.height, vset))
    return Verdict::reject(Errc::WRONG_PROPOSER, h.proposer.str() + " is not scheduled at this height");
  if (!h.seal_signature) return Verdict::reject(Errc::BAD_SEAL_SIGNATURE, "block is unsealed");
  const Hash256 digest = ledger::hash_block(h);
  auto& cache = ecdsa::VerificationCache::shared();
  const Hash256 entry = ecdsa::VerificationCache::entry_key(as_bytes(h.proposer.str()), digest, *h.seal_signature);
  if (cache.contains(entry)) return Verdict::accept();
  for (int recovery_id : {0, 1}) {
    auto key = ecdsa::recover(digest, *h.seal_signature, recovery_id);
    if (key && wallet::derive_address(*key) == h.proposer && ecdsa::verify(*key, digest, *h.seal_signature)) {
      cache.insert(entry);
      return Verdict::accept();
    }
  }
  return Verdict::reject(Errc::BAD_SEAL_SIGNATURE, "seal does not verify under the proposer's key");
}

ledger::Block propose_block(const ledger::Block& prev, std::vector<ledger::Transaction> txs, std::uint64_t timestamp,
                            const wallet::KeyPair& validator_key, const ValidatorSet& vset) {
  ledger::Block block;
  block.header.height = prev.header.height + 1;
  block.header.prev_hash = ledger::hash_block(prev.header);
  block.header.timestamp = std::max(timestamp, prev.header.timestamp);
  block.transactions = std::move(txs);
  block.header.merkle_root = ledger::compute_merkle_root(block.transactions);
  const Seal seal = seal_block(block.header, validator_key, vset);
  block.header.proposer = seal.proposer;
  block.header.seal_signature = seal.signature;
  return block;
}

ledger::ChainVerdict verify_chain(const std::vector<ledger::Block>& chain, const Genesis& genesis) {
  return ledger::verify_chain(chain, genesis.block(),
                              [&](const ledger::Block& b) { return verify_seal(b, genesis.validators); });
}

const std::vector<ledger::Block>& fork_choice(const std::vector<ledger::Block>& a, const std::vector<ledger::Block>& b,
                                              const Genesis& genesis) {
  if (auto v = verify_chain(a, genesis); !v)
    throw Error(Errc::INVALID_CHAIN, "first chain invalid: " + v.detail, {{"height", v.height}});
  if (auto v = verify_chain(b, genesis); !v)
    throw Error(Errc::INVALID_CHAIN, "second chain invalid: " + v.detail, {{"height", v.height}});
  if (a.size() != b.size()) return a.size() > b.size() ? a : b;
  return ledger::hash_block(a.back().header) <= ledger::hash_block(b.back().header) ? a : b;
}

}  // namespace campus::consensus
