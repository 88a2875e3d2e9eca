#pragma once

#include <random>
#include <string>
#include <vector>

#include "campus/consensus.hpp"
#include "campus/economy.hpp"
#include "campus/ledger.hpp"
#include "campus/wallet.hpp"

namespace fixtures {

using namespace campus;

inline ledger::Transaction transfer(const wallet::KeyPair& from, const Address& to, std::uint64_t amount,
                                    std::uint64_t nonce, std::uint64_t timestamp = 1'700'000'000,
                                    std::string memo = "") {
  ledger::Transaction tx;
  tx.kind = ledger::TxKind::kTransfer;
  tx.from = wallet::address_of(from);
  tx.to = to;
  tx.amount = amount;
  tx.nonce = nonce;
  tx.timestamp = timestamp;
  tx.memo = std::move(memo);
  return wallet::sign_transaction(std::move(tx), from);
}

inline consensus::Genesis genesis_for(const std::vector<wallet::KeyPair>& validators,
                                      std::string chain_id = "campus-test") {
  std::vector<Address> vs;
  for (const auto& k : validators) vs.push_back(wallet::address_of(k));
  return consensus::Genesis{std::move(chain_id), consensus::ValidatorSet(vs)};
}

/// Random but economically valid chain: validators mint, users transfer among
/// themselves. Produces `blocks` sealed blocks holding `tx_count` transactions.
struct ChainBuilder {
  std::vector<wallet::KeyPair> validators;
  std::vector<wallet::KeyPair> users;
  consensus::Genesis genesis;
  std::vector<ledger::Block> chain;
  economy::AccountState state;

  ChainBuilder(std::size_t n_validators, std::size_t n_users, std::uint64_t key_base = 1000) {
    for (std::size_t i = 0; i < n_validators; ++i) validators.push_back(wallet::keypair_from_seed(key_base + i));
    for (std::size_t i = 0; i < n_users; ++i) users.push_back(wallet::keypair_from_seed(key_base + 100 + i));
    genesis = genesis_for(validators);
    chain.push_back(genesis.block());
  }

  const wallet::KeyPair& proposer_for(std::uint64_t height) const {
    const Address& a = consensus::expected_proposer(height, genesis.validators);
    for (const auto& v : validators)
      if (wallet::address_of(v) == a) return v;
    throw std::logic_error("no key for proposer");
  }

  /// Next random valid transaction against `pending`, updating it.
  ledger::Transaction random_tx(std::mt19937_64& rng, economy::AccountState& pending, std::uint64_t ts) {
    std::uniform_int_distribution<std::size_t> pick_user(0, users.size() - 1);
    const bool mint = pending.total_minted == 0 || rng() % 3 == 0;
    ledger::Transaction tx;
    if (mint) {
      const auto& v = validators[rng() % validators.size()];
      const auto& to = users[pick_user(rng)];
      economy::MintIssuer issuer(v, pending.next_nonce(wallet::address_of(v)));
      tx = issuer.mint(wallet::address_of(to), 1 + rng() % 500, "mint", ts);
    } else {
      // Pick a funded sender.
      std::vector<std::size_t> funded;
      for (std::size_t i = 0; i < users.size(); ++i)
        if (pending.balance_of(wallet::address_of(users[i])) > 0) funded.push_back(i);
      const auto& from = users[funded[rng() % funded.size()]];
      const auto& to = users[pick_user(rng)];
      const Address fa = wallet::address_of(from);
      const std::uint64_t bal = pending.balance_of(fa);
      tx = transfer(from, wallet::address_of(to), 1 + rng() % bal, pending.next_nonce(fa), ts, "pay");
    }
    economy::apply_in_place(pending, tx, genesis.validators);
    return tx;
  }

  void build(std::size_t blocks, std::size_t tx_count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t n = tx_count / blocks + (b < tx_count % blocks ? 1 : 0);
      const std::uint64_t ts = 1'700'000'000 + 5 * (chain.size());
      std::vector<ledger::Transaction> txs;
      for (std::size_t i = 0; i < n; ++i) txs.push_back(random_tx(rng, state, ts));
      const std::uint64_t height = chain.back().header.height + 1;
      chain.push_back(consensus::propose_block(chain.back(), std::move(txs), ts, proposer_for(height),
                                               genesis.validators));
    }
  }
};

}  // namespace fixtures
