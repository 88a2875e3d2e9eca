#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "campus/consensus.hpp"
#include "campus/ledger.hpp"
#include "campus/wallet.hpp"

namespace campus::economy {

/// Balances and next-expected nonces derived by replaying the ledger.
/// Conservation: the sum of balances always equals total_minted.
struct AccountState {
  std::map<Address, std::uint64_t> balances;
  std::map<Address, std::uint64_t> nonces;
  std::uint64_t total_minted = 0;

  std::uint64_t balance_of(const Address& a) const;
  std::uint64_t next_nonce(const Address& a) const;
  bool operator==(const AccountState&) const = default;
};

/// Address whose nonce a transaction consumes: the sender for TRANSFER, the
/// signing validator for MINT.
Address nonce_account(const ledger::Transaction& tx);

/// Pure transition. Throws Error(BAD_NONCE | INSUFFICIENT_BALANCE | UNAUTHORIZED_MINT);
/// the input state is never modified.
AccountState apply_transaction(const AccountState& state, const ledger::Transaction& tx,
                               const consensus::ValidatorSet& vset);

/// In-place variant with the strong guarantee: on throw, `state` is unchanged.
void apply_in_place(AccountState& state, const ledger::Transaction& tx, const consensus::ValidatorSet& vset);

/// Applies every transaction of one block. On failure throws the underlying
/// Error with details {height, tx_index}.
void apply_block(AccountState& state, const ledger::Block& block, const consensus::ValidatorSet& vset);

/// Left fold over the chain; genesis contributes nothing.
AccountState replay_chain(const std::vector<ledger::Block>& chain, const consensus::ValidatorSet& vset);

/// Issues validator-signed MINT transactions with consecutive nonces.
class MintIssuer {
 public:
  MintIssuer(wallet::KeyPair key, std::uint64_t next_nonce) : key_(std::move(key)), next_nonce_(next_nonce) {}

  ledger::Transaction mint(const Address& to, std::uint64_t amount, std::string memo, std::uint64_t timestamp);

  Address address() const { return wallet::address_of(key_); }
  std::uint64_t next_nonce() const { return next_nonce_; }

 private:
  wallet::KeyPair key_;
  std::uint64_t next_nonce_;
};

// Crowdfunding -------------------------------------------------------------

enum class CampaignStatus { kOpen, kClosed };

/// Invariants: raised <= goal; status is CLOSED exactly when raised == goal.
struct Campaign {
  std::string campaign_id;
  Address beneficiary;
  std::uint64_t goal = 0;
  std::uint64_t raised = 0;
  CampaignStatus status = CampaignStatus::kOpen;
  std::string description;
  std::uint64_t created_at = 0;

  std::uint64_t remaining() const { return goal - raised; }
  bool operator==(const Campaign&) const = default;
};

Json to_json(const Campaign& c);
Campaign campaign_from_json(const Json& j);

/// "campaign:<id>"; donations are recognisable on-chain by this memo.
std::string campaign_memo(std::string_view campaign_id);

/// Throws Error(ZERO_GOAL | UNKNOWN_BENEFICIARY).
Campaign create_campaign(std::string campaign_id, const Address& beneficiary, std::uint64_t goal,
                         std::string description, std::uint64_t created_at,
                         const std::function<bool(const Address&)>& is_member);

struct Donation {
  Campaign campaign;
  ledger::Transaction transfer;
};

/// Admits a donor-signed TRANSFER to the beneficiary carrying the campaign memo.
/// Throws CAMPAIGN_CLOSED, INVALID_DONATION, OVERSHOOT (details.remaining) or
/// INSUFFICIENT_BALANCE against `donor_view`. Exactly filling the goal closes
/// the campaign.
Donation donate(const Campaign& campaign, const ledger::Transaction& signed_transfer, const AccountState& donor_view);

/// Client-side helper: builds and signs the donation transfer.
ledger::Transaction donation_transfer(const Campaign& campaign, const wallet::KeyPair& donor, std::uint64_t amount,
                                      std::uint64_t nonce, std::uint64_t timestamp);

}  // namespace campus::economy
