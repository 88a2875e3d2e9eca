#include "campus/economy.hpp"

#include <limits>

namespace campus::economy {

std::uint64_t AccountState::balance_of(const Address& a) const {
  auto it = balances.find(a);
  return it == balances.end() ? 0 : it->second;
}

std::uint64_t AccountState::next_nonce(const Address& a) const {
  auto it = nonces.find(a);
  return it == nonces.end() ? 0 : it->second;
}

Address nonce_account(const ledger::Transaction& tx) {
  if (tx.kind == ledger::TxKind::kMint) return wallet::derive_address(tx.public_key);
  return tx.from;
}

void apply_in_place(AccountState& state, const ledger::Transaction& tx, const consensus::ValidatorSet& vset) {
  const Address account = nonce_account(tx);
  const std::uint64_t expected = state.next_nonce(account);
  if (tx.kind == ledger::TxKind::kMint && !vset.contains(account))
    throw Error(Errc::UNAUTHORIZED_MINT, "MINT signer is not a validator", {{"signer", account.str()}});
  if (tx.nonce != expected)
    throw Error(Errc::BAD_NONCE, tx.nonce < expected ? "nonce already used" : "nonce gap",
                {{"account", account.str()}, {"expected", expected}, {"got", tx.nonce}});

  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (tx.kind == ledger::TxKind::kMint) {
    if (state.total_minted > kMax - tx.amount) throw Error(Errc::MALFORMED, "minted supply overflow");
    state.balances[tx.to] += tx.amount;
    state.total_minted += tx.amount;
  } else {
    const std::uint64_t have = state.balance_of(tx.from);
    if (have < tx.amount)
      throw Error(Errc::INSUFFICIENT_BALANCE, "sender balance below amount",
                  {{"account", tx.from.str()}, {"balance", have}, {"amount", tx.amount}});
    state.balances[tx.from] = have - tx.amount;
    state.balances[tx.to] += tx.amount;
  }
  state.nonces[account] = expected + 1;
}

AccountState apply_transaction(const AccountState& state, const ledger::Transaction& tx,
                               const consensus::ValidatorSet& vset) {
  AccountState next = state;
  apply_in_place(next, tx, vset);
  return next;
}

void apply_block(AccountState& state, const ledger::Block& block, const consensus::ValidatorSet& vset) {
  AccountState working = state;
  for (std::size_t i = 0; i < block.transactions.size(); ++i) {
    try {
      apply_in_place(working, block.transactions[i], vset);
    } catch (const Error& e) {
      Json details = e.details();
      details["height"] = block.header.height;
      details["tx_index"] = i;
      throw Error(e.code(), e.what(), std::move(details));
    }
  }
  state = std::move(working);
}

AccountState replay_chain(const std::vector<ledger::Block>& chain, const consensus::ValidatorSet& vset) {
  AccountState state;
  for (std::size_t h = 1; h < chain.size(); ++h) apply_block(state, chain[h], vset);
  return state;
}

ledger::Transaction MintIssuer::mint(const Address& to, std::uint64_t amount, std::string memo,
                                     std::uint64_t timestamp) {
  ledger::Transaction tx;
  tx.kind = ledger::TxKind::kMint;
  tx.from = Address::authority();
  tx.to = to;
  tx.amount = amount;
  tx.nonce = next_nonce_;
  tx.timestamp = timestamp;
  tx.memo = std::move(memo);
  tx = wallet::sign_transaction(std::move(tx), key_);
  ++next_nonce_;
  return tx;
}

Json to_json(const Campaign& c) {
  return Json{{"beneficiary", c.beneficiary.str()},
              {"campaign_id", c.campaign_id},
              {"created_at", c.created_at},
              {"description", c.description},
              {"goal", c.goal},
              {"raised", c.raised},
              {"status", c.status == CampaignStatus::kOpen ? "OPEN" : "CLOSED"}};
}

Campaign campaign_from_json(const Json& j) {
  Campaign c;
  c.campaign_id = j.at("campaign_id").get<std::string>();
  auto beneficiary = Address::parse(j.at("beneficiary").get<std::string>());
  if (!beneficiary) throw Error(Errc::MALFORMED, "campaign beneficiary is not an address");
  c.beneficiary = *beneficiary;
  c.goal = j.at("goal").get<std::uint64_t>();
  c.raised = j.at("raised").get<std::uint64_t>();
  c.status = j.at("status").get<std::string>() == "OPEN" ? CampaignStatus::kOpen : CampaignStatus::kClosed;
  c.description = j.at("description").get<std::string>();
  c.created_at = j.at("created_at").get<std::uint64_t>();
  return c;
}

std::string campaign_memo(std::string_view campaign_id) { return "campaign:" + std::string(campaign_id); }

Campaign create_campaign(std::string campaign_id, const Address& beneficiary, std::uint64_t goal,
                         std::string description, std::uint64_t created_at,
                         const std::function<bool(const Address&)>& is_member) {
  if (goal == 0) throw Error(Errc::ZERO_GOAL, "campaign goal must be at least 1 coin");
  if (beneficiary.is_authority() || !is_member(beneficiary))
    throw Error(Errc::UNKNOWN_BENEFICIARY, "beneficiary is not a registered member",
                {{"beneficiary", beneficiary.str()}});
  return Campaign{std::move(campaign_id), beneficiary, goal, 0, CampaignStatus::kOpen, std::move(description),
                  created_at};
}

Donation donate(const Campaign& campaign, const ledger::Transaction& signed_transfer,
                const AccountState& donor_view) {
  const auto& tx = signed_transfer;
  if (campaign.status == CampaignStatus::kClosed)
    throw Error(Errc::CAMPAIGN_CLOSED, "campaign has reached its goal", {{"campaign_id", campaign.campaign_id}});
  if (tx.kind != ledger::TxKind::kTransfer || tx.to != campaign.beneficiary ||
      tx.memo != campaign_memo(campaign.campaign_id))
    throw Error(Errc::INVALID_DONATION, "donation must be a TRANSFER to the beneficiary with memo " +
                                            campaign_memo(campaign.campaign_id));
  if (tx.amount > campaign.remaining())
    throw Error(Errc::OVERSHOOT, "donation exceeds the amount still needed",
                {{"remaining", campaign.remaining()}, {"amount", tx.amount}});
  if (donor_view.balance_of(tx.from) < tx.amount)
    throw Error(Errc::INSUFFICIENT_BALANCE, "donor balance below amount",
                {{"balance", donor_view.balance_of(tx.from)}, {"amount", tx.amount}});

  Donation out{campaign, tx};
  out.campaign.raised += tx.amount;
  if (out.campaign.raised == out.campaign.goal) out.campaign.status = CampaignStatus::kClosed;
  return out;
}

ledger::Transaction donation_transfer(const Campaign& campaign, const wallet::KeyPair& donor, std::uint64_t amount,
                                      std::uint64_t nonce, std::uint64_t timestamp) {
  ledger::Transaction tx;
  tx.kind = ledger::TxKind::kTransfer;
  tx.from = wallet::address_of(donor);
  tx.to = campaign.beneficiary;
  tx.amount = amount;
  tx.nonce = nonce;
  tx.timestamp = timestamp;
  tx.memo = campaign_memo(campaign.campaign_id);
  return wallet::sign_transaction(std::move(tx), donor);
}

}  // namespace campus::economy
