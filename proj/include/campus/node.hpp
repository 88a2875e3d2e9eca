#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "campus/append_log.hpp"
#include "campus/consensus.hpp"
#include "campus/economy.hpp"
#include "campus/positions.hpp"
#include "campus/research.hpp"

namespace campus::node {

struct NodeConfig {
  research::AwardSchedule award_schedule;
  std::uint64_t award_budget = 10'000;  // per ranklist per period
  positions::AllocationPolicy allocation;
  std::uint64_t block_interval_s = 5;
  std::uint64_t token_ttl_s = 30 * 24 * 3600;
  std::size_t max_block_txs = 500;
  std::string delivery_log;  // empty disables outbox delivery

  static NodeConfig from_json(const Json& j);
  static NodeConfig load(const std::filesystem::path& path);
  Json to_json() const;
};

using Clock = std::function<std::uint64_t()>;
std::uint64_t system_seconds();

enum class TxStatus { kUnknown, kPending, kCommitted };
std::string_view to_string(TxStatus s);

struct SubmitResult {
  Hash256 tx_id{};
  TxStatus status = TxStatus::kPending;
  std::optional<std::uint64_t> height;

  Json to_json() const;
};

/// Chain tip, mempool and the derived account states. All methods are
/// serialized through one lock; reads return copies.
class Node {
 public:
  Node(consensus::Genesis genesis, std::optional<std::filesystem::path> data_dir = std::nullopt,
       std::optional<wallet::KeyPair> validator_key = std::nullopt, Clock clock = system_seconds);

  const consensus::Genesis& genesis() const { return genesis_; }
  std::optional<Address> validator_address() const;
  std::uint64_t now() const { return clock_(); }
  void set_max_block_txs(std::size_t n) { max_block_txs_ = n == 0 ? 1 : n; }

  std::vector<ledger::Block> chain() const;
  std::optional<ledger::Block> block_at(std::uint64_t height) const;
  std::uint64_t height() const;
  Hash256 tip_hash() const;
  economy::AccountState committed_state() const;
  economy::AccountState pending_state() const;
  std::vector<ledger::Transaction> mempool() const;

  SubmitResult submit(const ledger::Transaction& tx);
  SubmitResult status_of(const Hash256& tx_id) const;

  /// Builds MINTs with this node's validator key and admits them all or none.
  std::vector<ledger::Transaction> issue(const std::function<std::vector<ledger::Transaction>(economy::MintIssuer&)>& build);
  ledger::Transaction mint(const Address& to, std::uint64_t amount, std::string memo);

  /// Seals the mempool into a block when this node is scheduled for the next height.
  std::optional<ledger::Block> produce_block(bool allow_empty = false);

  void accept_block(const ledger::Block& block);

  /// Switches to `candidate` if fork choice prefers it. Transactions orphaned by
  /// the switch go back to the mempool when still valid.
  bool adopt_chain(const std::vector<ledger::Block>& candidate);

  /// Sum of TRANSFER amounts to `to` carrying `memo`, committed plus pending.
  std::uint64_t memo_total(std::string_view memo, const Address& to) const;

  /// Number of committed or pending transactions of any kind carrying `memo`.
  std::size_t memo_count(std::string_view memo) const;

  /// Every transaction in chain order, with its height.
  std::vector<std::pair<std::uint64_t, ledger::Transaction>> committed_transactions() const;

 private:
  void admit_locked(const ledger::Transaction& tx, economy::AccountState& pending);
  void append_locked(const ledger::Block& block);
  void rebuild_mempool_locked(std::vector<ledger::Transaction> candidates);
  void persist_chain_locked();
  void persist_mempool_locked();
  SubmitResult status_locked(const Hash256& tx_id) const;

  consensus::Genesis genesis_;
  std::optional<wallet::KeyPair> key_;
  Clock clock_;
  std::size_t max_block_txs_ = 500;

  std::vector<ledger::Block> chain_;
  std::map<Hash256, std::uint64_t> committed_index_;
  economy::AccountState committed_;
  economy::AccountState pending_;
  std::vector<ledger::Transaction> mempool_;

  std::unique_ptr<AppendLog> chain_log_;
  std::unique_ptr<AppendLog> mempool_log_;
  mutable std::mutex mu_;
};

}  // namespace campus::node
