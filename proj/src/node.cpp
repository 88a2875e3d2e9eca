#include "campus/node.hpp"

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

namespace campus::node {

namespace fs = std::filesystem;

namespace {

std::uint64_t get_u64_or(const Json& j, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw Error(Errc::MALFORMED, std::string("config ") + key + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

// Signature problems surface to clients as BAD_SIGNATURE; field-range problems stay MALFORMED.
Errc submit_code(Errc verdict) { return verdict == Errc::MALFORMED ? Errc::MALFORMED : Errc::BAD_SIGNATURE; }

}  // namespace

std::uint64_t system_seconds() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count());
}

NodeConfig NodeConfig::from_json(const Json& j) {
  if (!j.is_object()) throw Error(Errc::MALFORMED, "config must be a JSON object");
  static const std::set<std::string> known{"award_budget",     "award_schedule", "block_interval_s",
                                           "cold_start_threshold", "delivery_log", "epsilon_bp",
                                           "max_block_txs",    "token_ttl_s"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw Error(Errc::MALFORMED, "unknown config key " + k);
  NodeConfig c;
  if (j.contains("award_schedule")) c.award_schedule = research::AwardSchedule::from_json(j.at("award_schedule"));
  c.award_budget = get_u64_or(j, "award_budget", c.award_budget);
  c.allocation.epsilon_bp = static_cast<std::uint32_t>(get_u64_or(j, "epsilon_bp", c.allocation.epsilon_bp));
  if (c.allocation.epsilon_bp > 10'000) throw Error(Errc::MALFORMED, "epsilon_bp must be at most 10000");
  c.allocation.cold_start_threshold = get_u64_or(j, "cold_start_threshold", c.allocation.cold_start_threshold);
  c.block_interval_s = get_u64_or(j, "block_interval_s", c.block_interval_s);
  c.token_ttl_s = get_u64_or(j, "token_ttl_s", c.token_ttl_s);
  c.max_block_txs = get_u64_or(j, "max_block_txs", c.max_block_txs);
  if (c.max_block_txs == 0) throw Error(Errc::MALFORMED, "max_block_txs must be positive");
  if (j.contains("delivery_log")) {
    if (!j.at("delivery_log").is_string()) throw Error(Errc::MALFORMED, "delivery_log must be a string");
    c.delivery_log = j.at("delivery_log").get<std::string>();
  }
  return c;
}

NodeConfig NodeConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IO_ERROR, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_json(Json::parse(ss.str()));
  } catch (const Json::exception& e) {
    throw Error(Errc::MALFORMED, std::string("config is not JSON: ") + e.what());
  }
}

Json NodeConfig::to_json() const {
  return Json{{"award_budget", award_budget},
              {"award_schedule", award_schedule.to_json()},
              {"block_interval_s", block_interval_s},
              {"cold_start_threshold", allocation.cold_start_threshold},
              {"delivery_log", delivery_log},
              {"epsilon_bp", allocation.epsilon_bp},
              {"max_block_txs", max_block_txs},
              {"token_ttl_s", token_ttl_s}};
}

std::string_view to_string(TxStatus s) {
  switch (s) {
    case TxStatus::kPending:
      return "PENDING";
    case TxStatus::kCommitted:
      return "COMMITTED";
    case TxStatus::kUnknown:
      break;
  }
  return "UNKNOWN";
}

Json SubmitResult::to_json() const {
  Json j{{"status", node::to_string(status)}, {"tx_id", to_hex(tx_id)}};
  j["height"] = height ? Json(*height) : Json(nullptr);
  return j;
}

// Node ---------------------------------------------------------------------

Node::Node(consensus::Genesis genesis, std::optional<fs::path> data_dir, std::optional<wallet::KeyPair> validator_key,
           Clock clock)
    : genesis_(std::move(genesis)), key_(std::move(validator_key)), clock_(std::move(clock)) {
  if (genesis_.validators.empty()) throw Error(Errc::EMPTY_VALIDATOR_SET, "genesis lists no validators");
  chain_.push_back(genesis_.block());
  std::vector<ledger::Transaction> saved_mempool;

  if (data_dir) {
    fs::create_directories(*data_dir);
    chain_log_ = std::make_unique<AppendLog>(*data_dir / "chain.ndjson");
    const auto lines = chain_log_->read_all();
    if (!lines.empty()) {
      std::vector<ledger::Block> stored;
      try {
        for (const auto& line : lines) stored.push_back(ledger::decode_block(line));
      } catch (const Error& e) {
        throw Error(Errc::IO_ERROR, std::string("stored chain is unreadable: ") + e.what());
      }
      if (auto v = consensus::verify_chain(stored, genesis_); !v)
        throw Error(Errc::IO_ERROR, "stored chain fails verification at height " + std::to_string(v.height) + ": " +
                                        std::string(to_string(*v.failure)));
      chain_ = std::move(stored);
      committed_ = economy::replay_chain(chain_, genesis_.validators);
    } else {
      chain_log_->append(ledger::encode(chain_.front()));
      chain_log_->sync();
    }
    for (std::size_t h = 0; h < chain_.size(); ++h)
      for (const auto& tx : chain_[h].transactions) committed_index_[tx.tx_id] = h;

    mempool_log_ = std::make_unique<AppendLog>(*data_dir / "mempool.ndjson");
    for (const auto& line : mempool_log_->read_all()) {
      try {
        saved_mempool.push_back(ledger::decode_transaction(line));
      } catch (const Error&) {
        // unreadable entries are dropped; the mempool is advisory
      }
    }
  }
  pending_ = committed_;
  if (!saved_mempool.empty()) {
    rebuild_mempool_locked(std::move(saved_mempool));
    persist_mempool_locked();
  }
}

std::optional<Address> Node::validator_address() const {
  if (!key_) return std::nullopt;
  return wallet::address_of(*key_);
}

std::vector<ledger::Block> Node::chain() const {
  std::lock_guard lock(mu_);
  return chain_;
}

std::optional<ledger::Block> Node::block_at(std::uint64_t height) const {
  std::lock_guard lock(mu_);
  if (height >= chain_.size()) return std::nullopt;
  return chain_[height];
}

std::uint64_t Node::height() const {
  std::lock_guard lock(mu_);
  return chain_.back().header.height;
}

Hash256 Node::tip_hash() const {
  std::lock_guard lock(mu_);
  return ledger::hash_block(chain_.back().header);
}

economy::AccountState Node::committed_state() const {
  std::lock_guard lock(mu_);
  return committed_;
}

economy::AccountState Node::pending_state() const {
  std::lock_guard lock(mu_);
  return pending_;
}

std::vector<ledger::Transaction> Node::mempool() const {
  std::lock_guard lock(mu_);
  return mempool_;
}

SubmitResult Node::status_locked(const Hash256& tx_id) const {
  if (auto it = committed_index_.find(tx_id); it != committed_index_.end())
    return {tx_id, TxStatus::kCommitted, it->second};
  for (const auto& tx : mempool_)
    if (tx.tx_id == tx_id) return {tx_id, TxStatus::kPending, std::nullopt};
  return {tx_id, TxStatus::kUnknown, std::nullopt};
}

SubmitResult Node::status_of(const Hash256& tx_id) const {
  std::lock_guard lock(mu_);
  return status_locked(tx_id);
}

void Node::admit_locked(const ledger::Transaction& tx, economy::AccountState& pending) {
  if (Verdict v = wallet::verify_signature(tx); !v)
    throw Error(submit_code(*v.failure), "transaction rejected: " + v.detail,
                {{"reason", std::string(to_string(*v.failure))}});
  economy::apply_in_place(pending, tx, genesis_.validators);
}

SubmitResult Node::submit(const ledger::Transaction& tx) {
  std::lock_guard lock(mu_);
  if (auto s = status_locked(tx.tx_id); s.status != TxStatus::kUnknown) {
    // Same id with different contents is a forgery of the id, not a resubmission.
    if (Verdict v = wallet::verify_signature(tx); !v)
      throw Error(submit_code(*v.failure), "transaction rejected: " + v.detail);
    return s;
  }
  economy::AccountState next = pending_;
  admit_locked(tx, next);
  pending_ = std::move(next);
  mempool_.push_back(tx);
  if (mempool_log_) {
    mempool_log_->append(ledger::encode(tx));
    mempool_log_->sync();
  }
  return {tx.tx_id, TxStatus::kPending, std::nullopt};
}

std::vector<ledger::Transaction> Node::issue(
    const std::function<std::vector<ledger::Transaction>(economy::MintIssuer&)>& build) {
  if (!key_) throw Error(Errc::NOT_VALIDATOR, "this node holds no validator key");
  std::lock_guard lock(mu_);
  const Address signer = wallet::address_of(*key_);
  if (!genesis_.validators.contains(signer))
    throw Error(Errc::NOT_VALIDATOR, "configured key is not in the validator set", {{"address", signer.str()}});
  economy::MintIssuer issuer(*key_, pending_.next_nonce(signer));
  std::vector<ledger::Transaction> txs = build(issuer);
  economy::AccountState next = pending_;
  for (const auto& tx : txs) admit_locked(tx, next);
  pending_ = std::move(next);
  for (const auto& tx : txs) {
    mempool_.push_back(tx);
    if (mempool_log_) mempool_log_->append(ledger::encode(tx));
  }
  if (mempool_log_ && !txs.empty()) mempool_log_->sync();
  return txs;
}

ledger::Transaction Node::mint(const Address& to, std::uint64_t amount, std::string memo) {
  const std::uint64_t ts = now();
  return issue([&](economy::MintIssuer& issuer) {
           return std::vector<ledger::Transaction>{issuer.mint(to, amount, std::move(memo), ts)};
         })
      .front();
}

void Node::append_locked(const ledger::Block& block) {
  economy::apply_block(committed_, block, genesis_.validators);
  chain_.push_back(block);
  for (const auto& tx : block.transactions) committed_index_[tx.tx_id] = block.header.height;
  if (chain_log_) {
    chain_log_->append(ledger::encode(block));
    chain_log_->sync();
  }
}

void Node::rebuild_mempool_locked(std::vector<ledger::Transaction> candidates) {
  mempool_.clear();
  pending_ = committed_;
  std::set<Hash256> seen;
  for (const auto& tx : candidates) {
    if (committed_index_.count(tx.tx_id) || !seen.insert(tx.tx_id).second) continue;
    try {
      economy::AccountState next = pending_;
      admit_locked(tx, next);
      pending_ = std::move(next);
      mempool_.push_back(tx);
    } catch (const Error&) {
      // no longer valid against the new tip
    }
  }
}

void Node::persist_chain_locked() {
  if (!chain_log_) return;
  std::vector<std::string> lines;
  lines.reserve(chain_.size());
  for (const auto& b : chain_) lines.push_back(ledger::encode(b));
  chain_log_->rewrite(lines);
}

void Node::persist_mempool_locked() {
  if (!mempool_log_) return;
  std::vector<std::string> lines;
  for (const auto& tx : mempool_) lines.push_back(ledger::encode(tx));
  mempool_log_->rewrite(lines);
}

std::optional<ledger::Block> Node::produce_block(bool allow_empty) {
  if (!key_) throw Error(Errc::NOT_VALIDATOR, "this node holds no validator key");
  std::lock_guard lock(mu_);
  const std::uint64_t next_height = chain_.back().header.height + 1;
  if (consensus::expected_proposer(next_height, genesis_.validators) != wallet::address_of(*key_)) return std::nullopt;
  if (mempool_.empty() && !allow_empty) return std::nullopt;

  const std::size_t n = std::min<std::size_t>(mempool_.size(), max_block_txs_);
  std::vector<ledger::Transaction> body(mempool_.begin(), mempool_.begin() + static_cast<std::ptrdiff_t>(n));
  ledger::Block block = consensus::propose_block(chain_.back(), body, clock_(), *key_, genesis_.validators);
  append_locked(block);
  std::vector<ledger::Transaction> rest(mempool_.begin() + static_cast<std::ptrdiff_t>(n), mempool_.end());
  rebuild_mempool_locked(std::move(rest));
  persist_mempool_locked();
  return block;
}

void Node::accept_block(const ledger::Block& block) {
  std::lock_guard lock(mu_);
  if (Verdict v = ledger::validate_block(block, chain_.back()); !v)
    throw Error(*v.failure, "block rejected: " + v.detail, {{"height", block.header.height}});
  if (Verdict v = consensus::verify_seal(block, genesis_.validators); !v)
    throw Error(*v.failure, "block rejected: " + v.detail, {{"height", block.header.height}});
  append_locked(block);
  rebuild_mempool_locked(std::vector<ledger::Transaction>(mempool_));
  persist_mempool_locked();
}

bool Node::adopt_chain(const std::vector<ledger::Block>& candidate) {
  std::lock_guard lock(mu_);
  const auto& winner = consensus::fork_choice(chain_, candidate, genesis_);
  if (&winner == &chain_ || winner == chain_) return false;

  economy::AccountState replayed = economy::replay_chain(candidate, genesis_.validators);
  std::set<Hash256> kept;
  for (const auto& b : candidate)
    for (const auto& tx : b.transactions) kept.insert(tx.tx_id);
  std::vector<ledger::Transaction> orphaned;
  for (const auto& b : chain_)
    for (const auto& tx : b.transactions)
      if (!kept.count(tx.tx_id)) orphaned.push_back(tx);
  orphaned.insert(orphaned.end(), mempool_.begin(), mempool_.end());

  chain_ = candidate;
  committed_ = std::move(replayed);
  committed_index_.clear();
  for (std::size_t h = 0; h < chain_.size(); ++h)
    for (const auto& tx : chain_[h].transactions) committed_index_[tx.tx_id] = h;
  persist_chain_locked();
  rebuild_mempool_locked(std::move(orphaned));
  persist_mempool_locked();
  return true;
}

std::uint64_t Node::memo_total(std::string_view memo, const Address& to) const {
  std::lock_guard lock(mu_);
  std::uint64_t total = 0;
  auto add = [&](const ledger::Transaction& tx) {
    if (tx.kind == ledger::TxKind::kTransfer && tx.to == to && tx.memo == memo) total += tx.amount;
  };
  for (const auto& b : chain_)
    for (const auto& tx : b.transactions) add(tx);
  for (const auto& tx : mempool_) add(tx);
  return total;
}

std::size_t Node::memo_count(std::string_view memo) const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& b : chain_)
    for (const auto& tx : b.transactions) n += tx.memo == memo;
  for (const auto& tx : mempool_) n += tx.memo == memo;
  return n;
}

std::vector<std::pair<std::uint64_t, ledger::Transaction>> Node::committed_transactions() const {
  std::lock_guard lock(mu_);
  std::vector<std::pair<std::uint64_t, ledger::Transaction>> out;
  for (const auto& b : chain_)
    for (const auto& tx : b.transactions) out.emplace_back(b.header.height, tx);
  return out;
}

}  // namespace campus::node
