#include <doctest.h>

#include <random>

#include "campus/consensus.hpp"
#include "fixtures.hpp"

using namespace campus;

namespace {

// Seal a header with an arbitrary key, bypassing the schedule check.
ledger::Block forge(ledger::Block block, const wallet::KeyPair& key, const Address& claimed) {
  block.header.proposer = claimed;
  block.header.seal_signature = ecdsa::sign(key.private_key, ledger::hash_block(block.header));
  return block;
}

ledger::Block unsealed_child(const ledger::Block& prev, std::uint64_t ts) {
  ledger::Block b;
  b.header.height = prev.header.height + 1;
  b.header.prev_hash = ledger::hash_block(prev.header);
  b.header.merkle_root = ledger::compute_merkle_root({});
  b.header.timestamp = ts;
  return b;
}

}  // namespace

TEST_SUITE("consensus") {
  TEST_CASE("validator set rejects duplicates and AUTHORITY") {
    const Address a = wallet::address_of(wallet::keypair_from_seed(1));
    CHECK_THROWS_AS(consensus::ValidatorSet({a, a}), Error);
    CHECK_THROWS_AS(consensus::ValidatorSet({Address::authority()}), Error);
    CHECK_NOTHROW(consensus::ValidatorSet({a}));
  }

  TEST_CASE("genesis parsing") {
    const Address a = wallet::address_of(wallet::keypair_from_seed(1));
    const auto g = consensus::Genesis::from_json(Json{{"chain_id", "c"}, {"validators", {a.str()}}});
    CHECK(g.validators.size() == 1);
    CHECK(consensus::Genesis::from_json(g.to_json()).to_json() == g.to_json());
    try {
      consensus::Genesis::from_json(Json{{"chain_id", "c"}, {"validators", Json::array()}});
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::EMPTY_VALIDATOR_SET);
    }
    CHECK_THROWS_AS(consensus::Genesis::from_json(Json{{"chain_id", "c"}, {"validators", {"nope"}}}), Error);
    CHECK_THROWS_AS(consensus::Genesis::from_json(Json{{"chain_id", "c"}, {"validators", {a.str()}}, {"x", 1}}),
                    Error);
  }

  TEST_CASE("round-robin schedule") {
    std::vector<wallet::KeyPair> keys;
    for (int i = 0; i < 3; ++i) keys.push_back(wallet::keypair_from_seed(50 + i));
    const auto g = fixtures::genesis_for(keys);
    for (std::uint64_t h = 0; h < 9; ++h)
      CHECK(consensus::expected_proposer(h, g.validators) == wallet::address_of(keys[h % 3]));
    CHECK_THROWS_AS(consensus::expected_proposer(0, consensus::ValidatorSet{}), Error);
  }

  TEST_CASE("sealing out of turn is refused") {
    std::vector<wallet::KeyPair> keys{wallet::keypair_from_seed(60), wallet::keypair_from_seed(61)};
    const auto g = fixtures::genesis_for(keys);
    const auto child = unsealed_child(g.block(), 5);
    try {
      consensus::seal_block(child.header, keys[0], g.validators);
      FAIL("expected NOT_SCHEDULED");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NOT_SCHEDULED);
    }
    CHECK_NOTHROW(consensus::seal_block(child.header, keys[1], g.validators));
  }

  TEST_CASE("property: only scheduled validator seals are accepted") {
    std::vector<wallet::KeyPair> keys;
    for (int i = 0; i < 4; ++i) keys.push_back(wallet::keypair_from_seed(70 + i));
    const auto g = fixtures::genesis_for(keys);
    std::mt19937_64 rng(5);
    int accepted_good = 0, rejected_bad = 0, good = 0, bad = 0;
    ledger::Block prev = g.block();
    for (int i = 0; i < 1000; ++i) {
      auto child = unsealed_child(prev, 10 + i);
      child.header.height = 1 + rng() % 50;
      const Address& scheduled = consensus::expected_proposer(child.header.height, g.validators);
      switch (rng() % 4) {
        case 0: {  // correct
          ++good;
          const auto& key = keys[child.header.height % keys.size()];
          if (consensus::verify_seal(forge(child, key, scheduled), g.validators).ok()) ++accepted_good;
          break;
        }
        case 1: {  // other validator, claims itself
          ++bad;
          const auto& key = keys[(child.header.height + 1 + rng() % 3) % keys.size()];
          if (!consensus::verify_seal(forge(child, key, wallet::address_of(key)), g.validators).ok()) ++rejected_bad;
          break;
        }
        case 2: {  // other validator, claims the scheduled address
          ++bad;
          const auto& key = keys[(child.header.height + 1 + rng() % 3) % keys.size()];
          if (!consensus::verify_seal(forge(child, key, scheduled), g.validators).ok()) ++rejected_bad;
          break;
        }
        default: {  // outsider key
          ++bad;
          const auto key = wallet::keypair_from_seed(10'000 + rng() % 1'000'000);
          const Address claimed = rng() % 2 ? scheduled : wallet::address_of(key);
          if (!consensus::verify_seal(forge(child, key, claimed), g.validators).ok()) ++rejected_bad;
        }
      }
    }
    CHECK(good + bad == 1000);
    CHECK(accepted_good == good);
    CHECK(rejected_bad == bad);
  }

  TEST_CASE("seal failure codes") {
    std::vector<wallet::KeyPair> keys{wallet::keypair_from_seed(80), wallet::keypair_from_seed(81)};
    const auto g = fixtures::genesis_for(keys);
    const auto child = unsealed_child(g.block(), 5);
    CHECK(consensus::verify_seal(forge(child, keys[0], wallet::address_of(keys[0])), g.validators).failure ==
          Errc::WRONG_PROPOSER);
    CHECK(consensus::verify_seal(forge(child, keys[0], wallet::address_of(keys[1])), g.validators).failure ==
          Errc::BAD_SEAL_SIGNATURE);
    auto unsealed = child;
    unsealed.header.proposer = wallet::address_of(keys[1]);
    CHECK(consensus::verify_seal(unsealed, g.validators).failure == Errc::BAD_SEAL_SIGNATURE);
  }

  TEST_CASE("fork choice: longer wins, then smaller tip hash") {
    fixtures::ChainBuilder b(2, 3, 2000);
    b.build(3, 6, 8);
    auto shorter = b.chain;
    shorter.pop_back();
    CHECK(&consensus::fork_choice(b.chain, shorter, b.genesis) == &b.chain);
    CHECK(&consensus::fork_choice(shorter, b.chain, b.genesis) == &b.chain);

    // Equal-length siblings differing only in timestamp.
    auto a = shorter;
    auto c = shorter;
    const auto& key = b.proposer_for(3);
    a.push_back(consensus::propose_block(a.back(), {}, 2'000'000'000, key, b.genesis.validators));
    c.push_back(consensus::propose_block(c.back(), {}, 2'000'000'001, key, b.genesis.validators));
    const bool a_smaller = ledger::hash_block(a.back().header) < ledger::hash_block(c.back().header);
    const auto& winner = consensus::fork_choice(a, c, b.genesis);
    CHECK(&winner == (a_smaller ? &a : &c));
    CHECK(&consensus::fork_choice(c, a, b.genesis) == &winner);

    auto broken = a;
    broken.back().header.timestamp += 1;
    CHECK_THROWS_AS(consensus::fork_choice(broken, c, b.genesis), Error);
  }
}
