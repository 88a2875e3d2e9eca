#include <doctest.h>

#include <filesystem>
#include <random>
#include <set>

#include "campus/economy.hpp"
#include "campus/wallet.hpp"
#include "fixtures.hpp"
#include "golden_values.hpp"

using namespace campus;

namespace {

ledger::Transaction fixture_tx() {
  ledger::Transaction tx;
  tx.from = *Address::parse(golden::kAddress1);
  tx.to = *Address::parse(golden::kAddress7);
  tx.amount = 25;
  tx.nonce = 0;
  tx.timestamp = 1'700'000'000;
  tx.memo = "fixture";
  return tx;
}

}  // namespace

TEST_SUITE("wallet") {
  TEST_CASE("seed 1 yields the generator point") {
    const auto key = wallet::keypair_from_seed(1);
    CHECK(to_hex(key.public_key) == golden::kPubKey1);
    CHECK(wallet::address_of(key).str() == golden::kAddress1);
    CHECK(wallet::address_of(wallet::keypair_from_seed(7)).str() == golden::kAddress7);
  }

  TEST_CASE("seed producing scalar 0 is resampled") {
    const auto key = wallet::keypair_from_seed(0);
    CHECK(ecdsa::is_valid_private_key(key.private_key));
    CHECK(key.private_key == sha256(std::array<std::uint8_t, 32>{}));
  }

  TEST_CASE("unseeded keys are distinct") {
    CHECK(wallet::generate_keypair().private_key != wallet::generate_keypair().private_key);
  }

  TEST_CASE("derive_address rejects non-compressed input") {
    const auto key = wallet::keypair_from_seed(1);
    CHECK_THROWS_WITH_AS(wallet::derive_address(std::span(key.public_key).last<32>()), doctest::Contains("compressed"),
                         Error);
    auto bad = key.public_key;
    bad[0] = 0x04;
    CHECK_THROWS_AS(wallet::derive_address(bad), Error);
    CHECK(wallet::derive_address(key.public_key) == wallet::derive_address(key.public_key));
  }

  TEST_CASE("RFC 6979 textbook vector") {
    const auto key = wallet::keypair_from_seed(1);
    const Hash256 digest = sha256(std::string_view("Satoshi Nakamoto"));
    CHECK(to_hex(ecdsa::deterministic_nonce(key.private_key, digest)) == golden::kSatoshiNonce);
    CHECK(to_hex(ecdsa::sign(key.private_key, digest)) == golden::kSatoshiSignature);
  }

  TEST_CASE("fixture transaction signs to the oracle bytes") {
    const auto signed_tx = wallet::sign_transaction(fixture_tx(), wallet::keypair_from_seed(1));
    CHECK(ledger::unsigned_bytes(signed_tx) == golden::kFixtureUnsigned);
    CHECK(to_hex(signed_tx.tx_id) == golden::kFixtureTxId);
    CHECK(to_hex(*signed_tx.signature) == golden::kFixtureSignature);
    CHECK(wallet::verify_signature(signed_tx).ok());
    // Byte-stable across repeated signing.
    CHECK(wallet::sign_transaction(fixture_tx(), wallet::keypair_from_seed(1)) == signed_tx);
  }

  TEST_CASE("sign with a key that does not own the sender") {
    CHECK_THROWS_WITH_AS(wallet::sign_transaction(fixture_tx(), wallet::keypair_from_seed(7)),
                         doctest::Contains("sender"), Error);
    try {
      wallet::sign_transaction(fixture_tx(), wallet::keypair_from_seed(7));
    } catch (const Error& e) {
      CHECK(e.code() == Errc::ADDRESS_MISMATCH);
    }
  }

  TEST_CASE("verify rejects mutations") {
    const auto key = wallet::keypair_from_seed(1);
    const auto good = wallet::sign_transaction(fixture_tx(), key);

    auto amount = good;
    amount.amount = 26;
    CHECK(wallet::verify_signature(amount).failure == Errc::BAD_SIG);

    auto unsigned_tx = good;
    unsigned_tx.signature.reset();
    CHECK(wallet::verify_signature(unsigned_tx).failure == Errc::BAD_SIG);

    // Signature transplanted from a different transaction by the same key.
    auto other = fixture_tx();
    other.amount = 99;
    const auto donor = wallet::sign_transaction(other, key);
    auto transplanted = good;
    transplanted.signature = donor.signature;
    CHECK(wallet::verify_signature(transplanted).failure == Errc::BAD_SIG);

    // Re-signed by another key but still claiming the first sender.
    auto foreign = fixture_tx();
    foreign.from = wallet::address_of(wallet::keypair_from_seed(7));
    auto resigned = wallet::sign_transaction(foreign, wallet::keypair_from_seed(7));
    resigned.from = good.from;
    resigned.tx_id = ledger::compute_tx_id(resigned);
    CHECK_FALSE(wallet::verify_signature(resigned).ok());
  }

  TEST_CASE("MINT must come from AUTHORITY") {
    const auto v = wallet::keypair_from_seed(3);
    economy::MintIssuer issuer(v, 0);
    auto mint = issuer.mint(*Address::parse(golden::kAddress7), 10, "m", 1);
    CHECK(wallet::verify_signature(mint).ok());
    auto spoof = mint;
    spoof.from = wallet::address_of(v);
    spoof = wallet::sign_transaction(spoof, v);
    CHECK(wallet::verify_signature(spoof).failure == Errc::ADDRESS_MISMATCH);
  }

  TEST_CASE("property: sign/verify round trip over random keys and transactions") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
      const auto key = wallet::keypair_from_seed(rng());
      const auto to = wallet::keypair_from_seed(rng());
      const auto tx = fixtures::transfer(key, wallet::address_of(to), 1 + rng() % 1000, rng() % 100, rng() % 2'000'000'000,
                                         "memo-" + std::to_string(i));
      CHECK(wallet::verify_signature(tx).ok());
    }
  }

  TEST_CASE("addresses do not collide over 2000 random keys") {
    std::set<Address> seen;
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2'000; ++i) seen.insert(wallet::derive_address(wallet::keypair_from_seed(rng()).public_key));
    CHECK(seen.size() == 2'000);
  }

  TEST_CASE("keyfile round trip with owner-only permissions") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "campus_wallet_test";
    fs::create_directories(dir);
    const fs::path file = dir / "key.json";
    const auto key = wallet::keypair_from_seed(5);
    wallet::save_keyfile(file, key);
    const auto loaded = wallet::load_keyfile(file);
    CHECK(loaded.private_key == key.private_key);
    CHECK(loaded.public_key == key.public_key);
    const auto perms = fs::status(file).permissions();
    CHECK((perms & (fs::perms::group_all | fs::perms::others_all)) == fs::perms::none);
    fs::remove_all(dir);
  }
}
