#include <chrono>
#include <fstream>
#include <iostream>
#include <iterator>

#include <CLI11.hpp>

#include "campus/wallet.hpp"

using namespace campus;

namespace {

std::string read_all(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  std::ifstream in(path);
  if (!in) throw Error(Errc::IO_ERROR, "cannot read " + path);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Campus chain wallet: keys and offline signing"};
  app.require_subcommand(1);

  auto* keygen = app.add_subcommand("keygen", "write a new keyfile (mode 0600) and print its address");
  std::string out_path;
  std::optional<std::uint64_t> seed;
  keygen->add_option("--out", out_path, "keyfile path")->required();
  keygen->add_option("--seed", seed, "deterministic key (tests only)");

  auto* address = app.add_subcommand("address", "print the address of a keyfile");
  std::string key_path;
  address->add_option("--key", key_path)->required();

  auto* sign = app.add_subcommand("sign", "print a signed TRANSFER as JSON");
  std::string to;
  std::uint64_t amount = 0, nonce = 0, timestamp = 0;
  std::string memo;
  sign->add_option("--key", key_path)->required();
  sign->add_option("--to", to)->required();
  sign->add_option("--amount", amount)->required();
  sign->add_option("--nonce", nonce)->required();
  sign->add_option("--memo", memo);
  sign->add_option("--timestamp", timestamp, "seconds; defaults to now");

  auto* verify = app.add_subcommand("verify", "check a transaction's signature");
  std::string tx_path = "-";
  verify->add_option("tx", tx_path, "transaction JSON file, - for stdin");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*keygen) {
      const auto key = seed ? wallet::keypair_from_seed(*seed) : wallet::generate_keypair();
      wallet::save_keyfile(out_path, key);
      std::cout << wallet::address_of(key).str() << '\n';
    } else if (*address) {
      std::cout << wallet::address_of(wallet::load_keyfile(key_path)).str() << '\n';
    } else if (*sign) {
      const auto key = wallet::load_keyfile(key_path);
      auto dest = Address::parse(to);
      if (!dest) throw Error(Errc::MALFORMED, "--to is not an address");
      ledger::Transaction tx;
      tx.kind = ledger::TxKind::kTransfer;
      tx.from = wallet::address_of(key);
      tx.to = *dest;
      tx.amount = amount;
      tx.nonce = nonce;
      tx.timestamp = timestamp ? timestamp
                               : static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::seconds>(
                                                                std::chrono::system_clock::now().time_since_epoch())
                                                                .count());
      tx.memo = memo;
      std::cout << ledger::encode(wallet::sign_transaction(std::move(tx), key)) << '\n';
    } else if (*verify) {
      const Json j = Json::parse(read_all(tx_path), nullptr, false);
      if (j.is_discarded()) throw Error(Errc::MALFORMED, "transaction is not JSON");
      const auto tx = ledger::transaction_from_json(j);
      const Verdict v = wallet::verify_signature(tx);
      if (!v) {
        std::cout << to_string(*v.failure) << (v.detail.empty() ? "" : ": " + v.detail) << '\n';
        return 2;
      }
      std::cout << "OK " << to_hex(tx.tx_id) << '\n';
    }
  } catch (const Error& e) {
    std::cerr << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
