#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "campus/http.hpp"

using namespace campus;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IO_ERROR, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  Json j = Json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw Error(Errc::MALFORMED, path + " is not JSON");
  return j;
}

std::pair<std::string, int> split_listen(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos) throw Error(Errc::MALFORMED, "--listen must be host:port");
  return {s.substr(0, colon), std::stoi(s.substr(colon + 1))};
}

void log(const std::string& line) { std::cerr << "[campus-node] " << line << std::endl; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Campus chain validator node"};
  std::string config_path, genesis_path, listen = "127.0.0.1:8080", data_dir, key_path, peer, peer_token;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "node config JSON (CAMPUS_CHAIN_CONFIG overrides)");
  app.add_option("--genesis", genesis_path, "genesis JSON")->required();
  app.add_option("--listen", listen, "host:port for the REST API");
  app.add_option("--data-dir", data_dir, "chain and registry storage; in-memory when omitted");
  app.add_option("--validator-key", key_path, "keyfile of this node's validator");
  app.add_option("--seed", seed, "allocation seed (tests only)");
  app.add_option("--peer", peer, "host:port of a peer to sync with");
  app.add_option("--peer-token", peer_token, "validator token accepted by the peer");

  auto* import_cmd = app.add_subcommand("import", "load members JSON into the registry");
  std::string members_path;
  import_cmd->add_option("members", members_path, "{students, faculty, supervisors}")->required();

  auto* token_cmd = app.add_subcommand("issue-token", "print a bearer token for a member or validator");
  std::string subject, role_name;
  token_cmd->add_option("--subject", subject, "member id, or validator address")->required();
  token_cmd->add_option("--role", role_name, "STUDENT | FACULTY | SUPERVISOR | VALIDATOR")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (const char* env = std::getenv("CAMPUS_CHAIN_CONFIG"); env && *env) config_path = env;
    const node::NodeConfig config = config_path.empty() ? node::NodeConfig{} : node::NodeConfig::load(config_path);
    const auto genesis = consensus::Genesis::load(genesis_path);
    std::optional<wallet::KeyPair> key;
    if (!key_path.empty()) key = wallet::load_keyfile(key_path);

    std::optional<std::filesystem::path> chain_dir;
    std::unique_ptr<registry::DocumentStore> store;
    if (!data_dir.empty()) {
      chain_dir = std::filesystem::path(data_dir) / "chain";
      store = std::make_unique<registry::FileStore>(std::filesystem::path(data_dir) / "registry");
    } else {
      store = std::make_unique<registry::MemoryStore>();
    }
    node::Node n(genesis, chain_dir, key);
    n.set_max_block_txs(config.max_block_txs);
    registry::Registry reg(std::move(store));
    service::CampusService svc(reg, n, config, seed);

    if (*import_cmd) {
      std::cout << canonical_dump(svc.import_members(read_json(members_path))) << '\n';
      reg.flush();
      return 0;
    }
    if (*token_cmd) {
      auto role = service::role_from(role_name);
      if (!role) throw Error(Errc::MALFORMED, "unknown role " + role_name);
      std::cout << svc.issue_token(subject, *role) << '\n';
      reg.flush();
      return 0;
    }

    api::Router router(svc);
    http::HttpServer server(router);
    const auto [host, port] = split_listen(listen);
    const int bound = server.bind(host, port);
    server.start();
    log("chain " + genesis.chain_id + " height " + std::to_string(n.height()) + " listening on " + host + ":" +
        std::to_string(bound));

    std::optional<http::PeerClient> peer_client;
    if (!peer.empty()) peer_client = http::PeerClient::parse(peer, peer_token);

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    auto next_tick = std::chrono::steady_clock::now();
    while (!g_stop) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
      if (std::chrono::steady_clock::now() < next_tick) continue;
      next_tick += std::chrono::seconds(std::max<std::uint64_t>(1, config.block_interval_s));
      try {
        if (peer_client) {
          const auto r = http::sync_with_peer(n, *peer_client);
          if (r.adopted_remote) log("adopted peer chain at height " + std::to_string(n.height()));
        }
        if (auto b = n.produce_block())
          log("sealed block " + std::to_string(b->header.height) + " with " + std::to_string(b->transactions.size()) +
              " txs");
        svc.deliver_pending();
        reg.flush();
      } catch (const Error& e) {
        log(std::string(to_string(e.code())) + ": " + e.what());
      }
    }
    server.stop();
    reg.flush();
    log("stopped");
  } catch (const Error& e) {
    std::cerr << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
