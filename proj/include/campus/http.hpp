#pragma once

#include <memory>
#include <string>
#include <vector>

#include "campus/api.hpp"

namespace campus::http {

/// Serves a Router over HTTP/1.1.
class HttpServer {
 public:
  explicit HttpServer(api::Router& router);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  void run();    // blocks until stop()
  void start();  // run() on a background thread
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class PeerClient {
 public:
  PeerClient(std::string host, int port, std::string token = {});
  /// Accepts "host:port".
  static PeerClient parse(const std::string& endpoint, std::string token = {});

  std::vector<ledger::Block> fetch_chain() const;
  Json push_chain(const std::vector<ledger::Block>& chain) const;

  const std::string& host() const { return host_; }
  int port() const { return port_; }

 private:
  std::string host_;
  int port_;
  std::string token_;
};

struct SyncResult {
  bool adopted_remote = false;
  bool pushed_local = false;
};

/// One round of full-chain sync: adopt the peer's chain if fork choice prefers
/// it, otherwise offer ours when the tips differ.
SyncResult sync_with_peer(node::Node& node, const PeerClient& peer);

}  // namespace campus::http
