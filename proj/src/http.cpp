#include "campus/http.hpp"

#include <thread>

#include <httplib.h>

namespace campus::http {

struct HttpServer::Impl {
  explicit Impl(api::Router& r) : router(r) {}
  api::Router& router;
  httplib::Server server;
  std::thread thread;
};

namespace {

void serve(api::Router& router, const httplib::Request& req, httplib::Response& res) {
  api::Request in;
  in.method = req.method;
  in.path = req.path;
  for (const auto& [k, v] : req.params) in.query.emplace(k, v);
  in.body = req.body;
  const std::string auth = req.get_header_value("Authorization");
  constexpr std::string_view kBearer = "Bearer ";
  if (auth.starts_with(kBearer)) in.bearer = auth.substr(kBearer.size());
  const api::Response out = router.handle(in);
  res.status = out.status;
  res.set_content(out.body, "application/json");
}

[[noreturn]] void transport_failure(const PeerClient& p, const std::string& what) {
  throw Error(Errc::IO_ERROR, "peer " + p.host() + ":" + std::to_string(p.port()) + " " + what);
}

}  // namespace

HttpServer::HttpServer(api::Router& router) : impl_(std::make_unique<Impl>(router)) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) { serve(impl_->router, req, res); };
  impl_->server.Get(".*", handler);
  impl_->server.Post(".*", handler);
  impl_->server.Put(".*", handler);
  impl_->server.Delete(".*", handler);
  impl_->server.Patch(".*", handler);
  impl_->server.set_payload_max_length(64 << 20);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = impl_->server.bind_to_any_port(host);
    if (p <= 0) throw Error(Errc::IO_ERROR, "cannot bind " + host);
    return p;
  }
  if (!impl_->server.bind_to_port(host, port))
    throw Error(Errc::IO_ERROR, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::start() {
  impl_->thread = std::thread([this] { run(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

PeerClient::PeerClient(std::string host, int port, std::string token)
    : host_(std::move(host)), port_(port), token_(std::move(token)) {}

PeerClient PeerClient::parse(const std::string& endpoint, std::string token) {
  const auto colon = endpoint.rfind(':');
  int port = 0;
  if (colon != std::string::npos) {
    try {
      port = std::stoi(endpoint.substr(colon + 1));
    } catch (const std::exception&) {
      port = 0;
    }
  }
  if (colon == std::string::npos || colon == 0 || port <= 0 || port > 65535)
    throw Error(Errc::MALFORMED, "peer must be host:port", {{"peer", endpoint}});
  return PeerClient(endpoint.substr(0, colon), port, std::move(token));
}

std::vector<ledger::Block> PeerClient::fetch_chain() const {
  httplib::Client cli(host_, port_);
  cli.set_connection_timeout(5);
  auto res = cli.Get("/chain");
  if (!res) transport_failure(*this, "unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200) transport_failure(*this, "answered " + std::to_string(res->status));
  const Json j = Json::parse(res->body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("blocks") || !j.at("blocks").is_array())
    throw Error(Errc::MALFORMED, "peer chain response is not {\"blocks\": [...]}");
  std::vector<ledger::Block> chain;
  for (const auto& b : j.at("blocks")) chain.push_back(ledger::block_from_json(b));
  return chain;
}

Json PeerClient::push_chain(const std::vector<ledger::Block>& chain) const {
  Json blocks = Json::array();
  for (const auto& b : chain) blocks.push_back(ledger::to_json(b));
  httplib::Client cli(host_, port_);
  cli.set_connection_timeout(5);
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  auto res = cli.Post("/peer/blocks", headers, canonical_dump(Json{{"blocks", std::move(blocks)}}), "application/json");
  if (!res) transport_failure(*this, "unreachable: " + httplib::to_string(res.error()));
  Json j = Json::parse(res->body, nullptr, false);
  if (res->status != 200) {
    if (j.is_object() && j.contains("code") && j.contains("message"))
      throw Error(Errc::IO_ERROR, "peer rejected chain: " + j.at("code").get<std::string>() + " " +
                                       j.at("message").get<std::string>());
    transport_failure(*this, "answered " + std::to_string(res->status));
  }
  return j;
}

SyncResult sync_with_peer(node::Node& node, const PeerClient& peer) {
  SyncResult r;
  const auto remote = peer.fetch_chain();
  r.adopted_remote = node.adopt_chain(remote);
  if (!r.adopted_remote && !remote.empty() && ledger::hash_block(remote.back().header) != node.tip_hash()) {
    peer.push_chain(node.chain());
    r.pushed_local = true;
  }
  return r;
}

}  // namespace campus::http
