#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "campus/api.hpp"
#include "campus/service.hpp"
#include "fixtures.hpp"

namespace fixtures {

/// A single-validator campus: node, registry, service and router wired
/// together with a manual clock. Students s1..sN, faculty f1..f2,
/// supervisors sup1..sup2, each with a deterministic wallet.
struct World {
  std::shared_ptr<std::atomic<std::uint64_t>> clock = std::make_shared<std::atomic<std::uint64_t>>(1'700'000'000);
  wallet::KeyPair validator;
  consensus::Genesis genesis;
  std::unique_ptr<node::Node> node;
  std::unique_ptr<registry::Registry> registry;
  std::unique_ptr<service::CampusService> svc;
  std::unique_ptr<api::Router> router;
  std::map<std::string, wallet::KeyPair> keys;  // member id -> wallet key
  std::map<std::string, std::string> tokens;    // member id or "validator" -> bearer token
  std::size_t n_students;

  explicit World(std::size_t students = 6, Json config = Json::object(), std::uint64_t seed = 42,
                 std::uint64_t validator_seed = 1)
      : validator(wallet::keypair_from_seed(validator_seed)), genesis(genesis_for({validator})), n_students(students) {
    auto c = clock;
    node = std::make_unique<node::Node>(genesis, std::nullopt, validator, [c] { return c->load(); });
    registry = std::make_unique<registry::Registry>(std::make_unique<registry::MemoryStore>());
    svc = std::make_unique<service::CampusService>(*registry, *node, node::NodeConfig::from_json(config), seed);
    router = std::make_unique<api::Router>(*svc);
    svc->import_members(members());
    for (std::size_t i = 1; i <= students; ++i) tokens[student(i)] = svc->issue_token(student(i), service::Role::kStudent);
    for (const char* f : {"f1", "f2"}) tokens[f] = svc->issue_token(f, service::Role::kFaculty);
    for (const char* s : {"sup1", "sup2"}) tokens[s] = svc->issue_token(s, service::Role::kSupervisor);
    tokens["validator"] = svc->issue_token(wallet::address_of(validator).str(), service::Role::kValidator);
  }

  static std::string student(std::size_t i) { return "s" + std::to_string(i); }

  Json members() {
    Json m{{"students", Json::array()}, {"faculty", Json::array()}, {"supervisors", Json::array()}};
    auto add_key = [&](const std::string& id, std::uint64_t seed) {
      keys.emplace(id, wallet::keypair_from_seed(seed));
      return wallet::address_of(keys.at(id)).str();
    };
    for (std::size_t i = 1; i <= n_students; ++i)
      m["students"].push_back({{"email", student(i) + "@campus.test"},
                               {"enrolled", true},
                               {"name", "Student " + std::to_string(i)},
                               {"student_id", student(i)},
                               {"wallet_address", add_key(student(i), 500 + i)}});
    for (std::size_t i = 1; i <= 2; ++i) {
      const std::string f = "f" + std::to_string(i), s = "sup" + std::to_string(i);
      m["faculty"].push_back({{"email", f + "@campus.test"},
                              {"faculty_id", f},
                              {"name", "Prof " + std::to_string(i)},
                              {"role", "professor"},
                              {"wallet_address", add_key(f, 400 + i)}});
      m["supervisors"].push_back({{"email", s + "@campus.test"},
                                  {"name", "Supervisor " + std::to_string(i)},
                                  {"role", "lab manager"},
                                  {"supervisor_id", s},
                                  {"wallet_address", add_key(s, 450 + i)}});
    }
    return m;
  }

  Address wallet_of(const std::string& id) const { return wallet::address_of(keys.at(id)); }

  api::Response call(const std::string& method, const std::string& path, const std::string& who = "",
                     const Json& body = Json(), std::map<std::string, std::string> query = {}) {
    api::Request r;
    r.method = method;
    r.path = path;
    r.query = std::move(query);
    r.body = body.is_null() ? "" : canonical_dump(body);
    if (!who.empty()) r.bearer = tokens.count(who) ? tokens.at(who) : who;
    return router->handle(r);
  }

  /// Body of a successful call; fails the calling test otherwise.
  Json ok(const std::string& method, const std::string& path, const std::string& who = "",
          const Json& body = Json()) {
    auto res = call(method, path, who, body);
    if (res.status != 200) throw std::runtime_error(method + " " + path + " -> " + std::to_string(res.status) + " " + res.body);
    return Json::parse(res.body);
  }

  static std::string code_of(const api::Response& r) { return Json::parse(r.body).at("code").get<std::string>(); }

  void advance(std::uint64_t seconds) { clock->fetch_add(seconds); }

  /// Seal everything pending; returns the number of blocks produced.
  std::size_t seal_all() {
    std::size_t n = 0;
    while (node->produce_block()) ++n;
    return n;
  }

  ledger::Transaction signed_transfer(const std::string& from, const Address& to, std::uint64_t amount,
                                      std::string memo = "") {
    const Address a = wallet_of(from);
    return transfer(keys.at(from), to, amount, node->pending_state().next_nonce(a), clock->load(), std::move(memo));
  }

  /// Approved project owned by `faculty` with the given team.
  std::string approved_project(const std::string& faculty, const std::vector<std::string>& team,
                               const std::string& topic = "topic") {
    const Json p = ok("POST", "/projects", faculty, {{"student_ids", team}, {"topic", topic}});
    const std::string id = p.at("project_id").get<std::string>();
    ok("POST", "/projects/" + id + "/approve", faculty);
    return id;
  }
};

}  // namespace fixtures
