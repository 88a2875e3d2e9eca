#include "campus/api.hpp"

#include <charconv>
#include <functional>

namespace campus::api {

using service::Principal;
using service::Role;

int http_status(Errc code) {
  switch (code) {
    case Errc::UNAUTHENTICATED:
    case Errc::EXPIRED_TOKEN:
      return 401;
    case Errc::FORBIDDEN:
    case Errc::NOT_PROJECT_FACULTY:
    case Errc::NOT_PROJECT_MEMBER:
    case Errc::NOT_SUPERVISOR:
    case Errc::NOT_VALIDATOR:
      return 403;
    case Errc::NOT_FOUND:
      return 404;
    case Errc::BAD_NONCE:
    case Errc::CAMPAIGN_CLOSED:
    case Errc::ALREADY_GRADED:
    case Errc::ALREADY_VERIFIED:
    case Errc::ALREADY_RATED:
    case Errc::PERIOD_ALREADY_AWARDED:
    case Errc::POSTING_NOT_OPEN:
    case Errc::DUPLICATE_APPLICATION:
    case Errc::DUPLICATE_TIMESHEET:
    case Errc::DUPLICATE_UNIQUE_KEY:
    case Errc::INACTIVE_ASSIGNMENT:
    case Errc::NOT_COMPLETED:
    case Errc::PROJECT_NOT_APPROVED:
    case Errc::REFERENCED:
      return 409;
    case Errc::INSUFFICIENT_BALANCE:
    case Errc::OVERSHOOT:
    case Errc::BUDGET_EXCEEDED:
    case Errc::NO_APPLICANTS:
    case Errc::NO_GRADED_REPORTS:
      return 422;
    case Errc::INTERNAL:
    case Errc::IO_ERROR:
      return 500;
    default:
      return 400;
  }
}

Response error_response(const Error& e) {
  Json details = e.details().is_null() ? Json::object() : e.details();
  return {http_status(e.code()),
          canonical_dump(Json{{"code", to_string(e.code())}, {"details", details}, {"message", e.what()}})};
}

namespace {

struct Context {
  const Request& request;
  std::vector<std::string> params;
  std::optional<Principal> principal;
  Json body;

  const Principal& who() const { return *principal; }
  const std::string& param(std::size_t i) const { return params.at(i); }
};

using Handler = std::function<Json(service::CampusService&, Context&)>;

struct Route {
  RouteInfo info;
  std::vector<std::string> segments;
  Handler handler;
};

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    if (path[i] == '/') {
      ++i;
      continue;
    }
    const auto j = path.find('/', i);
    out.emplace_back(path.substr(i, j == std::string_view::npos ? std::string_view::npos : j - i));
    if (j == std::string_view::npos) break;
    i = j;
  }
  return out;
}

bool has_float(const Json& j) {
  if (j.is_number_float()) return true;
  if (j.is_structured())
    for (const auto& v : j)
      if (has_float(v)) return true;
  return false;
}

Json parse_body(const std::string& text) {
  if (text.empty()) return Json();
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::MALFORMED, "request body is not valid JSON");
  if (has_float(j)) throw Error(Errc::MALFORMED, "floating-point numbers are not accepted; use decimal strings");
  return j;
}

Address parse_address(const std::string& text) {
  auto a = Address::parse(text);
  if (!a) throw Error(Errc::MALFORMED, "not an address", {{"address", text}});
  return *a;
}

std::uint64_t parse_height(const std::string& text) {
  std::uint64_t h = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), h);
  if (ec != std::errc() || p != text.data() + text.size() || text.empty())
    throw Error(Errc::MALFORMED, "height must be a non-negative integer", {{"height", text}});
  return h;
}

ledger::Transaction parse_tx(const Json& body) {
  if (body.is_object() && body.contains("transaction")) return ledger::transaction_from_json(body.at("transaction"));
  return ledger::transaction_from_json(body);
}

Json list_of(const char* key, std::vector<Json> docs) {
  Json arr = Json::array();
  for (auto& d : docs) arr.push_back(std::move(d));
  return Json{{key, std::move(arr)}};
}

Json chain_json(const std::vector<ledger::Block>& chain) {
  Json blocks = Json::array();
  for (const auto& b : chain) blocks.push_back(ledger::to_json(b));
  return Json{{"blocks", std::move(blocks)},
              {"height", chain.back().header.height},
              {"tip_hash", to_hex(ledger::hash_block(chain.back().header))}};
}

Route route(std::string method, std::string pattern, std::set<Role> roles, Handler h, bool authenticated = true) {
  Route r;
  r.segments = split_path(pattern);
  r.info = RouteInfo{std::move(method), std::move(pattern), authenticated, std::move(roles)};
  r.handler = std::move(h);
  return r;
}

Route open_route(std::string method, std::string pattern, Handler h) {
  return route(std::move(method), std::move(pattern), {}, std::move(h), false);
}

const std::set<Role> kAny{};
const std::set<Role> kStudentOnly{Role::kStudent};
const std::set<Role> kFacultyOnly{Role::kFaculty};
const std::set<Role> kSupervisorOnly{Role::kSupervisor};
const std::set<Role> kValidatorOnly{Role::kValidator};
const std::set<Role> kMembers{Role::kStudent, Role::kFaculty, Role::kSupervisor};

const std::vector<Route>& table() {
  using S = service::CampusService;
  using C = Context;
  static const std::vector<Route> routes{
      // identity and chain
      open_route("POST", "/auth/login",
                 [](S& s, C& c) {
                   const Json& t = c.body.is_object() && c.body.contains("token") ? c.body.at("token") : Json();
                   if (!t.is_string()) throw Error(Errc::MALFORMED, "body must be {\"token\": string}");
                   const auto p = s.authenticate(t.get<std::string>());
                   return Json{{"role", service::to_string(p.role)}, {"subject_id", p.subject_id}};
                 }),
      open_route("GET", "/status",
                 [](S& s, C&) {
                   auto& n = s.node();
                   const auto v = n.validator_address();
                   return Json{{"chain_id", n.genesis().chain_id},
                               {"height", n.height()},
                               {"mempool", n.mempool().size()},
                               {"tip_hash", to_hex(n.tip_hash())},
                               {"validator", v ? Json(v->str()) : Json()}};
                 }),
      open_route("GET", "/chain", [](S& s, C&) { return chain_json(s.node().chain()); }),
      open_route("GET", "/blocks/{height}",
                 [](S& s, C& c) {
                   auto b = s.node().block_at(parse_height(c.param(0)));
                   if (!b) throw Error(Errc::NOT_FOUND, "no block at height " + c.param(0));
                   return ledger::to_json(*b);
                 }),
      route("GET", "/wallets/{address}/balance", kAny,
            [](S& s, C& c) { return s.balance(parse_address(c.param(0))); }),
      route("POST", "/transactions", kAny, [](S& s, C& c) { return s.submit_transaction(c.who(), parse_tx(c.body)); }),
      route("GET", "/transactions/{tx_id}", kAny,
            [](S& s, C& c) {
              auto id = from_hex_fixed<32>(c.param(0));
              if (!id) throw Error(Errc::MALFORMED, "tx_id must be 64 lowercase hex characters");
              return s.node().status_of(*id).to_json();
            }),
      route("POST", "/peer/blocks", kValidatorOnly,
            [](S& s, C& c) {
              const Json& blocks = c.body.is_object() && c.body.contains("blocks") ? c.body.at("blocks") : Json();
              if (!blocks.is_array()) throw Error(Errc::MALFORMED, "body must be {\"blocks\": [block...]}");
              std::vector<ledger::Block> chain;
              for (const auto& b : blocks) chain.push_back(ledger::block_from_json(b));
              const bool adopted = s.node().adopt_chain(chain);
              return Json{{"adopted", adopted},
                          {"height", s.node().height()},
                          {"tip_hash", to_hex(s.node().tip_hash())}};
            }),

      // research
      route("POST", "/projects", kFacultyOnly, [](S& s, C& c) { return s.create_project(c.who(), c.body); }),
      route("POST", "/projects/{id}/approve", kFacultyOnly,
            [](S& s, C& c) { return s.approve_project(c.who(), c.param(0)); }),
      route("POST", "/projects/{id}/reports", kStudentOnly,
            [](S& s, C& c) { return s.submit_report(c.who(), c.param(0), c.body); }),
      route("POST", "/reports/{id}/grade", kFacultyOnly,
            [](S& s, C& c) { return s.grade_report(c.who(), c.param(0), c.body); }),
      route("POST", "/projects/{id}/publications", kStudentOnly,
            [](S& s, C& c) { return s.add_publication(c.who(), c.param(0), c.body); }),
      route("POST", "/publications/{id}/verify", kFacultyOnly,
            [](S& s, C& c) { return s.verify_publication(c.who(), c.param(0)); }),
      route("GET", "/ranklists", kAny,
            [](S& s, C&) {
              const auto [mentor, published] = s.ranklists();
              return Json{{"mentor_rated", research::to_json(mentor)}, {"published", research::to_json(published)}};
            }),
      route("POST", "/ranklists/award", kValidatorOnly, [](S& s, C& c) { return s.award_period(c.who(), c.body); }),

      // positions
      route("POST", "/positions", kSupervisorOnly, [](S& s, C& c) { return s.create_posting(c.who(), c.body); }),
      route("GET", "/positions", kAny,
            [](S& s, C& c) {
              registry::Filter f;
              for (const char* k : {"status", "position_type", "supervisor_id"})
                if (auto it = c.request.query.find(k); it != c.request.query.end()) f.emplace_back(k, it->second);
              return list_of("positions", s.list_postings(f));
            }),
      route("POST", "/positions/{id}/apply", kStudentOnly, [](S& s, C& c) { return s.apply(c.who(), c.param(0)); }),
      route("POST", "/positions/{id}/allocate", kSupervisorOnly,
            [](S& s, C& c) { return s.allocate(c.who(), c.param(0)); }),
      route("POST", "/assignments/{id}/timesheets", kStudentOnly,
            [](S& s, C& c) { return s.submit_timesheet(c.who(), c.param(0), c.body); }),
      route("POST", "/assignments/{id}/complete", kSupervisorOnly,
            [](S& s, C& c) { return s.complete_assignment(c.who(), c.param(0)); }),
      route("POST", "/assignments/{id}/rate", kSupervisorOnly,
            [](S& s, C& c) { return s.rate_assignment(c.who(), c.param(0), c.body); }),

      // campaigns
      route("POST", "/campaigns", kMembers, [](S& s, C& c) { return s.create_campaign(c.who(), c.body); }),
      route("GET", "/campaigns", kAny, [](S& s, C&) { return list_of("campaigns", s.list_campaigns()); }),
      route("POST", "/campaigns/{id}/donate", kAny,
            [](S& s, C& c) { return s.donate(c.who(), c.param(0), parse_tx(c.body)); }),

      // test hook
      route("GET", "/outbox", kValidatorOnly,
            [](S& s, C& c) {
              auto docs = s.outbox();
              if (auto it = c.request.query.find("recipient_email"); it != c.request.query.end())
                std::erase_if(docs, [&](const Json& d) { return d.at("recipient_email") != it->second; });
              return list_of("notifications", std::move(docs));
            }),
      route("GET", "/audit/reconcile", kValidatorOnly, [](S& s, C&) { return s.reconcile().to_json(); }),
  };
  return routes;
}

std::optional<std::vector<std::string>> match(const Route& r, const std::vector<std::string>& segs) {
  if (r.segments.size() != segs.size()) return std::nullopt;
  std::vector<std::string> params;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& p = r.segments[i];
    if (p.size() > 1 && p.front() == '{' && p.back() == '}')
      params.push_back(segs[i]);
    else if (p != segs[i])
      return std::nullopt;
  }
  return params;
}

}  // namespace

const std::vector<RouteInfo>& Router::routes() {
  static const std::vector<RouteInfo> infos = [] {
    std::vector<RouteInfo> v;
    for (const auto& r : table()) v.push_back(r.info);
    return v;
  }();
  return infos;
}

Response Router::handle(const Request& request) {
  try {
    const auto segs = split_path(request.path);
    const Route* found = nullptr;
    std::vector<std::string> params;
    bool path_known = false;
    for (const auto& r : table()) {
      auto m = match(r, segs);
      if (!m) continue;
      path_known = true;
      if (r.info.method != request.method) continue;
      found = &r;
      params = std::move(*m);
      break;
    }
    if (!found)
      throw Error(Errc::NOT_FOUND, path_known ? "method not allowed on this path" : "no such route",
                  {{"method", request.method}, {"path", request.path}});

    Context ctx{request, std::move(params), std::nullopt, Json()};
    if (found->info.authenticated) {
      if (request.bearer.empty()) throw Error(Errc::UNAUTHENTICATED, "bearer token required");
      ctx.principal = service_.authenticate(request.bearer);
      if (!found->info.roles.empty() && !found->info.roles.count(ctx.principal->role))
        throw Error(Errc::FORBIDDEN, "role not permitted on this endpoint",
                    {{"role", service::to_string(ctx.principal->role)}, {"route", found->info.pattern}});
    }
    ctx.body = parse_body(request.body);
    return {200, canonical_dump(found->handler(service_, ctx))};
  } catch (const Error& e) {
    return error_response(e);
  } catch (const Json::exception& e) {
    return error_response(Error(Errc::MALFORMED, std::string("bad JSON value: ") + e.what()));
  } catch (const std::exception& e) {
    return error_response(Error(Errc::INTERNAL, e.what()));
  }
}

}  // namespace campus::api
