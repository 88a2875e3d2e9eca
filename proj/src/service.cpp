#include "campus/service.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <openssl/crypto.h>
#include <openssl/rand.h>

namespace campus::service {

namespace {

// Body helpers --------------------------------------------------------------

const Json& field(const Json& body, const char* key) {
  if (!body.is_object()) throw Error(Errc::MALFORMED, "request body must be a JSON object");
  auto it = body.find(key);
  if (it == body.end()) throw Error(Errc::MALFORMED, std::string("missing field ") + key, {{"field", key}});
  return *it;
}

std::string str_field(const Json& body, const char* key) {
  const Json& v = field(body, key);
  if (!v.is_string()) throw Error(Errc::MALFORMED, std::string(key) + " must be a string", {{"field", key}});
  return v.get<std::string>();
}

std::string str_field_or(const Json& body, const char* key, std::string fallback) {
  if (!body.is_object() || !body.contains(key)) return fallback;
  return str_field(body, key);
}

std::uint64_t u64_field(const Json& body, const char* key) {
  const Json& v = field(body, key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw Error(Errc::MALFORMED, std::string(key) + " must be a non-negative integer", {{"field", key}});
  return v.get<std::uint64_t>();
}

std::int64_t int_field(const Json& body, const char* key) {
  const Json& v = field(body, key);
  if (!v.is_number_integer()) throw Error(Errc::MALFORMED, std::string(key) + " must be an integer", {{"field", key}});
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) return INT64_MAX;
  return v.get<std::int64_t>();
}

std::string random_hex(std::size_t bytes) {
  Bytes buf(bytes);
  if (RAND_bytes(buf.data(), static_cast<int>(buf.size())) != 1) throw Error(Errc::INTERNAL, "entropy unavailable");
  return to_hex(buf);
}

bool is_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (s[i] < '0' || s[i] > '9') return false;
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

void forbid(const std::string& why) { throw Error(Errc::FORBIDDEN, why); }

// Registry documents <-> domain types ----------------------------------------

Json publication_json(const research::Publication& p) {
  return Json{{"impact_factor", p.impact_factor.to_string()},
              {"journal_name", p.journal_name},
              {"n_authors", p.n_authors},
              {"publication_id", p.publication_id},
              {"student_id", p.student_id},
              {"verified", p.verified}};
}

research::Publication publication_from(const Json& j) {
  research::Publication p;
  p.publication_id = j.at("publication_id").get<std::string>();
  p.student_id = j.at("student_id").get<std::string>();
  p.journal_name = j.at("journal_name").get<std::string>();
  p.impact_factor = *Decimal4::parse(j.at("impact_factor").get<std::string>());
  p.n_authors = j.at("n_authors").get<std::uint32_t>();
  p.verified = j.at("verified").get<bool>();
  return p;
}

research::ResearchProject project_from(const Json& j) {
  research::ResearchProject p;
  p.project_id = j.at("project_id").get<std::string>();
  p.topic = j.at("topic").get<std::string>();
  p.faculty_id = j.at("faculty_id").get<std::string>();
  p.student_ids = j.at("student_ids").get<std::vector<std::string>>();
  p.approved = j.at("approved").get<bool>();
  for (const auto& pub : j.at("publications")) p.publications.push_back(publication_from(pub));
  return p;
}

research::BiweeklyReport report_from(const Json& j) {
  research::BiweeklyReport r;
  r.report_id = j.at("report_id").get<std::string>();
  r.project_id = j.at("project_id").get<std::string>();
  r.student_id = j.at("student_id").get<std::string>();
  r.submitted_at = j.at("submitted_at").get<std::uint64_t>();
  r.content_ref = j.at("content_ref").get<std::string>();
  if (!j.at("grade").is_null()) {
    const Json& g = j.at("grade");
    r.grade = research::Grade{g.at("novelty").get<int>(), g.at("effort").get<int>(), g.at("relevance").get<int>()};
  }
  if (!j.at("score").is_null()) r.score = Decimal4::parse(j.at("score").get<std::string>());
  r.feedback = j.at("feedback").get<std::string>();
  return r;
}

positions::PositionPosting posting_from(const Json& j) {
  positions::PositionPosting p;
  p.position_id = j.at("position_id").get<std::string>();
  p.supervisor_id = j.at("supervisor_id").get<std::string>();
  p.position_type = j.at("position_type").get<std::string>();
  p.hourly_rate = j.at("hourly_rate").get<std::uint64_t>();
  p.weekly_hour_cap = *positions::Hours::parse(j.at("weekly_hour_cap").get<std::string>());
  p.status = *positions::posting_status_from(j.at("status").get<std::string>());
  p.applicant_ids = j.at("applicant_ids").get<std::vector<std::string>>();
  p.created_at = j.at("created_at").get<std::uint64_t>();
  return p;
}

positions::Assignment assignment_from(const Json& app) {
  positions::Assignment a;
  a.assignment_id = app.at("application_id").get<std::string>();
  a.position_id = app.at("position_id").get<std::string>();
  a.student_id = app.at("student_id").get<std::string>();
  a.supervisor_id = app.at("supervisor_id").get<std::string>();
  a.position_type = app.at("position_type").get<std::string>();
  a.status = app.at("status") == "COMPLETED" ? positions::AssignmentStatus::kCompleted
                                              : positions::AssignmentStatus::kActive;
  if (!app.at("rating").is_null()) a.rating = app.at("rating").get<int>();
  return a;
}

constexpr std::string_view kApplied = "APPLIED";
constexpr std::string_view kActive = "ACTIVE";
constexpr std::string_view kCompleted = "COMPLETED";
constexpr std::string_view kNotSelected = "NOT_SELECTED";

}  // namespace

std::string_view to_string(Role r) {
  switch (r) {
    case Role::kStudent:
      return "STUDENT";
    case Role::kFaculty:
      return "FACULTY";
    case Role::kSupervisor:
      return "SUPERVISOR";
    case Role::kValidator:
      return "VALIDATOR";
  }
  return "STUDENT";
}

std::optional<Role> role_from(std::string_view s) {
  for (Role r : {Role::kStudent, Role::kFaculty, Role::kSupervisor, Role::kValidator})
    if (to_string(r) == s) return r;
  return std::nullopt;
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::kReportGraded:
      return "REPORT_GRADED";
    case EventKind::kPublicationVerified:
      return "PUBLICATION_VERIFIED";
    case EventKind::kJobPosted:
      return "JOB_POSTED";
    case EventKind::kJobAssigned:
      return "JOB_ASSIGNED";
    case EventKind::kRatingReceived:
      return "RATING_RECEIVED";
    case EventKind::kCampaignUpdate:
      return "CAMPAIGN_UPDATE";
    case EventKind::kRewardPaid:
      return "REWARD_PAID";
  }
  return "REPORT_GRADED";
}

bool LogFileDelivery::deliver(const Json& notification) {
  std::ofstream out(path_, std::ios::app);
  if (!out) return false;
  out << canonical_dump(notification) << '\n';
  return static_cast<bool>(out.flush());
}

Json Reconciliation::to_json() const {
  return Json{{"lost", lost},         {"matched", matched},       {"mismatched", mismatched},
              {"ok", ok()},           {"pending", pending},       {"unrecorded", unrecorded}};
}

CampusService::CampusService(registry::Registry& registry, node::Node& node, node::NodeConfig config,
                             std::optional<std::uint64_t> seed)
    : registry_(registry), node_(node), config_(std::move(config)) {
  if (seed) seed_stream_.emplace(*seed);
  if (!config_.delivery_log.empty()) delivery_ = std::make_unique<LogFileDelivery>(config_.delivery_log);
}

Json CampusService::require(std::string_view collection, std::string_view id) const {
  auto doc = registry_.get(collection, id);
  if (!doc)
    throw Error(Errc::NOT_FOUND, std::string(collection) + " " + std::string(id) + " not found",
                {{"collection", collection}, {"id", id}});
  return *doc;
}

std::optional<Address> CampusService::wallet_of_student(const std::string& student_id) const {
  auto s = registry_.get(registry::kStudent, student_id);
  if (!s) return std::nullopt;
  return Address::parse(s->at("wallet_address").get<std::string>());
}

std::optional<std::string> CampusService::email_of_wallet(const Address& a) const {
  for (auto c : {registry::kStudent, registry::kFaculty, registry::kSupervisors}) {
    auto hits = registry_.query(c, {{"wallet_address", a.str()}});
    if (!hits.empty()) return hits.front().at("email").get<std::string>();
  }
  return std::nullopt;
}

bool CampusService::is_member_wallet(const Address& a) const { return email_of_wallet(a).has_value(); }

void CampusService::notify_student(const std::string& student_id, EventKind kind, std::string body) {
  auto s = registry_.get(registry::kStudent, student_id);
  if (!s) return;
  enqueue_notification(s->at("email").get<std::string>(), kind, std::move(body));
}

void CampusService::record_event(std::string_view kind, const ledger::Transaction& tx, std::string ref_id) {
  registry_.put(registry::kLedgerEvents, Json{{"amount", tx.amount},
                                              {"created_at", node_.now()},
                                              {"event_id", "evt-" + to_hex(tx.tx_id)},
                                              {"kind", kind},
                                              {"memo", tx.memo},
                                              {"ref_id", std::move(ref_id)},
                                              {"to", tx.to.str()},
                                              {"tx_id", to_hex(tx.tx_id)}});
}

std::uint64_t CampusService::next_allocation_seed() {
  if (seed_stream_) return seed_stream_->next();
  std::uint64_t s = 0;
  if (RAND_bytes(reinterpret_cast<unsigned char*>(&s), sizeof s) != 1)
    throw Error(Errc::INTERNAL, "entropy unavailable");
  return s;
}

// Identity -------------------------------------------------------------------

Json CampusService::import_members(const Json& doc) {
  if (!doc.is_object()) throw Error(Errc::MALFORMED, "members document must be an object");
  std::lock_guard lock(workflow_mu_);
  Json counts = Json::object();
  for (const auto& [key, collection] : {std::pair{"faculty", registry::kFaculty},
                                        std::pair{"supervisors", registry::kSupervisors},
                                        std::pair{"students", registry::kStudent}}) {
    std::uint64_t n = 0;
    if (doc.contains(key)) {
      if (!doc.at(key).is_array()) throw Error(Errc::MALFORMED, std::string(key) + " must be an array");
      for (const auto& m : doc.at(key)) {
        registry_.put(collection, m);
        ++n;
      }
    }
    counts[key] = n;
  }
  for (const auto& [k, v] : doc.items())
    if (k != "faculty" && k != "supervisors" && k != "students")
      throw Error(Errc::MALFORMED, "unknown members section " + k);
  return counts;
}

std::string CampusService::issue_token(const std::string& subject_id, Role role) {
  switch (role) {
    case Role::kStudent:
      require(registry::kStudent, subject_id);
      break;
    case Role::kFaculty:
      require(registry::kFaculty, subject_id);
      break;
    case Role::kSupervisor:
      require(registry::kSupervisors, subject_id);
      break;
    case Role::kValidator: {
      auto a = Address::parse(subject_id);
      if (!a || !node_.genesis().validators.contains(*a))
        throw Error(Errc::NOT_VALIDATOR, "validator tokens are issued to validator addresses",
                    {{"subject_id", subject_id}});
      break;
    }
  }
  std::lock_guard lock(workflow_mu_);
  const std::string token_id = registry_.next_id(registry::kTokens, "tok");
  const std::string secret = random_hex(32);
  registry_.put(registry::kTokens, Json{{"expires_at", node_.now() + config_.token_ttl_s},
                                        {"role", to_string(role)},
                                        {"secret_hash", to_hex(sha256(secret))},
                                        {"subject_id", subject_id},
                                        {"token_id", token_id}});
  return token_id + "." + secret;
}

Principal CampusService::authenticate(std::string_view token) const {
  const auto dot = token.find('.');
  if (dot == std::string_view::npos) throw Error(Errc::UNAUTHENTICATED, "malformed token");
  const std::string token_id(token.substr(0, dot));
  const Hash256 presented = sha256(token.substr(dot + 1));
  auto record = registry_.get(registry::kTokens, token_id);
  // Compare against a dummy when the id is unknown so timing does not reveal which ids exist.
  const auto stored = record ? from_hex_fixed<32>(record->at("secret_hash").get<std::string>()) : std::nullopt;
  const Hash256 expected = stored ? *stored : Hash256{};
  const bool match = CRYPTO_memcmp(presented.data(), expected.data(), expected.size()) == 0;
  if (!record || !stored || !match) throw Error(Errc::UNAUTHENTICATED, "invalid token");
  if (record->at("expires_at").get<std::uint64_t>() <= node_.now())
    throw Error(Errc::EXPIRED_TOKEN, "token expired", {{"token_id", token_id}});
  auto role = role_from(record->at("role").get<std::string>());
  if (!role) throw Error(Errc::UNAUTHENTICATED, "token carries an unknown role");
  return Principal{record->at("subject_id").get<std::string>(), *role};
}

// Chain ----------------------------------------------------------------------

Json CampusService::balance(const Address& address) const {
  const auto committed = node_.committed_state();
  const auto pending = node_.pending_state();
  return Json{{"address", address.str()},
              {"balance", committed.balance_of(address)},
              {"next_nonce", pending.next_nonce(address)},
              {"pending_balance", pending.balance_of(address)}};
}

Json CampusService::submit_transaction(const Principal&, const ledger::Transaction& tx) {
  constexpr std::string_view kCampaignPrefix = "campaign:";
  std::lock_guard lock(workflow_mu_);
  if (tx.memo.starts_with(kCampaignPrefix)) return donate_locked(tx.memo.substr(kCampaignPrefix.size()), tx);
  const auto before = node_.status_of(tx.tx_id);
  const auto result = node_.submit(tx);
  if (before.status == node::TxStatus::kUnknown)
    record_event(tx.kind == ledger::TxKind::kMint ? "MINT" : "TRANSFER", tx, tx.from.str());
  return result.to_json();
}

// Research -------------------------------------------------------------------

Json CampusService::create_project(const Principal& who, const Json& body) {
  const std::string topic = str_field(body, "topic");
  const Json& students = field(body, "student_ids");
  if (!students.is_array()) throw Error(Errc::MALFORMED, "student_ids must be an array");
  std::lock_guard lock(workflow_mu_);
  Json doc{{"approved", false},
           {"created_at", node_.now()},
           {"faculty_id", who.subject_id},
           {"project_id", registry_.next_id(registry::kResearchProject, "proj")},
           {"publications", Json::array()},
           {"student_ids", students},
           {"topic", topic}};
  registry_.put(registry::kResearchProject, doc);
  return doc;
}

Json CampusService::approve_project(const Principal& who, std::string_view project_id) {
  std::lock_guard lock(workflow_mu_);
  Json doc = require(registry::kResearchProject, project_id);
  if (doc.at("faculty_id") != who.subject_id)
    throw Error(Errc::NOT_PROJECT_FACULTY, "only the project's faculty may approve it");
  doc["approved"] = true;
  registry_.put(registry::kResearchProject, doc);
  return doc;
}

Json CampusService::submit_report(const Principal& who, std::string_view project_id, const Json& body) {
  const std::string content_ref = str_field(body, "content_ref");
  std::lock_guard lock(workflow_mu_);
  const auto project = project_from(require(registry::kResearchProject, project_id));
  if (std::find(project.student_ids.begin(), project.student_ids.end(), who.subject_id) == project.student_ids.end())
    throw Error(Errc::NOT_PROJECT_MEMBER, "student is not on this project's team");
  if (!project.approved) throw Error(Errc::PROJECT_NOT_APPROVED, "project has not been approved by its faculty");
  Json doc{{"content_ref", content_ref},
           {"feedback", ""},
           {"grade", nullptr},
           {"project_id", project.project_id},
           {"report_id", registry_.next_id(registry::kBiweeklyReports, "rep")},
           {"score", nullptr},
           {"student_id", who.subject_id},
           {"submitted_at", node_.now()}};
  registry_.put(registry::kBiweeklyReports, doc);
  return doc;
}

Json CampusService::grade_report(const Principal& who, std::string_view report_id, const Json& body) {
  auto component = [&](const char* key) {
    const std::int64_t v = int_field(body, key);
    if (v < 0 || v > 10)
      throw Error(Errc::COMPONENT_OUT_OF_RANGE, "grade components must be integers 0-10", {{"field", key}});
    return static_cast<int>(v);
  };
  const research::Grade grade{component("novelty"), component("effort"), component("relevance")};
  std::string feedback = str_field_or(body, "feedback", "");
  std::lock_guard lock(workflow_mu_);
  Json doc = require(registry::kBiweeklyReports, report_id);
  const auto project = project_from(require(registry::kResearchProject, doc.at("project_id").get<std::string>()));
  const auto graded = research::grade_report(report_from(doc), grade, std::move(feedback), project, who.subject_id);
  doc["grade"] = Json{{"effort", grade.effort}, {"novelty", grade.novelty}, {"relevance", grade.relevance}};
  doc["score"] = graded.score->to_string();
  doc["feedback"] = graded.feedback;
  registry_.put(registry::kBiweeklyReports, doc);
  notify_student(graded.student_id, EventKind::kReportGraded,
                 "Report " + graded.report_id + " graded: score " + graded.score->to_string());
  return doc;
}

Json CampusService::add_publication(const Principal& who, std::string_view project_id, const Json& body) {
  const std::string journal = str_field(body, "journal_name");
  const auto impact = Decimal4::parse(str_field(body, "impact_factor"));
  if (!impact) throw Error(Errc::MALFORMED, "impact_factor must be a non-negative decimal with at most 4 places");
  const std::uint64_t authors = u64_field(body, "n_authors");
  if (authors == 0) throw Error(Errc::ZERO_AUTHORS, "publication must have at least one author");
  if (authors > UINT32_MAX) throw Error(Errc::MALFORMED, "n_authors too large");

  std::lock_guard lock(workflow_mu_);
  Json doc = require(registry::kResearchProject, project_id);
  const auto project = project_from(doc);
  if (std::find(project.student_ids.begin(), project.student_ids.end(), who.subject_id) == project.student_ids.end())
    throw Error(Errc::NOT_PROJECT_MEMBER, "student is not on this project's team");
  if (!project.approved) throw Error(Errc::PROJECT_NOT_APPROVED, "project has not been approved by its faculty");

  research::Publication pub{project.project_id + "-pub-" + std::to_string(project.publications.size() + 1),
                            who.subject_id,
                            journal,
                            *impact,
                            static_cast<std::uint32_t>(authors),
                            false};
  doc["publications"].push_back(publication_json(pub));
  registry_.put(registry::kResearchProject, doc);
  return publication_json(pub);
}

Json CampusService::verify_publication(const Principal& who, std::string_view publication_id) {
  std::lock_guard lock(workflow_mu_);
  for (Json doc : registry_.query(registry::kResearchProject)) {
    for (auto& pub : doc["publications"]) {
      if (pub.at("publication_id") != publication_id) continue;
      if (doc.at("faculty_id") != who.subject_id)
        throw Error(Errc::NOT_PROJECT_FACULTY, "only the project's faculty may verify its publications");
      if (pub.at("verified").get<bool>())
        throw Error(Errc::ALREADY_VERIFIED, "publication already verified", {{"publication_id", publication_id}});
      pub["verified"] = true;
      const Json out = pub;
      registry_.put(registry::kResearchProject, doc);
      notify_student(out.at("student_id").get<std::string>(), EventKind::kPublicationVerified,
                     "Publication in " + out.at("journal_name").get<std::string>() + " verified");
      return out;
    }
  }
  throw Error(Errc::NOT_FOUND, "publication not found", {{"id", publication_id}});
}

std::pair<research::Ranklist, research::Ranklist> CampusService::ranklists() const {
  // Ranked students are the members of approved projects.
  std::map<std::string, research::StudentStanding> standings;
  const auto reports = registry_.query(registry::kBiweeklyReports);
  for (const auto& doc : registry_.query(registry::kResearchProject)) {
    const auto project = project_from(doc);
    if (!project.approved) continue;
    std::vector<research::BiweeklyReport> mine;
    for (const auto& r : reports)
      if (r.at("project_id") == project.project_id) mine.push_back(report_from(r));
    std::optional<Decimal4> rating;
    if (std::any_of(mine.begin(), mine.end(), [](const auto& r) { return r.score.has_value(); }))
      rating = research::mentor_rating(project, mine);
    for (const auto& sid : project.student_ids) {
      auto& st = standings[sid];
      st.student_id = sid;
      if (rating) st.mentor_ratings.push_back(*rating);
    }
    for (const auto& pub : project.publications)
      if (standings.count(pub.student_id)) standings[pub.student_id].publications.push_back(pub);
  }
  std::vector<research::StudentStanding> all;
  for (auto& [id, st] : standings) all.push_back(std::move(st));
  return research::build_ranklists(all);
}

Json CampusService::award_period(const Principal&, const Json& body) {
  const std::string period = str_field(body, "period");
  if (period.empty() || period.find(':') != std::string::npos)
    throw Error(Errc::MALFORMED, "period must be non-empty and contain no ':'");
  std::lock_guard lock(workflow_mu_);
  const auto lists = ranklists();
  const research::Ranklist* both[] = {&lists.first, &lists.second};
  bool already = registry_.get(registry::kAwardPeriods, period).has_value();
  for (const auto* list : both) already = already || node_.memo_count(research::award_memo(list->kind, period)) > 0;
  if (already) throw Error(Errc::PERIOD_ALREADY_AWARDED, "period already awarded", {{"period", period}});

  auto wallets = [&](const std::string& sid) { return wallet_of_student(sid); };
  const std::uint64_t ts = node_.now();
  const auto mints = node_.issue([&](economy::MintIssuer& issuer) {
    std::vector<ledger::Transaction> out;
    for (const auto* list : both) {
      auto part = research::award_for_ranklist(*list, config_.award_schedule, wallets, config_.award_budget, issuer,
                                               period, ts);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  });

  // Mints follow ranklist entry order, skipping zero awards.
  std::size_t i = 0;
  Json paid = Json::array();
  for (const auto* list : both) {
    for (const auto& e : list->entries) {
      if (config_.award_schedule.amount_for(e.rank) == 0) continue;
      const auto& tx = mints.at(i++);
      record_event("REWARD", tx, e.student_id);
      notify_student(e.student_id, EventKind::kRewardPaid,
                     std::to_string(tx.amount) + " coins for rank " + std::to_string(e.rank) + " on the " +
                         std::string(research::to_string(list->kind)) + " ranklist, period " + period);
      paid.push_back(Json{{"amount", tx.amount}, {"student_id", e.student_id}, {"tx_id", to_hex(tx.tx_id)}});
    }
  }
  Json record{{"awarded_at", ts},
              {"period", period},
              {"ranklists", Json::array({research::to_json(lists.first), research::to_json(lists.second)})},
              {"tx_count", mints.size()}};
  registry_.put(registry::kAwardPeriods, record);
  record["paid"] = std::move(paid);
  return record;
}

// Positions ------------------------------------------------------------------

Json CampusService::create_posting(const Principal& who, const Json& body) {
  const std::string type = str_field(body, "position_type");
  if (type.empty()) throw Error(Errc::MALFORMED, "position_type must be non-empty");
  const std::uint64_t rate = u64_field(body, "hourly_rate");
  if (rate == 0) throw Error(Errc::MALFORMED, "hourly_rate must be at least 1");
  const std::string cap_text = str_field_or(body, "weekly_hour_cap", positions::kMaxWeeklyHours.to_string());
  if (!Decimal4::parse(cap_text)) throw Error(Errc::MALFORMED, "weekly_hour_cap must be a decimal string");
  const auto cap = positions::Hours::parse(cap_text);
  if (!cap) throw Error(Errc::BAD_HOURS_INCREMENT, "weekly_hour_cap must be a multiple of 0.25 hours");
  if (*cap > positions::kMaxWeeklyHours || cap->quarters() == 0)
    throw Error(Errc::HOURS_EXCEED_CAP, "weekly_hour_cap must be between 0.25 and 10 hours");

  std::lock_guard lock(workflow_mu_);
  Json doc{{"applicant_ids", Json::array()},
           {"created_at", node_.now()},
           {"hourly_rate", rate},
           {"position_id", registry_.next_id(registry::kPositions, "pos")},
           {"position_type", type},
           {"status", "OPEN"},
           {"supervisor_id", who.subject_id},
           {"weekly_hour_cap", cap->to_string()}};
  registry_.put(registry::kPositions, doc);
  for (const auto& s : registry_.query(registry::kStudent, {{"enrolled", true}}))
    enqueue_notification(s.at("email").get<std::string>(), EventKind::kJobPosted,
                         "New " + type + " position " + doc.at("position_id").get<std::string>() + " at " +
                             std::to_string(rate) + " coins/hour");
  return doc;
}

std::vector<Json> CampusService::list_postings(const registry::Filter& filter) const {
  return registry_.query(registry::kPositions, filter);
}

Json CampusService::apply(const Principal& who, std::string_view position_id) {
  std::lock_guard lock(workflow_mu_);
  Json posting = require(registry::kPositions, position_id);
  if (posting.at("status") != "OPEN")
    throw Error(Errc::POSTING_NOT_OPEN, "posting is not open", {{"position_id", position_id}});
  auto& applicants = posting["applicant_ids"];
  if (std::find(applicants.begin(), applicants.end(), Json(who.subject_id)) != applicants.end())
    throw Error(Errc::DUPLICATE_APPLICATION, "already applied to this posting", {{"position_id", position_id}});

  Json app{{"application_id", registry_.next_id(registry::kApplications, "app")},
           {"applied_at", node_.now()},
           {"position_id", posting.at("position_id")},
           {"position_type", posting.at("position_type")},
           {"rated_at", nullptr},
           {"rated_by", nullptr},
           {"rating", nullptr},
           {"status", kApplied},
           {"student_id", who.subject_id},
           {"supervisor_id", posting.at("supervisor_id")}};
  registry_.put(registry::kApplications, app);
  applicants.push_back(who.subject_id);
  registry_.put(registry::kPositions, posting);
  return app;
}

Json CampusService::allocate(const Principal& who, std::string_view position_id) {
  std::lock_guard lock(workflow_mu_);
  Json posting_doc = require(registry::kPositions, position_id);
  if (posting_doc.at("supervisor_id") != who.subject_id)
    throw Error(Errc::NOT_SUPERVISOR, "only the posting's supervisor may allocate it");
  const auto posting = posting_from(posting_doc);

  std::vector<positions::RatingRecord> history;
  for (const auto& app : registry_.query(registry::kApplications)) {
    if (app.at("rating").is_null()) continue;
    history.push_back({app.at("student_id").get<std::string>(), app.at("position_id").get<std::string>(),
                       app.at("position_type").get<std::string>(), app.at("rating").get<int>(),
                       app.at("rated_by").get<std::string>(), app.at("rated_at").get<std::uint64_t>()});
  }
  const auto result = positions::allocate(posting, history, next_allocation_seed(), config_.allocation);
  Json audit = result.audit();

  registry_.put(registry::kAllocationAudit,
                Json{{"created_at", node_.now()}, {"position_id", posting.position_id}, {"record", audit}});
  std::string assignment_id;
  for (Json app : registry_.query(registry::kApplications, {{"position_id", posting.position_id}})) {
    const bool won = app.at("student_id") == result.winner;
    app["status"] = won ? kActive : kNotSelected;
    if (won) assignment_id = app.at("application_id").get<std::string>();
    registry_.put(registry::kApplications, app);
  }
  posting_doc["status"] = "ASSIGNED";
  registry_.put(registry::kPositions, posting_doc);
  notify_student(result.winner, EventKind::kJobAssigned,
                 "You were selected for position " + posting.position_id + " (assignment " + assignment_id + ")");
  audit["assignment_id"] = assignment_id;
  return audit;
}

Json CampusService::submit_timesheet(const Principal& who, std::string_view assignment_id, const Json& body) {
  const std::string week = str_field(body, "week_start");
  if (!is_date(week)) throw Error(Errc::MALFORMED, "week_start must be YYYY-MM-DD");
  const std::string hours_text = str_field(body, "hours");
  if (!Decimal4::parse(hours_text)) throw Error(Errc::MALFORMED, "hours must be a decimal string");
  const auto hours = positions::Hours::parse(hours_text);
  if (!hours) throw Error(Errc::BAD_HOURS_INCREMENT, "hours must be a multiple of 0.25");
  if (hours->quarters() == 0) throw Error(Errc::MALFORMED, "hours must be positive");

  std::lock_guard lock(workflow_mu_);
  const Json app = require(registry::kApplications, assignment_id);
  if (app.at("student_id") != who.subject_id) forbid("assignment belongs to another student");
  const std::string timesheet_id = std::string(assignment_id) + ":" + week;
  if (registry_.get(registry::kTimesheets, timesheet_id))
    throw Error(Errc::DUPLICATE_TIMESHEET, "timesheet already submitted for this week",
                {{"assignment_id", assignment_id}, {"week_start", week}});
  if (app.at("status") != kActive)
    throw Error(Errc::INACTIVE_ASSIGNMENT, "assignment is not active", {{"assignment_id", assignment_id}});

  const auto posting = posting_from(require(registry::kPositions, app.at("position_id").get<std::string>()));
  const auto assignment = assignment_from(app);
  const auto wallet = wallet_of_student(assignment.student_id);
  if (!wallet) throw Error(Errc::MISSING_WALLET, "student has no wallet", {{"student_id", assignment.student_id}});
  const positions::Timesheet sheet{assignment.assignment_id, week, *hours};
  const std::uint64_t ts = node_.now();
  const auto tx = node_.issue([&](economy::MintIssuer& issuer) {
                        return std::vector<ledger::Transaction>{
                            positions::compute_payout(sheet, posting, assignment, *wallet, issuer, ts)};
                      }).front();

  record_event("WAGE", tx, assignment.assignment_id);
  Json doc{{"amount", tx.amount},  {"assignment_id", assignment.assignment_id}, {"hours", hours->to_string()},
           {"timesheet_id", timesheet_id}, {"tx_id", to_hex(tx.tx_id)},        {"week_start", week}};
  registry_.put(registry::kTimesheets, doc);
  notify_student(assignment.student_id, EventKind::kRewardPaid,
                 std::to_string(tx.amount) + " coins for " + hours->to_string() + " hours, week of " + week);
  return doc;
}

Json CampusService::complete_assignment(const Principal& who, std::string_view assignment_id) {
  std::lock_guard lock(workflow_mu_);
  Json app = require(registry::kApplications, assignment_id);
  if (app.at("supervisor_id") != who.subject_id)
    throw Error(Errc::NOT_SUPERVISOR, "only the posting's supervisor may complete it");
  if (app.at("status") != kActive)
    throw Error(Errc::INACTIVE_ASSIGNMENT, "assignment is not active", {{"assignment_id", assignment_id}});
  app["status"] = kCompleted;
  registry_.put(registry::kApplications, app);
  Json posting = require(registry::kPositions, app.at("position_id").get<std::string>());
  posting["status"] = "COMPLETED";
  registry_.put(registry::kPositions, posting);
  return app;
}

Json CampusService::rate_assignment(const Principal& who, std::string_view assignment_id, const Json& body) {
  const std::int64_t raw = int_field(body, "rating");
  std::lock_guard lock(workflow_mu_);
  Json app = require(registry::kApplications, assignment_id);
  if (app.at("status") == kApplied || app.at("status") == kNotSelected)
    throw Error(Errc::NOT_FOUND, "no assignment with this id", {{"assignment_id", assignment_id}});
  const int rating = static_cast<int>(std::clamp<std::int64_t>(raw, -1, 11));
  const auto record = positions::record_rating(assignment_from(app), rating, who.subject_id, node_.now());
  app["rating"] = record.rating;
  app["rated_by"] = record.rated_by;
  app["rated_at"] = record.rated_at;
  registry_.put(registry::kApplications, app);
  notify_student(record.student_id, EventKind::kRatingReceived,
                 "Rated " + std::to_string(record.rating) + "/10 for position " + record.position_id);
  return app;
}

// Campaigns ------------------------------------------------------------------

Json CampusService::create_campaign(const Principal& who, const Json& body) {
  const std::uint64_t goal = u64_field(body, "goal");
  const std::string description = str_field_or(body, "description", "");
  std::optional<Address> beneficiary;
  if (body.contains("beneficiary")) {
    beneficiary = Address::parse(str_field(body, "beneficiary"));
    if (!beneficiary) throw Error(Errc::MALFORMED, "beneficiary is not an address");
  } else {
    for (auto c : {registry::kStudent, registry::kFaculty, registry::kSupervisors}) {
      auto doc = registry_.get(c, who.subject_id);
      if (doc && doc->contains("wallet_address") && !doc->at("wallet_address").is_null()) {
        beneficiary = Address::parse(doc->at("wallet_address").get<std::string>());
        break;
      }
    }
    if (!beneficiary) throw Error(Errc::UNKNOWN_BENEFICIARY, "caller has no registered wallet; name a beneficiary");
  }
  std::lock_guard lock(workflow_mu_);
  const auto c = economy::create_campaign(registry_.next_id(registry::kCampaigns, "camp"), *beneficiary, goal,
                                          description, node_.now(),
                                          [&](const Address& a) { return is_member_wallet(a); });
  Json doc = economy::to_json(c);
  registry_.put(registry::kCampaigns, doc);
  return doc;
}

Json CampusService::refresh_campaign_locked(Json doc) {
  // Funds on the ledger are authoritative; the registry copy follows them.
  auto c = economy::campaign_from_json(doc);
  const std::uint64_t raised = std::min(node_.memo_total(economy::campaign_memo(c.campaign_id), c.beneficiary), c.goal);
  if (raised != c.raised) {
    c.raised = raised;
    c.status = raised == c.goal ? economy::CampaignStatus::kClosed : economy::CampaignStatus::kOpen;
    doc = economy::to_json(c);
    registry_.put(registry::kCampaigns, doc);
  }
  return doc;
}

std::vector<Json> CampusService::list_campaigns() {
  std::lock_guard lock(workflow_mu_);
  std::vector<Json> out;
  for (auto& doc : registry_.query(registry::kCampaigns)) out.push_back(refresh_campaign_locked(std::move(doc)));
  return out;
}

Json CampusService::donate_locked(std::string_view campaign_id, const ledger::Transaction& tx) {
  auto doc = registry_.get(registry::kCampaigns, campaign_id);
  if (!doc) throw Error(Errc::INVALID_DONATION, "no campaign " + std::string(campaign_id), {{"campaign_id", campaign_id}});
  if (auto s = node_.status_of(tx.tx_id); s.status != node::TxStatus::kUnknown) {
    Json out = node_.submit(tx).to_json();  // idempotent resubmission
    out["campaign"] = refresh_campaign_locked(*doc);
    return out;
  }
  const auto campaign = economy::campaign_from_json(refresh_campaign_locked(*doc));
  const auto donation = economy::donate(campaign, tx, node_.pending_state());
  Json out = node_.submit(tx).to_json();
  Json updated = economy::to_json(donation.campaign);
  registry_.put(registry::kCampaigns, updated);
  record_event("DONATION", tx, campaign.campaign_id);
  if (auto email = email_of_wallet(campaign.beneficiary)) {
    std::string body = "Received " + std::to_string(tx.amount) + " coins for campaign " + campaign.campaign_id + " (" +
                       std::to_string(donation.campaign.raised) + "/" + std::to_string(donation.campaign.goal) + ")";
    if (donation.campaign.status == economy::CampaignStatus::kClosed) body += "; goal reached, campaign closed";
    enqueue_notification(*email, EventKind::kCampaignUpdate, std::move(body));
  }
  out["campaign"] = updated;
  return out;
}

Json CampusService::donate(const Principal&, std::string_view campaign_id, const ledger::Transaction& tx) {
  std::lock_guard lock(workflow_mu_);
  if (!registry_.get(registry::kCampaigns, campaign_id))
    throw Error(Errc::NOT_FOUND, "campaign not found", {{"campaign_id", campaign_id}});
  return donate_locked(campaign_id, tx);
}

// Outbox ---------------------------------------------------------------------

Json CampusService::enqueue_notification(const std::string& recipient_email, EventKind kind, std::string body) {
  bool known = false;
  for (auto c : {registry::kStudent, registry::kFaculty, registry::kSupervisors})
    known = known || !registry_.query(c, {{"email", recipient_email}}).empty();
  if (!known) throw Error(Errc::UNKNOWN_RECIPIENT, "no member with email " + recipient_email);
  Json doc{{"body", std::move(body)},
           {"created_at", node_.now()},
           {"delivered", false},
           {"event_kind", to_string(kind)},
           {"notification_id", registry_.next_id(registry::kOutbox, "ntf")},
           {"recipient_email", recipient_email}};
  registry_.put(registry::kOutbox, doc);
  return doc;
}

std::vector<Json> CampusService::outbox() const { return registry_.query(registry::kOutbox); }

void CampusService::set_delivery(std::unique_ptr<DeliveryAdapter> adapter) {
  std::lock_guard lock(workflow_mu_);
  delivery_ = std::move(adapter);
}

std::size_t CampusService::deliver_pending() {
  std::lock_guard lock(workflow_mu_);
  if (!delivery_) return 0;
  std::size_t n = 0;
  for (Json doc : registry_.query(registry::kOutbox, {{"delivered", false}})) {
    if (!delivery_->deliver(doc)) continue;
    doc["delivered"] = true;
    registry_.put(registry::kOutbox, doc);
    ++n;
  }
  return n;
}

Reconciliation CampusService::reconcile() const {
  Reconciliation r;
  std::map<std::string, ledger::Transaction> committed;
  for (const auto& [h, tx] : node_.committed_transactions()) committed.emplace(to_hex(tx.tx_id), tx);
  std::set<std::string> pending;
  for (const auto& tx : node_.mempool()) pending.insert(to_hex(tx.tx_id));

  std::set<std::string> recorded;
  for (const auto& ev : registry_.query(registry::kLedgerEvents)) {
    const std::string id = ev.at("tx_id").get<std::string>();
    recorded.insert(id);
    if (pending.count(id)) {
      ++r.pending;
      continue;
    }
    auto it = committed.find(id);
    if (it == committed.end()) {
      r.lost.push_back(id);
      continue;
    }
    const auto& tx = it->second;
    if (ev.at("memo") != tx.memo || ev.at("to") != tx.to.str() || ev.at("amount") != tx.amount)
      r.mismatched.push_back(id);
    else
      ++r.matched;
  }
  for (const auto& [id, tx] : committed)
    if (!recorded.count(id)) r.unrecorded.push_back(id);
  return r;
}

}  // namespace campus::service
