#include "campus/registry.hpp"

#include <mutex>

#include "campus/address.hpp"
#include "campus/decimal.hpp"

namespace campus::registry {

namespace fs = std::filesystem;

Json to_json(const Record& r) {
  return Json{{"body", r.body}, {"collection", r.collection}, {"id", r.id}, {"tombstone", r.tombstone},
              {"version", r.version}};
}

Record record_from_json(const Json& j) {
  if (!j.is_object() || j.size() != 5) throw Error(Errc::MALFORMED, "record must have exactly five fields");
  return Record{j.at("collection").get<std::string>(), j.at("id").get<std::string>(),
                j.at("version").get<std::uint64_t>(), j.at("tombstone").get<bool>(), j.at("body")};
}

// MemoryStore --------------------------------------------------------------

void MemoryStore::write(const Record& record) { collections_[record.collection][record.id] = record; }

std::optional<Record> MemoryStore::read(std::string_view collection, std::string_view id) const {
  auto c = collections_.find(collection);
  if (c == collections_.end()) return std::nullopt;
  auto it = c->second.find(std::string(id));
  if (it == c->second.end()) return std::nullopt;
  return it->second;
}

std::vector<Record> MemoryStore::scan(std::string_view collection) const {
  std::vector<Record> out;
  auto c = collections_.find(collection);
  if (c == collections_.end()) return out;
  out.reserve(c->second.size());
  for (const auto& [id, r] : c->second) out.push_back(r);
  return out;
}

// FileStore ----------------------------------------------------------------

FileStore::FileStore(const fs::path& dir) : snapshot_path_(dir / "registry.snapshot") {
  fs::create_directories(dir);
  auto load = [&](const std::vector<std::string>& lines, const fs::path& source) {
    for (const auto& line : lines) {
      try {
        memory_.write(record_from_json(parse_canonical(line)));
      } catch (const std::exception& e) {
        throw Error(Errc::IO_ERROR, "corrupt record in " + source.string() + ": " + e.what());
      }
    }
  };
  if (fs::exists(snapshot_path_)) {
    AppendLog snapshot(snapshot_path_);
    load(snapshot.read_all(), snapshot_path_);
  }
  log_ = std::make_unique<AppendLog>(dir / "registry.log");
  load(log_->read_all(), log_->path());
}

void FileStore::write(const Record& record) {
  log_->append(canonical_dump(to_json(record)));
  memory_.write(record);
}

std::optional<Record> FileStore::read(std::string_view collection, std::string_view id) const {
  return memory_.read(collection, id);
}

std::vector<Record> FileStore::scan(std::string_view collection) const { return memory_.scan(collection); }

void FileStore::flush() { log_->sync(); }

void FileStore::compact() {
  std::vector<std::string> lines;
  for (const auto& schema : campus_schemas())
    for (const auto& r : memory_.scan(schema.name)) lines.push_back(canonical_dump(to_json(r)));
  write_file_atomically(snapshot_path_, lines);
  log_->rewrite({});
}

// Schemas ------------------------------------------------------------------

const FieldSpec* CollectionSchema::field(std::string_view n) const {
  for (const auto& f : fields)
    if (f.name == n) return &f;
  return nullptr;
}

namespace {

FieldSpec of(std::string name, FieldType t) {
  FieldSpec f;
  f.name = std::move(name);
  f.type = t;
  return f;
}
FieldSpec key(std::string name) { return of(std::move(name), FieldType::kString); }
FieldSpec text(std::string name) { return of(std::move(name), FieldType::kString); }
FieldSpec uint(std::string name) { return of(std::move(name), FieldType::kUInt); }
FieldSpec boolean(std::string name) { return of(std::move(name), FieldType::kBool); }
FieldSpec ref(std::string name, std::string_view target) {
  FieldSpec f = of(std::move(name), FieldType::kString);
  f.references = std::string(target);
  f.indexed = true;
  return f;
}
FieldSpec indexed(FieldSpec f) {
  f.indexed = true;
  return f;
}
FieldSpec nullable(FieldSpec f) {
  f.nullable = true;
  return f;
}
FieldSpec optional(FieldSpec f) {
  f.required = false;
  return f;
}
FieldSpec unique(FieldSpec f) {
  f.unique = true;
  f.indexed = true;
  return f;
}
FieldSpec refs(std::string name, std::string_view target) {
  FieldSpec f = of(std::move(name), FieldType::kStringArray);
  f.references = std::string(target);
  return f;
}

std::vector<CollectionSchema> build_schemas() {
  return {
      {std::string(kStudent), "student_id",
       {key("student_id"), text("name"), indexed(text("email")), unique(of("wallet_address", FieldType::kAddress)),
        boolean("enrolled")}},
      {std::string(kFaculty), "faculty_id",
       {key("faculty_id"), text("name"), indexed(text("email")), text("role"),
        optional(nullable(unique(of("wallet_address", FieldType::kAddress))))}},
      {std::string(kResearchProject), "project_id",
       {key("project_id"), text("topic"), ref("faculty_id", kFaculty), refs("student_ids", kStudent),
        boolean("approved"), of("publications", FieldType::kArray), uint("created_at")}},
      {std::string(kBiweeklyReports), "report_id",
       {key("report_id"), ref("project_id", kResearchProject), ref("student_id", kStudent), uint("submitted_at"),
        text("content_ref"), nullable(of("grade", FieldType::kObject)), nullable(of("score", FieldType::kDecimal)),
        text("feedback")}},
      {std::string(kSupervisors), "supervisor_id",
       {key("supervisor_id"), text("name"), indexed(text("email")), text("role"),
        optional(nullable(unique(of("wallet_address", FieldType::kAddress))))}},
      {std::string(kPositions), "position_id",
       {key("position_id"), ref("supervisor_id", kSupervisors), indexed(text("position_type")), uint("hourly_rate"),
        text("weekly_hour_cap"), indexed(text("status")), refs("applicant_ids", kStudent), uint("created_at")}},
      {std::string(kApplications), "application_id",
       {key("application_id"), ref("position_id", kPositions), ref("student_id", kStudent),
        ref("supervisor_id", kSupervisors), indexed(text("position_type")), uint("applied_at"),
        indexed(text("status")), nullable(uint("rating")), nullable(text("rated_by")), nullable(uint("rated_at"))}},
      {std::string(kCampaigns), "campaign_id",
       {key("campaign_id"), indexed(of("beneficiary", FieldType::kAddress)), uint("goal"), uint("raised"),
        indexed(text("status")), text("description"), uint("created_at")}},
      {std::string(kTimesheets), "timesheet_id",
       {key("timesheet_id"), ref("assignment_id", kApplications), text("week_start"), text("hours"), uint("amount"),
        text("tx_id")}},
      {std::string(kLedgerEvents), "event_id",
       {key("event_id"), indexed(text("kind")), unique(text("tx_id")), text("memo"), of("to", FieldType::kAddress),
        uint("amount"), text("ref_id"), uint("created_at")}},
      {std::string(kOutbox), "notification_id",
       {key("notification_id"), indexed(text("recipient_email")), indexed(text("event_kind")), text("body"),
        uint("created_at"), indexed(boolean("delivered"))}},
      {std::string(kAllocationAudit), "position_id",
       {key("position_id"), of("record", FieldType::kObject), uint("created_at")}},
      {std::string(kAwardPeriods), "period",
       {key("period"), of("ranklists", FieldType::kArray), uint("tx_count"), uint("awarded_at")}},
      {std::string(kTokens), "token_id",
       {key("token_id"), indexed(text("subject_id")), text("role"), text("secret_hash"), uint("expires_at")}},
  };
}

bool type_matches(FieldType t, const Json& v) {
  switch (t) {
    case FieldType::kString:
      return v.is_string();
    case FieldType::kUInt:
      return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    case FieldType::kBool:
      return v.is_boolean();
    case FieldType::kAddress: {
      if (!v.is_string()) return false;
      auto a = Address::parse(v.get_ref<const std::string&>());
      return a && !a->is_authority();
    }
    case FieldType::kDecimal:
      return v.is_string() && Decimal4::parse(v.get_ref<const std::string&>()).has_value();
    case FieldType::kStringArray:
      if (!v.is_array()) return false;
      for (const auto& e : v)
        if (!e.is_string()) return false;
      return true;
    case FieldType::kObject:
      return v.is_object();
    case FieldType::kArray:
      return v.is_array();
  }
  return false;
}

[[noreturn]] void schema_violation(const std::string& collection, const std::string& why) {
  throw Error(Errc::SCHEMA_VIOLATION, collection + ": " + why);
}

}  // namespace

const std::vector<CollectionSchema>& campus_schemas() {
  static const std::vector<CollectionSchema> schemas = build_schemas();
  return schemas;
}

// Registry -----------------------------------------------------------------

Registry::Registry(std::unique_ptr<DocumentStore> store, std::vector<CollectionSchema> schemas)
    : store_(std::move(store)), schemas_(std::move(schemas)) {
  for (const auto& s : schemas_) {
    auto& count = id_counts_[s.name];
    for (const auto& r : store_->scan(s.name)) {
      ++count;
      if (!r.tombstone) index_add(s, r.id, r.body);
    }
  }
}

const CollectionSchema& Registry::schema(std::string_view collection) const {
  for (const auto& s : schemas_)
    if (s.name == collection) return s;
  throw Error(Errc::UNKNOWN_COLLECTION, "no collection named " + std::string(collection));
}

void Registry::validate(const CollectionSchema& schema, const Json& doc) const {
  if (!doc.is_object()) schema_violation(schema.name, "document must be an object");
  for (const auto& [name, value] : doc.items())
    if (!schema.field(name)) schema_violation(schema.name, "unexpected field " + name);
  for (const auto& f : schema.fields) {
    auto it = doc.find(f.name);
    if (it == doc.end()) {
      if (f.required) schema_violation(schema.name, "missing field " + f.name);
      continue;
    }
    if (it->is_null()) {
      if (!f.nullable) schema_violation(schema.name, "field " + f.name + " may not be null");
      continue;
    }
    if (!type_matches(f.type, *it)) schema_violation(schema.name, "field " + f.name + " has the wrong type");
  }
  const auto& k = doc.at(schema.key_field);
  if (k.get_ref<const std::string&>().empty()) schema_violation(schema.name, "empty key " + schema.key_field);
}

bool Registry::is_live(std::string_view collection, std::string_view id) const {
  auto r = store_->read(collection, id);
  return r && !r->tombstone;
}

void Registry::check_references(const CollectionSchema& schema, const Json& doc) const {
  for (const auto& f : schema.fields) {
    if (!f.references) continue;
    auto it = doc.find(f.name);
    if (it == doc.end() || it->is_null()) continue;
    auto broken = [&](const std::string& target) {
      throw Error(Errc::BROKEN_REFERENCE, schema.name + "." + f.name + " references unknown " + *f.references + " " + target,
                  {{"field", f.name}, {"value", target}});
    };
    if (it->is_array()) {
      for (const auto& e : *it)
        if (!is_live(*f.references, e.get_ref<const std::string&>())) broken(e.get<std::string>());
    } else if (!is_live(*f.references, it->get_ref<const std::string&>())) {
      broken(it->get<std::string>());
    }
  }
}

void Registry::check_unique(const CollectionSchema& schema, const Json& doc, const std::string& id) const {
  auto coll = indexes_.find(schema.name);
  for (const auto& f : schema.fields) {
    if (!f.unique) continue;
    auto it = doc.find(f.name);
    if (it == doc.end() || it->is_null()) continue;
    if (coll == indexes_.end()) continue;
    auto idx = coll->second.find(f.name);
    if (idx == coll->second.end()) continue;
    auto hit = idx->second.find(canonical_dump(*it));
    if (hit == idx->second.end()) continue;
    for (const auto& other : hit->second)
      if (other != id)
        throw Error(Errc::DUPLICATE_UNIQUE_KEY, schema.name + "." + f.name + " already used by " + other,
                    {{"field", f.name}, {"existing_id", other}});
  }
}

void Registry::index_add(const CollectionSchema& schema, const std::string& id, const Json& doc) {
  for (const auto& f : schema.fields) {
    if (!f.indexed) continue;
    auto it = doc.find(f.name);
    if (it == doc.end() || it->is_null()) continue;
    indexes_[schema.name][f.name][canonical_dump(*it)].insert(id);
  }
}

void Registry::index_remove(const CollectionSchema& schema, const std::string& id, const Json& doc) {
  for (const auto& f : schema.fields) {
    if (!f.indexed) continue;
    auto it = doc.find(f.name);
    if (it == doc.end() || it->is_null()) continue;
    auto& bucket = indexes_[schema.name][f.name];
    auto b = bucket.find(canonical_dump(*it));
    if (b == bucket.end()) continue;
    b->second.erase(id);
    if (b->second.empty()) bucket.erase(b);
  }
}

std::string Registry::put(std::string_view collection, const Json& input) {
  const CollectionSchema& s = schema(collection);
  std::unique_lock lock(mutex_);
  validate(s, input);
  Json document = input;
  for (const auto& f : s.fields)
    if (f.type == FieldType::kUInt && document.contains(f.name) && document[f.name].is_number_integer())
      document[f.name] = document[f.name].get<std::uint64_t>();
  const std::string id = document.at(s.key_field).get<std::string>();
  check_references(s, document);
  check_unique(s, document, id);

  auto previous = store_->read(collection, id);
  Record record{s.name, id, previous ? previous->version + 1 : 1, false, document};
  store_->write(record);
  if (previous && !previous->tombstone) index_remove(s, id, previous->body);
  if (!previous) ++id_counts_[s.name];
  index_add(s, id, document);
  return id;
}

std::optional<Json> Registry::get(std::string_view collection, std::string_view id) const {
  schema(collection);
  std::shared_lock lock(mutex_);
  auto r = store_->read(collection, id);
  if (!r || r->tombstone) return std::nullopt;
  return r->body;
}

std::optional<std::uint64_t> Registry::version(std::string_view collection, std::string_view id) const {
  std::shared_lock lock(mutex_);
  auto r = store_->read(collection, id);
  if (!r) return std::nullopt;
  return r->version;
}

void Registry::remove(std::string_view collection, std::string_view id) {
  const CollectionSchema& target = schema(collection);
  std::unique_lock lock(mutex_);
  auto previous = store_->read(collection, id);
  if (!previous || previous->tombstone) return;

  for (const auto& s : schemas_) {
    for (const auto& f : s.fields) {
      if (f.references != target.name) continue;
      for (const auto& r : store_->scan(s.name)) {
        if (r.tombstone || r.id == id) continue;
        auto it = r.body.find(f.name);
        if (it == r.body.end() || it->is_null()) continue;
        const bool hit = it->is_array() ? std::find(it->begin(), it->end(), Json(std::string(id))) != it->end()
                                        : *it == std::string(id);
        if (hit)
          throw Error(Errc::REFERENCED, std::string(collection) + " " + std::string(id) + " is referenced by " +
                                            s.name + " " + r.id,
                      {{"collection", s.name}, {"id", r.id}, {"field", f.name}});
      }
    }
  }
  Record tomb{target.name, std::string(id), previous->version + 1, true, previous->body};
  store_->write(tomb);
  index_remove(target, tomb.id, previous->body);
}

std::vector<Json> Registry::query(std::string_view collection, const Filter& filter) const {
  const CollectionSchema& s = schema(collection);
  for (const auto& [field, value] : filter)
    if (!s.field(field)) throw Error(Errc::UNKNOWN_FIELD, s.name + " has no field " + field, {{"field", field}});

  std::shared_lock lock(mutex_);
  auto matches = [&](const Json& body) {
    for (const auto& [field, value] : filter) {
      auto it = body.find(field);
      const Json& actual = it == body.end() ? Json() : *it;
      if (actual != value) return false;
    }
    return true;
  };

  // Narrow with the first indexed, non-null predicate when there is one.
  const std::set<std::string>* candidates = nullptr;
  static const std::set<std::string> kNone;
  for (const auto& [field, value] : filter) {
    if (!s.field(field)->indexed || value.is_null()) continue;
    auto coll = indexes_.find(s.name);
    if (coll == indexes_.end()) {
      candidates = &kNone;
      break;
    }
    auto idx = coll->second.find(field);
    if (idx == coll->second.end()) {
      candidates = &kNone;
      break;
    }
    auto hit = idx->second.find(canonical_dump(value));
    candidates = hit == idx->second.end() ? &kNone : &hit->second;
    break;
  }

  std::vector<Json> out;
  if (candidates) {
    for (const auto& id : *candidates) {
      auto r = store_->read(s.name, id);
      if (r && !r->tombstone && matches(r->body)) out.push_back(r->body);
    }
  } else {
    for (const auto& r : store_->scan(s.name))
      if (!r.tombstone && matches(r.body)) out.push_back(r.body);
  }
  return out;
}

std::string Registry::next_id(std::string_view collection, std::string_view prefix) const {
  const CollectionSchema& s = schema(collection);
  std::shared_lock lock(mutex_);
  auto it = id_counts_.find(s.name);
  std::size_t n = (it == id_counts_.end() ? 0 : it->second) + 1;
  for (;; ++n) {
    std::string id = std::string(prefix) + "-" + std::to_string(n);
    if (!store_->read(s.name, id)) return id;
  }
}

void Registry::flush() {
  std::unique_lock lock(mutex_);
  store_->flush();
}

}  // namespace campus::registry
