#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "campus/append_log.hpp"
#include "campus/canonical_json.hpp"
#include "campus/error.hpp"

/// Document registry: id-keyed collections with schemas enforced at the
/// application layer, referential integrity, unique keys and soft deletes.
namespace campus::registry {

// Collection names.
inline constexpr std::string_view kStudent = "Student";
inline constexpr std::string_view kFaculty = "Faculty";
inline constexpr std::string_view kResearchProject = "ResearchProject";
inline constexpr std::string_view kBiweeklyReports = "BiweeklyReports";
inline constexpr std::string_view kSupervisors = "Supervisors";
inline constexpr std::string_view kPositions = "PositionOfResponsibility";
inline constexpr std::string_view kApplications = "ApplicationHistory";
// Operational collections beyond the seven campus ones.
inline constexpr std::string_view kCampaigns = "Campaigns";
inline constexpr std::string_view kTimesheets = "Timesheets";
inline constexpr std::string_view kLedgerEvents = "LedgerEvents";
inline constexpr std::string_view kOutbox = "Outbox";
inline constexpr std::string_view kAllocationAudit = "AllocationAudit";
inline constexpr std::string_view kAwardPeriods = "AwardPeriods";
inline constexpr std::string_view kTokens = "Tokens";

/// One stored version of a document. On disk each is a canonical JSON line
/// {body, collection, id, tombstone, version}.
struct Record {
  std::string collection;
  std::string id;
  std::uint64_t version = 0;
  bool tombstone = false;
  Json body;

  bool operator==(const Record&) const = default;
};

Json to_json(const Record& r);
Record record_from_json(const Json& j);

/// Storage backend: latest record per (collection, id).
class DocumentStore {
 public:
  virtual ~DocumentStore() = default;
  virtual void write(const Record& record) = 0;
  virtual std::optional<Record> read(std::string_view collection, std::string_view id) const = 0;
  /// All records of a collection, tombstones included, ordered by id.
  virtual std::vector<Record> scan(std::string_view collection) const = 0;
  virtual void flush() = 0;
};

class MemoryStore : public DocumentStore {
 public:
  void write(const Record& record) override;
  std::optional<Record> read(std::string_view collection, std::string_view id) const override;
  std::vector<Record> scan(std::string_view collection) const override;
  void flush() override {}

 private:
  std::map<std::string, std::map<std::string, Record>, std::less<>> collections_;
};

/// Snapshot file plus append log under one directory. Every write appends to
/// the log; compact() folds the log into a fresh snapshot.
class FileStore : public DocumentStore {
 public:
  explicit FileStore(const std::filesystem::path& dir);

  void write(const Record& record) override;
  std::optional<Record> read(std::string_view collection, std::string_view id) const override;
  std::vector<Record> scan(std::string_view collection) const override;
  void flush() override;
  void compact();

 private:
  std::filesystem::path snapshot_path_;
  MemoryStore memory_;
  std::unique_ptr<AppendLog> log_;
};

enum class FieldType { kString, kUInt, kBool, kAddress, kDecimal, kStringArray, kObject, kArray };

struct FieldSpec {
  std::string name;
  FieldType type = FieldType::kString;
  bool required = true;
  bool nullable = false;
  std::optional<std::string> references;  // collection whose ids this field holds
  bool unique = false;
  bool indexed = false;
};

struct CollectionSchema {
  std::string name;
  std::string key_field;
  std::vector<FieldSpec> fields;

  const FieldSpec* field(std::string_view name) const;
};

/// The seven campus collections plus the operational ones.
const std::vector<CollectionSchema>& campus_schemas();

/// Conjunction of field == value predicates.
using Filter = std::vector<std::pair<std::string, Json>>;

class Registry {
 public:
  explicit Registry(std::unique_ptr<DocumentStore> store, std::vector<CollectionSchema> schemas = campus_schemas());

  /// Validated upsert keyed by the schema's key field; returns the id.
  /// Throws SCHEMA_VIOLATION, BROKEN_REFERENCE (details.field), DUPLICATE_UNIQUE_KEY, UNKNOWN_COLLECTION.
  std::string put(std::string_view collection, const Json& document);

  std::optional<Json> get(std::string_view collection, std::string_view id) const;
  std::optional<std::uint64_t> version(std::string_view collection, std::string_view id) const;

  /// Tombstones the document. Throws REFERENCED while live documents point at it.
  void remove(std::string_view collection, std::string_view id);

  /// Live documents matching every predicate, ordered by id. Throws UNKNOWN_FIELD.
  std::vector<Json> query(std::string_view collection, const Filter& filter = {}) const;

  /// "<prefix>-<n>" with n one past the number of ids ever used in the collection.
  std::string next_id(std::string_view collection, std::string_view prefix) const;

  const CollectionSchema& schema(std::string_view collection) const;
  void flush();

 private:
  using Index = std::map<std::string, std::set<std::string>>;  // canonical value -> ids

  void validate(const CollectionSchema& schema, const Json& doc) const;
  void check_references(const CollectionSchema& schema, const Json& doc) const;
  void check_unique(const CollectionSchema& schema, const Json& doc, const std::string& id) const;
  bool is_live(std::string_view collection, std::string_view id) const;
  void index_add(const CollectionSchema& schema, const std::string& id, const Json& doc);
  void index_remove(const CollectionSchema& schema, const std::string& id, const Json& doc);

  std::unique_ptr<DocumentStore> store_;
  std::vector<CollectionSchema> schemas_;
  std::map<std::string, std::map<std::string, Index>, std::less<>> indexes_;
  std::map<std::string, std::size_t, std::less<>> id_counts_;
  mutable std::shared_mutex mutex_;
};

}  // namespace campus::registry
