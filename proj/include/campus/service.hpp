#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "campus/node.hpp"
#include "campus/prng.hpp"
#include "campus/registry.hpp"

namespace campus::service {

enum class Role { kStudent, kFaculty, kSupervisor, kValidator };
std::string_view to_string(Role r);
std::optional<Role> role_from(std::string_view s);

struct Principal {
  std::string subject_id;
  Role role = Role::kStudent;
};

enum class EventKind {
  kReportGraded,
  kPublicationVerified,
  kJobPosted,
  kJobAssigned,
  kRatingReceived,
  kCampaignUpdate,
  kRewardPaid
};
std::string_view to_string(EventKind k);

class DeliveryAdapter {
 public:
  virtual ~DeliveryAdapter() = default;
  virtual bool deliver(const Json& notification) = 0;
};

/// Appends each delivered notification as a canonical JSON line.
class LogFileDelivery : public DeliveryAdapter {
 public:
  explicit LogFileDelivery(std::filesystem::path path) : path_(std::move(path)) {}
  bool deliver(const Json& notification) override;

 private:
  std::filesystem::path path_;
};

struct Reconciliation {
  std::size_t matched = 0;
  std::size_t pending = 0;
  std::vector<std::string> lost;        // event whose transaction is neither committed nor pending
  std::vector<std::string> unrecorded;  // committed transaction with no event
  std::vector<std::string> mismatched;  // event and transaction disagree on memo, recipient or amount

  bool ok() const { return lost.empty() && unrecorded.empty() && mismatched.empty(); }
  Json to_json() const;
};

class CampusService {
 public:
  CampusService(registry::Registry& registry, node::Node& node, node::NodeConfig config,
                std::optional<std::uint64_t> seed = std::nullopt);

  registry::Registry& registry() { return registry_; }
  node::Node& node() { return node_; }
  const node::NodeConfig& config() const { return config_; }

  // identity
  Json import_members(const Json& doc);
  std::string issue_token(const std::string& subject_id, Role role);
  Principal authenticate(std::string_view token) const;

  // chain
  Json balance(const Address& address) const;
  Json submit_transaction(const Principal& who, const ledger::Transaction& tx);

  // research
  Json create_project(const Principal& who, const Json& body);
  Json approve_project(const Principal& who, std::string_view project_id);
  Json submit_report(const Principal& who, std::string_view project_id, const Json& body);
  Json grade_report(const Principal& who, std::string_view report_id, const Json& body);
  Json add_publication(const Principal& who, std::string_view project_id, const Json& body);
  Json verify_publication(const Principal& who, std::string_view publication_id);
  std::pair<research::Ranklist, research::Ranklist> ranklists() const;
  Json award_period(const Principal& who, const Json& body);

  // positions
  Json create_posting(const Principal& who, const Json& body);
  std::vector<Json> list_postings(const registry::Filter& filter = {}) const;
  Json apply(const Principal& who, std::string_view position_id);
  Json allocate(const Principal& who, std::string_view position_id);
  Json submit_timesheet(const Principal& who, std::string_view assignment_id, const Json& body);
  Json complete_assignment(const Principal& who, std::string_view assignment_id);
  Json rate_assignment(const Principal& who, std::string_view assignment_id, const Json& body);

  // campaigns
  Json create_campaign(const Principal& who, const Json& body);
  std::vector<Json> list_campaigns();
  Json donate(const Principal& who, std::string_view campaign_id, const ledger::Transaction& tx);

  // outbox
  Json enqueue_notification(const std::string& recipient_email, EventKind kind, std::string body);
  std::vector<Json> outbox() const;
  void set_delivery(std::unique_ptr<DeliveryAdapter> adapter);
  std::size_t deliver_pending();

  Reconciliation reconcile() const;

 private:
  Json require(std::string_view collection, std::string_view id) const;
  std::optional<Address> wallet_of_student(const std::string& student_id) const;
  std::optional<std::string> email_of_wallet(const Address& a) const;
  bool is_member_wallet(const Address& a) const;
  void notify_student(const std::string& student_id, EventKind kind, std::string body);
  void record_event(std::string_view kind, const ledger::Transaction& tx, std::string ref_id);
  std::uint64_t next_allocation_seed();
  Json donate_locked(std::string_view campaign_id, const ledger::Transaction& tx);
  Json refresh_campaign_locked(Json campaign);

  registry::Registry& registry_;
  node::Node& node_;
  node::NodeConfig config_;
  std::optional<SplitMix64> seed_stream_;
  std::unique_ptr<DeliveryAdapter> delivery_;
  mutable std::mutex workflow_mu_;
};

}  // namespace campus::service
