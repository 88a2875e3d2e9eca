#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "campus/decimal.hpp"
#include "campus/economy.hpp"

/// Research incentives: graded biweekly reports, the weighted publication
/// metric, the two ranklists and rank-based awards.
namespace campus::research {

struct Grade {
  int novelty = 0;
  int effort = 0;
  int relevance = 0;
  bool operator==(const Grade&) const = default;
};

struct Publication {
  std::string publication_id;
  std::string student_id;
  std::string journal_name;
  Decimal4 impact_factor;
  std::uint32_t n_authors = 1;
  bool verified = false;
  bool operator==(const Publication&) const = default;
};

struct BiweeklyReport {
  std::string report_id;
  std::string project_id;
  std::string student_id;
  std::uint64_t submitted_at = 0;
  std::string content_ref;
  std::optional<Grade> grade;
  std::optional<Decimal4> score;
  std::string feedback;
  bool operator==(const BiweeklyReport&) const = default;
};

struct ResearchProject {
  std::string project_id;
  std::string topic;
  std::string faculty_id;
  std::vector<std::string> student_ids;
  bool approved = false;
  std::vector<Publication> publications;
};

enum class RanklistKind { kMentorRated, kPublished };
std::string_view to_string(RanklistKind kind);

struct RanklistEntry {
  std::string student_id;
  Decimal4 score;
  std::uint32_t rank = 0;
  bool operator==(const RanklistEntry&) const = default;
};

/// Scores non-increasing; competition ranking (1, 2, 2, 4).
struct Ranklist {
  RanklistKind kind = RanklistKind::kMentorRated;
  std::vector<RanklistEntry> entries;
};

Json to_json(const Ranklist& r);

/// (novelty + effort + relevance) / 3. Throws COMPONENT_OUT_OF_RANGE outside 0..10.
Decimal4 report_score(const Grade& grade);

/// Throws ALREADY_GRADED, NOT_PROJECT_FACULTY, COMPONENT_OUT_OF_RANGE.
BiweeklyReport grade_report(BiweeklyReport report, const Grade& grade, std::string feedback,
                            const ResearchProject& project, std::string_view grader_id);

/// Mean of this project's graded report scores. Throws NO_GRADED_REPORTS.
Decimal4 mentor_rating(const ResearchProject& project, std::span<const BiweeklyReport> reports);

/// impact_factor / n_authors. Throws ZERO_AUTHORS, UNVERIFIED_PUBLICATION.
Decimal4 research_rating(const Publication& pub);

/// Sum of research ratings; every publication must be verified.
Decimal4 student_impact_score(std::span<const Publication> pubs);

/// One student's inputs: a mentor rating per rated project and all of their publications.
struct StudentStanding {
  std::string student_id;
  std::vector<Decimal4> mentor_ratings;
  std::vector<Publication> publications;
};

/// Students with at least one verified publication go only to PUBLISHED
/// (by impact score); everyone else to MENTOR_RATED (by the mean of their
/// project mentor ratings, 0 when they have none). Ties order by student_id.
std::pair<Ranklist, Ranklist> build_ranklists(std::span<const StudentStanding> students);

/// Coins per rank; ranks without an explicit entry receive `otherwise`.
struct AwardSchedule {
  std::map<std::uint32_t, std::uint64_t> by_rank{{1, 100}, {2, 60}, {3, 30}};
  std::uint64_t otherwise = 10;

  std::uint64_t amount_for(std::uint32_t rank) const;

  /// {"1": 100, "2": 60, "3": 30, "else": 10}
  static AwardSchedule from_json(const Json& j);
  Json to_json() const;
};

/// "reward:research:<MENTOR_RATED|PUBLISHED>:<period>"
std::string award_memo(RanklistKind kind, std::string_view period);

/// Sum of coins the schedule pays for this ranklist.
std::uint64_t award_total(const Ranklist& ranklist, const AwardSchedule& schedule);

using WalletLookup = std::function<std::optional<Address>(const std::string& student_id)>;

/// One MINT per entry. Checks every wallet and the budget before issuing
/// anything. Throws MISSING_WALLET (details.student_id), BUDGET_EXCEEDED.
std::vector<ledger::Transaction> award_for_ranklist(const Ranklist& ranklist, const AwardSchedule& schedule,
                                                    const WalletLookup& wallets, std::uint64_t budget,
                                                    economy::MintIssuer& issuer, std::string_view period,
                                                    std::uint64_t timestamp);

}  // namespace campus::research
