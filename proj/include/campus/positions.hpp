#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "campus/decimal.hpp"
#include "campus/economy.hpp"

/// Temporary campus positions: postings, rating-weighted allocation with an
/// exploration floor, supervisor ratings and hourly wage payouts.
namespace campus::positions {

enum class PostingStatus { kOpen, kAssigned, kCompleted };
std::string_view to_string(PostingStatus s);
std::optional<PostingStatus> posting_status_from(std::string_view s);

/// Whole hours in quarter-hour units.
class Hours {
 public:
  static constexpr std::uint32_t kPerHour = 4;

  static constexpr Hours from_quarters(std::uint32_t q) { return Hours(q); }
  static constexpr Hours whole(std::uint32_t h) { return Hours(h * kPerHour); }
  /// Accepts "8", "7.5", "7.25", "7.75". Anything not on a quarter hour is nullopt.
  static std::optional<Hours> parse(std::string_view text);

  constexpr std::uint32_t quarters() const { return quarters_; }
  std::string to_string() const;
  constexpr auto operator<=>(const Hours&) const = default;

 private:
  constexpr explicit Hours(std::uint32_t q) : quarters_(q) {}
  std::uint32_t quarters_ = 0;
};

inline constexpr Hours kMaxWeeklyHours = Hours::whole(10);

struct PositionPosting {
  std::string position_id;
  std::string supervisor_id;
  std::string position_type;
  std::uint64_t hourly_rate = 0;
  Hours weekly_hour_cap = kMaxWeeklyHours;
  PostingStatus status = PostingStatus::kOpen;
  std::vector<std::string> applicant_ids;
  std::uint64_t created_at = 0;
};

struct RatingRecord {
  std::string student_id;
  std::string position_id;
  std::string position_type;
  int rating = 0;
  std::string rated_by;
  std::uint64_t rated_at = 0;
};

enum class AssignmentStatus { kActive, kCompleted };

/// The winning application once a posting has been allocated.
struct Assignment {
  std::string assignment_id;
  std::string position_id;
  std::string student_id;
  std::string supervisor_id;
  std::string position_type;
  AssignmentStatus status = AssignmentStatus::kActive;
  std::optional<int> rating;
};

struct Timesheet {
  std::string assignment_id;
  std::string week_start;  // YYYY-MM-DD
  Hours hours;
};

inline constexpr int kDefaultRating = 9;

/// Mean of the student's received ratings (half up, four places); exactly 9
/// when there are none. The default never enters a stored mean.
Decimal4 effective_rating(std::string_view student_id, std::span<const RatingRecord> history);

/// True while fewer than `threshold` distinct students hold a rating for this position type.
bool is_cold_start(std::string_view position_type, std::span<const RatingRecord> history, std::size_t threshold = 10);

struct AllocationPolicy {
  /// Exploration share in basis points; 2000 = 0.20.
  std::uint32_t epsilon_bp = 2000;
  std::size_t cold_start_threshold = 10;
};

/// Exact selection law: applicant i is chosen with probability numerators[i] / denominator.
struct SelectionLaw {
  std::vector<std::string> applicants;
  std::vector<std::uint64_t> numerators;
  std::uint64_t denominator = 1;
  bool cold_start = true;

  double probability(std::size_t i) const {
    return static_cast<double>(numerators[i]) / static_cast<double>(denominator);
  }
};

/// Cold start: uniform. Warm: p_i = (1 - eps) w_i / sum(w) + eps / n with w_i the
/// effective rating in the posting's position type. Ratings from other
/// position types are ignored.
SelectionLaw selection_law(const PositionPosting& posting, std::span<const RatingRecord> history,
                           const AllocationPolicy& policy = {});

struct Allocation {
  PositionPosting posting;  // status ASSIGNED
  std::string winner;
  std::uint64_t seed = 0;
  SelectionLaw law;

  /// {applicants, cold_start, denominator, numerators, position_id, probabilities, seed, winner}
  Json audit() const;
};

/// Inverse-CDF draw over the exact law using SplitMix64(seed).
/// Throws POSTING_NOT_OPEN, NO_APPLICANTS.
Allocation allocate(const PositionPosting& posting, std::span<const RatingRecord> history, std::uint64_t seed,
                    const AllocationPolicy& policy = {});

/// Throws NOT_SUPERVISOR, ALREADY_RATED, NOT_COMPLETED, OUT_OF_RANGE.
RatingRecord record_rating(const Assignment& assignment, int rating, std::string_view supervisor_id,
                           std::uint64_t rated_at);

/// floor(hours * rate).
std::uint64_t wage_amount(Hours hours, std::uint64_t hourly_rate);

/// "wage:<assignment_id>:<week_start>"
std::string wage_memo(std::string_view assignment_id, std::string_view week_start);

/// MINT of the week's wage to the student. Throws HOURS_EXCEED_CAP, INACTIVE_ASSIGNMENT.
ledger::Transaction compute_payout(const Timesheet& timesheet, const PositionPosting& posting,
                                   const Assignment& assignment, const Address& student_wallet,
                                   economy::MintIssuer& issuer, std::uint64_t timestamp);

}  // namespace campus::positions
