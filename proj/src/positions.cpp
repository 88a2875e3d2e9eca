#include "campus/positions.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "campus/prng.hpp"

namespace campus::positions {

std::string_view to_string(PostingStatus s) {
  switch (s) {
    case PostingStatus::kOpen:
      return "OPEN";
    case PostingStatus::kAssigned:
      return "ASSIGNED";
    case PostingStatus::kCompleted:
      return "COMPLETED";
  }
  return "OPEN";
}

std::optional<PostingStatus> posting_status_from(std::string_view s) {
  if (s == "OPEN") return PostingStatus::kOpen;
  if (s == "ASSIGNED") return PostingStatus::kAssigned;
  if (s == "COMPLETED") return PostingStatus::kCompleted;
  return std::nullopt;
}

std::optional<Hours> Hours::parse(std::string_view text) {
  auto d = Decimal4::parse(text);
  if (!d || d->units() % 2500 != 0) return std::nullopt;
  const std::int64_t q = d->units() / 2500;
  if (q > 4 * 24 * 7) return std::nullopt;
  return Hours(static_cast<std::uint32_t>(q));
}

std::string Hours::to_string() const {
  std::string s = std::to_string(quarters_ / kPerHour);
  switch (quarters_ % kPerHour) {
    case 1:
      return s + ".25";
    case 2:
      return s + ".5";
    case 3:
      return s + ".75";
  }
  return s;
}

Decimal4 effective_rating(std::string_view student_id, std::span<const RatingRecord> history) {
  std::int64_t sum = 0, count = 0;
  for (const auto& r : history)
    if (r.student_id == student_id) {
      sum += r.rating;
      ++count;
    }
  if (count == 0) return Decimal4::from_int(kDefaultRating);
  return Decimal4::ratio(sum, count);
}

bool is_cold_start(std::string_view position_type, std::span<const RatingRecord> history, std::size_t threshold) {
  std::set<std::string_view> rated;
  for (const auto& r : history)
    if (r.position_type == position_type) rated.insert(r.student_id);
  return rated.size() < threshold;
}

SelectionLaw selection_law(const PositionPosting& posting, std::span<const RatingRecord> history,
                           const AllocationPolicy& policy) {
  if (policy.epsilon_bp > 10'000) throw Error(Errc::MALFORMED, "epsilon must be within [0, 1]");
  SelectionLaw law;
  law.applicants = posting.applicant_ids;
  const std::uint64_t n = law.applicants.size();
  if (n == 0) throw Error(Errc::NO_APPLICANTS, "posting has no applicants", {{"position_id", posting.position_id}});
  if (std::set<std::string>(law.applicants.begin(), law.applicants.end()).size() != n)
    throw Error(Errc::MALFORMED, "duplicate applicant");

  std::vector<RatingRecord> same_type;
  std::copy_if(history.begin(), history.end(), std::back_inserter(same_type),
               [&](const RatingRecord& r) { return r.position_type == posting.position_type; });

  law.cold_start = is_cold_start(posting.position_type, same_type, policy.cold_start_threshold);
  if (law.cold_start) {
    law.numerators.assign(n, 1);
    law.denominator = n;
    return law;
  }

  // p_i = ((S - e) n w_i + e W) / (S n W) with S = 10000 and e in basis points.
  constexpr unsigned __int128 kS = 10'000;
  std::vector<std::uint64_t> weights;
  unsigned __int128 total = 0;
  for (const auto& id : law.applicants) {
    weights.push_back(static_cast<std::uint64_t>(effective_rating(id, same_type).units()));
    total += weights.back();
  }
  const unsigned __int128 e = policy.epsilon_bp;
  std::vector<unsigned __int128> num;
  for (auto w : weights) num.push_back((kS - e) * n * w + e * total);
  unsigned __int128 den = kS * n * total;

  auto gcd128 = [](unsigned __int128 a, unsigned __int128 b) {
    while (b != 0) {
      auto t = a % b;
      a = b;
      b = t;
    }
    return a;
  };
  unsigned __int128 g = den;
  for (auto v : num) g = gcd128(g, v);
  den /= g;
  if (den > (static_cast<unsigned __int128>(1) << 62)) throw Error(Errc::MALFORMED, "too many applicants to weight exactly");
  law.denominator = static_cast<std::uint64_t>(den);
  for (auto v : num) law.numerators.push_back(static_cast<std::uint64_t>(v / g));
  return law;
}

Json Allocation::audit() const {
  Json probabilities = Json::array();
  for (std::size_t i = 0; i < law.numerators.size(); ++i)
    probabilities.push_back(Decimal4::ratio(static_cast<std::int64_t>(law.numerators[i]),
                                            static_cast<std::int64_t>(law.denominator))
                                .to_string());
  return Json{{"applicants", law.applicants}, {"cold_start", law.cold_start},
              {"denominator", law.denominator}, {"numerators", law.numerators},
              {"position_id", posting.position_id}, {"probabilities", std::move(probabilities)},
              {"seed", seed}, {"winner", winner}};
}

Allocation allocate(const PositionPosting& posting, std::span<const RatingRecord> history, std::uint64_t seed,
                    const AllocationPolicy& policy) {
  if (posting.status != PostingStatus::kOpen)
    throw Error(Errc::POSTING_NOT_OPEN, "posting is not open", {{"position_id", posting.position_id}});
  Allocation out{posting, {}, seed, selection_law(posting, history, policy)};

  SplitMix64 rng(seed);
  const std::uint64_t draw = rng.below(out.law.denominator);
  std::uint64_t cumulative = 0;
  for (std::size_t i = 0; i < out.law.numerators.size(); ++i) {
    cumulative += out.law.numerators[i];
    if (draw < cumulative) {
      out.winner = out.law.applicants[i];
      break;
    }
  }
  out.posting.status = PostingStatus::kAssigned;
  return out;
}

RatingRecord record_rating(const Assignment& assignment, int rating, std::string_view supervisor_id,
                           std::uint64_t rated_at) {
  if (assignment.supervisor_id != supervisor_id)
    throw Error(Errc::NOT_SUPERVISOR, "only the posting's supervisor may rate", {{"assignment_id", assignment.assignment_id}});
  if (assignment.rating) throw Error(Errc::ALREADY_RATED, "assignment already rated", {{"assignment_id", assignment.assignment_id}});
  if (assignment.status != AssignmentStatus::kCompleted)
    throw Error(Errc::NOT_COMPLETED, "assignment must be completed before rating");
  if (rating < 1 || rating > 10) throw Error(Errc::OUT_OF_RANGE, "rating must be an integer 1-10", {{"rating", rating}});
  return RatingRecord{assignment.student_id, assignment.position_id, assignment.position_type,
                      rating, std::string(supervisor_id), rated_at};
}

std::uint64_t wage_amount(Hours hours, std::uint64_t hourly_rate) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(hours.quarters()) * hourly_rate / Hours::kPerHour);
}

std::string wage_memo(std::string_view assignment_id, std::string_view week_start) {
  return "wage:" + std::string(assignment_id) + ":" + std::string(week_start);
}

ledger::Transaction compute_payout(const Timesheet& timesheet, const PositionPosting& posting,
                                   const Assignment& assignment, const Address& student_wallet,
                                   economy::MintIssuer& issuer, std::uint64_t timestamp) {
  if (assignment.status != AssignmentStatus::kActive || assignment.assignment_id != timesheet.assignment_id ||
      assignment.position_id != posting.position_id)
    throw Error(Errc::INACTIVE_ASSIGNMENT, "assignment is not active for this timesheet",
                {{"assignment_id", timesheet.assignment_id}});
  if (timesheet.hours > posting.weekly_hour_cap)
    throw Error(Errc::HOURS_EXCEED_CAP, "hours exceed the weekly cap",
                {{"hours", timesheet.hours.to_string()}, {"cap", posting.weekly_hour_cap.to_string()}});
  const std::uint64_t amount = wage_amount(timesheet.hours, posting.hourly_rate);
  if (amount == 0) throw Error(Errc::MALFORMED, "timesheet earns no coins");
  return issuer.mint(student_wallet, amount, wage_memo(timesheet.assignment_id, timesheet.week_start), timestamp);
}

}  // namespace campus::positions
