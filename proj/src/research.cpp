#include "campus/research.hpp"

#include <algorithm>
#include <charconv>

namespace campus::research {

std::string_view to_string(RanklistKind kind) {
  return kind == RanklistKind::kPublished ? "PUBLISHED" : "MENTOR_RATED";
}

Json to_json(const Ranklist& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"rank", e.rank}, {"score", e.score.to_string()}, {"student_id", e.student_id}});
  return Json{{"entries", std::move(entries)}, {"kind", to_string(r.kind)}};
}

Decimal4 report_score(const Grade& g) {
  for (int c : {g.novelty, g.effort, g.relevance})
    if (c < 0 || c > 10)
      throw Error(Errc::COMPONENT_OUT_OF_RANGE, "grade components must be integers 0-10",
                  {{"novelty", g.novelty}, {"effort", g.effort}, {"relevance", g.relevance}});
  return Decimal4::ratio(g.novelty + g.effort + g.relevance, 3);
}

BiweeklyReport grade_report(BiweeklyReport report, const Grade& grade, std::string feedback,
                            const ResearchProject& project, std::string_view grader_id) {
  if (report.grade) throw Error(Errc::ALREADY_GRADED, "report already graded", {{"report_id", report.report_id}});
  if (project.project_id != report.project_id || project.faculty_id != grader_id)
    throw Error(Errc::NOT_PROJECT_FACULTY, "only the project's faculty may grade its reports");
  report.score = report_score(grade);
  report.grade = grade;
  report.feedback = std::move(feedback);
  return report;
}

Decimal4 mentor_rating(const ResearchProject& project, std::span<const BiweeklyReport> reports) {
  std::vector<Decimal4> scores;
  for (const auto& r : reports)
    if (r.project_id == project.project_id && r.score) scores.push_back(*r.score);
  auto m = mean(scores);
  if (!m) throw Error(Errc::NO_GRADED_REPORTS, "project has no graded reports", {{"project_id", project.project_id}});
  return *m;
}

Decimal4 research_rating(const Publication& pub) {
  if (pub.n_authors == 0) throw Error(Errc::ZERO_AUTHORS, "publication must have at least one author");
  if (!pub.verified)
    throw Error(Errc::UNVERIFIED_PUBLICATION, "publication not verified by faculty",
                {{"publication_id", pub.publication_id}});
  return pub.impact_factor.divided_by(pub.n_authors);
}

Decimal4 student_impact_score(std::span<const Publication> pubs) {
  Decimal4 total;
  for (const auto& p : pubs) total += research_rating(p);
  return total;
}

namespace {

Ranklist rank(RanklistKind kind, std::vector<RanklistEntry> entries) {
  std::sort(entries.begin(), entries.end(), [](const RanklistEntry& a, const RanklistEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.student_id < b.student_id;
  });
  for (std::size_t i = 0; i < entries.size(); ++i)
    entries[i].rank = (i > 0 && entries[i].score == entries[i - 1].score) ? entries[i - 1].rank
                                                                          : static_cast<std::uint32_t>(i + 1);
  return Ranklist{kind, std::move(entries)};
}

}  // namespace

std::pair<Ranklist, Ranklist> build_ranklists(std::span<const StudentStanding> students) {
  std::vector<RanklistEntry> mentor, published;
  for (const auto& s : students) {
    std::vector<Publication> verified;
    std::copy_if(s.publications.begin(), s.publications.end(), std::back_inserter(verified),
                 [](const Publication& p) { return p.verified; });
    if (!verified.empty()) {
      published.push_back({s.student_id, student_impact_score(verified), 0});
    } else {
      mentor.push_back({s.student_id, mean(s.mentor_ratings).value_or(Decimal4{}), 0});
    }
  }
  return {rank(RanklistKind::kMentorRated, std::move(mentor)), rank(RanklistKind::kPublished, std::move(published))};
}

std::uint64_t AwardSchedule::amount_for(std::uint32_t r) const {
  auto it = by_rank.find(r);
  return it == by_rank.end() ? otherwise : it->second;
}

AwardSchedule AwardSchedule::from_json(const Json& j) {
  if (!j.is_object()) throw Error(Errc::MALFORMED, "award schedule must be an object");
  AwardSchedule s;
  s.by_rank.clear();
  s.otherwise = 0;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number_integer() || value.get<std::int64_t>() < 0) throw Error(Errc::MALFORMED, "award amounts must be unsigned integers");
    if (key == "else") {
      s.otherwise = value.get<std::uint64_t>();
      continue;
    }
    std::uint32_t r = 0;
    auto [p, ec] = std::from_chars(key.data(), key.data() + key.size(), r);
    if (ec != std::errc{} || p != key.data() + key.size() || r == 0)
      throw Error(Errc::MALFORMED, "award schedule keys are ranks >= 1 or \"else\"");
    s.by_rank[r] = value.get<std::uint64_t>();
  }
  return s;
}

Json AwardSchedule::to_json() const {
  Json j = Json::object();
  for (const auto& [r, amount] : by_rank) j[std::to_string(r)] = amount;
  j["else"] = otherwise;
  return j;
}

std::string award_memo(RanklistKind kind, std::string_view period) {
  return "reward:research:" + std::string(to_string(kind)) + ":" + std::string(period);
}

std::uint64_t award_total(const Ranklist& ranklist, const AwardSchedule& schedule) {
  std::uint64_t total = 0;
  for (const auto& e : ranklist.entries) total += schedule.amount_for(e.rank);
  return total;
}

std::vector<ledger::Transaction> award_for_ranklist(const Ranklist& ranklist, const AwardSchedule& schedule,
                                                    const WalletLookup& wallets, std::uint64_t budget,
                                                    economy::MintIssuer& issuer, std::string_view period,
                                                    std::uint64_t timestamp) {
  std::vector<Address> recipients;
  recipients.reserve(ranklist.entries.size());
  for (const auto& e : ranklist.entries) {
    auto w = wallets(e.student_id);
    if (!w) throw Error(Errc::MISSING_WALLET, "student has no wallet address", {{"student_id", e.student_id}});
    recipients.push_back(*w);
  }
  const std::uint64_t total = award_total(ranklist, schedule);
  if (total > budget) throw Error(Errc::BUDGET_EXCEEDED, "awards exceed budget", {{"total", total}, {"budget", budget}});

  std::vector<ledger::Transaction> mints;
  const std::string memo = award_memo(ranklist.kind, period);
  for (std::size_t i = 0; i < ranklist.entries.size(); ++i) {
    const std::uint64_t amount = schedule.amount_for(ranklist.entries[i].rank);
    if (amount == 0) continue;
    mints.push_back(issuer.mint(recipients[i], amount, memo, timestamp));
  }
  return mints;
}

}  // namespace campus::research
