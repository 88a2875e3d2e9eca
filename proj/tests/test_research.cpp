#include <doctest.h>

#include <algorithm>
#include <random>

#include "campus/research.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace campus;

namespace {

research::ResearchProject project(std::string id, std::string faculty) {
  research::ResearchProject p;
  p.project_id = std::move(id);
  p.faculty_id = std::move(faculty);
  p.approved = true;
  return p;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::INTERNAL;
}

}  // namespace

TEST_SUITE("research") {
  TEST_CASE("report score") {
    CHECK(research::report_score({7, 8, 7}).to_string() == "7.3333");
    CHECK(research::report_score({10, 10, 10}).to_string() == "10.0000");
    CHECK(research::report_score({8, 9, 9}).to_string() == "8.6667");
    CHECK(code_of([] { research::report_score({11, 0, 0}); }) == Errc::COMPONENT_OUT_OF_RANGE);
    CHECK(code_of([] { research::report_score({0, -1, 0}); }) == Errc::COMPONENT_OUT_OF_RANGE);
  }

  TEST_CASE("grading rules") {
    const auto p = project("p1", "f1");
    research::BiweeklyReport r{"r1", "p1", "s1", 0, "ref", std::nullopt, std::nullopt, ""};
    CHECK(code_of([&] { research::grade_report(r, {5, 5, 5}, "", p, "f2"); }) == Errc::NOT_PROJECT_FACULTY);
    const auto graded = research::grade_report(r, {5, 6, 7}, "ok", p, "f1");
    CHECK(graded.score->to_string() == "6.0000");
    CHECK(code_of([&] { research::grade_report(graded, {5, 5, 5}, "", p, "f1"); }) == Errc::ALREADY_GRADED);
  }

  TEST_CASE("mentor rating") {
    const auto p = project("p1", "f1");
    std::vector<research::BiweeklyReport> reports(2);
    reports[0].project_id = reports[1].project_id = "p1";
    reports[0].score = Decimal4::parse("7.3333");
    reports[1].score = Decimal4::parse("8.6667");
    CHECK(research::mentor_rating(p, reports).to_string() == "8.0000");
    reports[1].score.reset();
    CHECK(research::mentor_rating(p, reports).to_string() == "7.3333");
    reports[0].score.reset();
    CHECK(code_of([&] { research::mentor_rating(p, reports); }) == Errc::NO_GRADED_REPORTS);
  }

  TEST_CASE("research rating and impact score") {
    research::Publication pub{"x", "s", "J", *Decimal4::parse("3.0"), 2, true};
    CHECK(research::research_rating(pub).to_string() == "1.5000");
    pub.impact_factor = *Decimal4::parse("2.467");
    pub.n_authors = 3;
    CHECK(research::research_rating(pub).to_string() == "0.8223");
    CHECK(research::student_impact_score({}).to_string() == "0.0000");
    pub.n_authors = 0;
    CHECK(code_of([&] { research::research_rating(pub); }) == Errc::ZERO_AUTHORS);
    pub.n_authors = 1;
    pub.verified = false;
    CHECK(code_of([&] { research::research_rating(pub); }) == Errc::UNVERIFIED_PUBLICATION);
  }

  TEST_CASE("ranklist examples") {
    std::vector<research::StudentStanding> s{
        {"a", {Decimal4::from_int(9)}, {}}, {"b", {Decimal4::from_int(7)}, {}}, {"c", {Decimal4::from_int(7)}, {}}};
    auto [mentor, published] = research::build_ranklists(s);
    REQUIRE(mentor.entries.size() == 3);
    CHECK(mentor.entries[0].rank == 1);
    CHECK(mentor.entries[1].rank == 2);
    CHECK(mentor.entries[2].rank == 2);
    CHECK(published.entries.empty());

    s[0].publications.push_back({"p", "a", "J", Decimal4::from_int(1), 1, true});
    std::tie(mentor, published) = research::build_ranklists(s);
    CHECK(published.entries.size() == 1);
    CHECK(mentor.entries.size() == 2);

    std::tie(mentor, published) = research::build_ranklists({});
    CHECK(mentor.entries.empty());
    CHECK(published.entries.empty());
  }

  TEST_CASE("oracle: 50 random students, scores and ranklists match exactly") {
    std::mt19937_64 rng(31);
    for (int round = 0; round < 20; ++round) {
      std::vector<research::StudentStanding> students;
      std::vector<std::pair<std::string, std::int64_t>> oracle_mentor, oracle_published;
      for (int i = 0; i < 50; ++i) {
        research::StudentStanding st;
        st.student_id = "s" + std::to_string(rng() % 1000) + "-" + std::to_string(i);

        // 0..3 projects, each with 0..4 graded reports. Small grade range forces ties.
        std::vector<std::int64_t> oracle_project_ratings;
        const int projects = static_cast<int>(rng() % 4);
        for (int p = 0; p < projects; ++p) {
          const auto proj = project("p" + std::to_string(p), "f");
          std::vector<research::BiweeklyReport> reports;
          std::vector<std::int64_t> oracle_scores;
          const int n_reports = static_cast<int>(rng() % 5);
          for (int r = 0; r < n_reports; ++r) {
            const int a = 6 + rng() % 5, b = 6 + rng() % 5, c = 6 + rng() % 5;
            research::BiweeklyReport rep;
            rep.report_id = "r";
            rep.project_id = proj.project_id;
            rep = research::grade_report(rep, {a, b, c}, "", proj, "f");
            REQUIRE(rep.score->units() == oracle::report(a, b, c));
            reports.push_back(rep);
            oracle_scores.push_back(oracle::report(a, b, c));
          }
          if (oracle_scores.empty()) continue;
          const auto rating = research::mentor_rating(proj, reports);
          REQUIRE(rating.units() == oracle::mean(oracle_scores));
          st.mentor_ratings.push_back(rating);
          oracle_project_ratings.push_back(oracle::mean(oracle_scores));
        }

        std::vector<research::Publication> verified;
        std::vector<std::int64_t> oracle_pubs;
        const int pubs = rng() % 3 == 0 ? static_cast<int>(1 + rng() % 3) : 0;
        for (int p = 0; p < pubs; ++p) {
          const std::int64_t if_units = static_cast<std::int64_t>(rng() % 100'000);
          const std::uint32_t authors = 1 + rng() % 7;
          research::Publication pub{"x", st.student_id, "J", Decimal4::from_units(if_units), authors, rng() % 4 != 0};
          st.publications.push_back(pub);
          if (pub.verified) {
            REQUIRE(research::research_rating(pub).units() == oracle::publication(if_units, authors));
            verified.push_back(pub);
            oracle_pubs.push_back(oracle::publication(if_units, authors));
          }
        }
        std::int64_t impact = 0;
        for (auto v : oracle_pubs) impact += v;
        REQUIRE(research::student_impact_score(verified).units() == impact);

        if (!oracle_pubs.empty())
          oracle_published.emplace_back(st.student_id, impact);
        else
          oracle_mentor.emplace_back(st.student_id,
                                     oracle_project_ratings.empty() ? 0 : oracle::mean(oracle_project_ratings));
        students.push_back(std::move(st));
      }

      const auto [mentor, published] = research::build_ranklists(students);
      for (const auto& [list, expected] : {std::pair{&mentor, oracle::rank(oracle_mentor)},
                                           std::pair{&published, oracle::rank(oracle_published)}}) {
        REQUIRE(list->entries.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
          CHECK(list->entries[i].student_id == expected[i].id);
          CHECK(list->entries[i].score.units() == expected[i].score);
          CHECK(list->entries[i].rank == expected[i].rank);
        }
      }
      CHECK(mentor.entries.size() + published.entries.size() == students.size());
    }
  }

  TEST_CASE("award schedule json") {
    const auto s = research::AwardSchedule::from_json(Json{{"1", 500}, {"else", 1}});
    CHECK(s.amount_for(1) == 500);
    CHECK(s.amount_for(2) == 1);
    CHECK(research::AwardSchedule::from_json(s.to_json()).to_json() == s.to_json());
    CHECK_THROWS_AS(research::AwardSchedule::from_json(Json{{"0", 5}}), Error);
    CHECK_THROWS_AS(research::AwardSchedule::from_json(Json{{"first", 5}}), Error);
  }

  TEST_CASE("awarding ties and budget") {
    const auto validator = wallet::keypair_from_seed(400);
    research::Ranklist list{research::RanklistKind::kMentorRated,
                            {{"a", Decimal4::from_int(9), 1}, {"b", Decimal4::from_int(7), 2},
                             {"c", Decimal4::from_int(7), 2}}};
    auto wallets = [](const std::string& id) -> std::optional<Address> {
      return wallet::address_of(wallet::keypair_from_seed(500 + id[0]));
    };
    economy::MintIssuer issuer(validator, 0);
    const auto mints = research::award_for_ranklist(list, {}, wallets, 1000, issuer, "2024-T1", 1);
    REQUIRE(mints.size() == 3);
    CHECK(mints[0].amount == 100);
    CHECK(mints[1].amount == 60);
    CHECK(mints[2].amount == 60);
    CHECK(mints[0].memo == "reward:research:MENTOR_RATED:2024-T1");
    CHECK(mints[2].nonce == 2);
    CHECK(research::award_total(list, {}) == 220);

    economy::MintIssuer fresh(validator, 0);
    CHECK(code_of([&] { research::award_for_ranklist(list, {}, wallets, 219, fresh, "p", 1); }) ==
          Errc::BUDGET_EXCEEDED);
    CHECK(fresh.next_nonce() == 0);
    auto missing = [](const std::string& id) -> std::optional<Address> {
      if (id == "c") return std::nullopt;
      return wallet::address_of(wallet::keypair_from_seed(1));
    };
    CHECK(code_of([&] { research::award_for_ranklist(list, {}, missing, 1000, fresh, "p", 1); }) ==
          Errc::MISSING_WALLET);
    CHECK(research::award_for_ranklist({}, {}, wallets, 0, fresh, "p", 1).empty());
  }
}
