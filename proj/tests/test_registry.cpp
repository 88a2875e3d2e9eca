#include <doctest.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include <sys/wait.h>
#include <unistd.h>

#include "campus/registry.hpp"
#include "campus/wallet.hpp"

using namespace campus;
using registry::Registry;
namespace fs = std::filesystem;

namespace {

std::string wallet_for(std::uint64_t i) { return wallet::address_of(wallet::keypair_from_seed(700 + i)).str(); }

Json student(const std::string& id, std::uint64_t wallet_seed, const std::string& email = "s@campus.edu") {
  return Json{{"student_id", id}, {"name", "Student " + id}, {"email", email},
              {"wallet_address", wallet_for(wallet_seed)}, {"enrolled", true}};
}

Json faculty(const std::string& id) {
  return Json{{"faculty_id", id}, {"name", "Prof"}, {"email", id + "@campus.edu"}, {"role", "FACULTY"}};
}

Json project(const std::string& id, const std::string& faculty_id, std::vector<std::string> students) {
  return Json{{"project_id", id},  {"topic", "t"},           {"faculty_id", faculty_id}, {"student_ids", students},
              {"approved", false}, {"publications", Json::array()}, {"created_at", 1}};
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

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / (name + "-" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Registry memory_registry() { return Registry(std::make_unique<registry::MemoryStore>()); }

}  // namespace

TEST_SUITE("registry") {
  TEST_CASE("put and get round trip with versions") {
    auto reg = memory_registry();
    CHECK(reg.put("Student", student("s1", 1)) == "s1");
    CHECK(*reg.get("Student", "s1") == student("s1", 1));
    CHECK(reg.version("Student", "s1") == 1);
    reg.put("Student", student("s1", 1, "new@campus.edu"));
    CHECK(reg.version("Student", "s1") == 2);
    CHECK((*reg.get("Student", "s1"))["email"] == "new@campus.edu");
    CHECK_FALSE(reg.get("Student", "nope").has_value());
    CHECK(code_of([&] { reg.get("Nope", "x"); }) == Errc::UNKNOWN_COLLECTION);
  }

  TEST_CASE("schema violations") {
    auto reg = memory_registry();
    auto doc = student("s1", 1);
    SUBCASE("missing field") { doc.erase("name"); }
    SUBCASE("extra field") { doc["gpa"] = "4.0"; }
    SUBCASE("wrong type") { doc["enrolled"] = "yes"; }
    SUBCASE("bad address") { doc["wallet_address"] = "vj1xyz"; }
    SUBCASE("authority address") { doc["wallet_address"] = "AUTHORITY"; }
    SUBCASE("null in non-nullable") { doc["name"] = nullptr; }
    SUBCASE("empty key") { doc["student_id"] = ""; }
    SUBCASE("not an object") { doc = Json::array(); }
    CHECK(code_of([&] { reg.put("Student", doc); }) == Errc::SCHEMA_VIOLATION);
  }

  TEST_CASE("unsigned fields accept non-negative integers only") {
    auto reg = memory_registry();
    reg.put("Faculty", faculty("f1"));
    auto p = project("p1", "f1", {});
    p["created_at"] = -1;
    CHECK(code_of([&] { reg.put("ResearchProject", p); }) == Errc::SCHEMA_VIOLATION);
    p["created_at"] = 1.5;
    CHECK(code_of([&] { reg.put("ResearchProject", p); }) == Errc::SCHEMA_VIOLATION);
    p["created_at"] = 7;
    reg.put("ResearchProject", p);
    CHECK((*reg.get("ResearchProject", "p1"))["created_at"].is_number_unsigned());
  }

  TEST_CASE("references") {
    auto reg = memory_registry();
    reg.put("Faculty", faculty("f1"));
    reg.put("Student", student("s1", 1));
    try {
      reg.put("ResearchProject", project("p1", "f1", {"s1", "s2"}));
      FAIL("expected BROKEN_REFERENCE");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::BROKEN_REFERENCE);
      CHECK(e.details()["field"] == "student_ids");
    }
    CHECK(code_of([&] { reg.put("ResearchProject", project("p1", "f9", {})); }) == Errc::BROKEN_REFERENCE);
    reg.put("ResearchProject", project("p1", "f1", {"s1"}));

    CHECK(code_of([&] { reg.remove("Student", "s1"); }) == Errc::REFERENCED);
    CHECK(code_of([&] { reg.remove("Faculty", "f1"); }) == Errc::REFERENCED);
    reg.remove("ResearchProject", "p1");
    reg.remove("Student", "s1");
    CHECK_FALSE(reg.get("Student", "s1").has_value());
    CHECK(reg.version("Student", "s1") == 2);
    // Tombstoned targets break references again.
    CHECK(code_of([&] { reg.put("ResearchProject", project("p2", "f1", {"s1"})); }) == Errc::BROKEN_REFERENCE);
  }

  TEST_CASE("unique keys") {
    auto reg = memory_registry();
    reg.put("Student", student("s1", 1));
    try {
      reg.put("Student", student("s2", 1));
      FAIL("expected DUPLICATE_UNIQUE_KEY");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::DUPLICATE_UNIQUE_KEY);
      CHECK(e.details()["existing_id"] == "s1");
    }
    reg.put("Student", student("s1", 1, "other@campus.edu"));  // same document keeps its own key
    reg.put("Student", student("s1", 3));
    reg.put("Student", student("s2", 1));  // released by the update
    reg.remove("Student", "s2");
    reg.put("Student", student("s3", 1));  // released by the removal
    // Nullable unique fields may repeat as null.
    auto f1 = faculty("f1"), f2 = faculty("f2");
    f1["wallet_address"] = nullptr;
    f2["wallet_address"] = nullptr;
    reg.put("Faculty", f1);
    reg.put("Faculty", f2);
  }

  TEST_CASE("query filters and unknown fields") {
    auto reg = memory_registry();
    reg.put("Student", student("s1", 1, "a@x"));
    reg.put("Student", student("s2", 2, "b@x"));
    reg.put("Student", student("s3", 3, "a@x"));
    auto hits = reg.query("Student", {{"email", "a@x"}});
    REQUIRE(hits.size() == 2);
    CHECK(hits[0]["student_id"] == "s1");
    CHECK(hits[1]["student_id"] == "s3");
    CHECK(reg.query("Student", {{"email", "a@x"}, {"name", "Student s3"}}).size() == 1);
    CHECK(reg.query("Student").size() == 3);
    CHECK(reg.query("Student", {{"email", "zzz"}}).empty());
    CHECK(code_of([&] { reg.query("Student", {{"gpa", "4"}}); }) == Errc::UNKNOWN_FIELD);
  }

  TEST_CASE("next_id skips taken ids") {
    auto reg = memory_registry();
    CHECK(reg.next_id("Student", "s") == "s-1");
    reg.put("Student", student("s-1", 1));
    reg.put("Student", student("s-2", 2));
    CHECK(reg.next_id("Student", "s") == "s-3");
    reg.remove("Student", "s-2");
    CHECK(reg.next_id("Student", "s") == "s-3");
  }

  TEST_CASE("indexed query equals a linear scan over 10000 documents") {
    auto reg = memory_registry();
    reg.put("Supervisors", Json{{"supervisor_id", "sup"}, {"name", "n"}, {"email", "e"}, {"role", "SUPERVISOR"}});
    std::mt19937_64 rng(41);
    const std::vector<std::string> types{"TA", "LIB", "LAB", "DESK"};
    const std::vector<std::string> statuses{"OPEN", "ASSIGNED", "COMPLETED"};
    std::vector<Json> all;
    for (int i = 0; i < 10'000; ++i) {
      Json doc{{"position_id", "pos-" + std::to_string(i)},
               {"supervisor_id", "sup"},
               {"position_type", types[rng() % types.size()]},
               {"hourly_rate", rng() % 30},
               {"weekly_hour_cap", "10"},
               {"status", statuses[rng() % statuses.size()]},
               {"applicant_ids", Json::array()},
               {"created_at", i}};
      reg.put("PositionOfResponsibility", doc);
      all.push_back(*reg.get("PositionOfResponsibility", doc["position_id"].get<std::string>()));
    }
    std::sort(all.begin(), all.end(),
              [](const Json& a, const Json& b) { return a["position_id"] < b["position_id"]; });
    for (int q = 0; q < 30; ++q) {
      registry::Filter f;
      if (q % 3 != 2) f.emplace_back("position_type", types[rng() % types.size()]);
      if (q % 3 != 0) f.emplace_back("status", statuses[rng() % statuses.size()]);
      if (q % 5 == 0) f.emplace_back("hourly_rate", rng() % 30);
      std::vector<Json> expected;
      for (const auto& d : all) {
        bool ok = true;
        for (const auto& [k, v] : f) ok = ok && d[k] == v;
        if (ok) expected.push_back(d);
      }
      CHECK(reg.query("PositionOfResponsibility", f) == expected);
    }
  }

  TEST_CASE("file store survives reopen and compaction") {
    TempDir dir("campus-reg-reopen");
    {
      Registry reg(std::make_unique<registry::FileStore>(dir.path));
      reg.put("Student", student("s1", 1));
      reg.put("Student", student("s2", 2));
      reg.put("Student", student("s2", 2, "x@y"));
      reg.remove("Student", "s1");
      reg.flush();
    }
    {
      Registry reg(std::make_unique<registry::FileStore>(dir.path));
      CHECK_FALSE(reg.get("Student", "s1").has_value());
      CHECK(reg.version("Student", "s1") == 2);
      CHECK((*reg.get("Student", "s2"))["email"] == "x@y");
      CHECK(reg.query("Student", {{"email", "x@y"}}).size() == 1);
      // wallet 1 was released by the tombstone.
      reg.put("Student", student("s3", 1));
    }
    {
      auto store = std::make_unique<registry::FileStore>(dir.path);
      store->compact();
      CHECK(fs::file_size(dir.path / "registry.log") == 0);
      Registry reg(std::move(store));
      CHECK(reg.get("Student", "s3").has_value());
      CHECK(reg.version("Student", "s2") == 2);
    }
  }

  TEST_CASE("torn final line is discarded on open") {
    TempDir dir("campus-reg-torn");
    {
      Registry reg(std::make_unique<registry::FileStore>(dir.path));
      reg.put("Student", student("s1", 1));
      reg.flush();
    }
    {
      std::ofstream out(dir.path / "registry.log", std::ios::app);
      out << R"({"body":{"student_id":"s2")";
    }
    Registry reg(std::make_unique<registry::FileStore>(dir.path));
    CHECK(reg.get("Student", "s1").has_value());
    CHECK_FALSE(reg.get("Student", "s2").has_value());
    reg.put("Student", student("s2", 2));
    reg.flush();
    Registry again(std::make_unique<registry::FileStore>(dir.path));
    CHECK(again.get("Student", "s2").has_value());
  }

  TEST_CASE("killed writer loses nothing it acknowledged") {
    TempDir dir("campus-reg-kill");
    int pipefd[2];
    REQUIRE(::pipe(pipefd) == 0);
    const pid_t child = ::fork();
    REQUIRE(child >= 0);
    if (child == 0) {
      ::close(pipefd[0]);
      Registry reg(std::make_unique<registry::FileStore>(dir.path));
      for (int i = 0;; ++i) {
        reg.put("Student", student("k" + std::to_string(i), static_cast<std::uint64_t>(i)));
        reg.flush();
        const char ack = 'a';
        if (::write(pipefd[1], &ack, 1) != 1) ::_exit(1);
      }
    }
    ::close(pipefd[1]);
    int acked = 0;
    char c;
    while (acked < 40 && ::read(pipefd[0], &c, 1) == 1) ++acked;
    ::kill(child, SIGKILL);
    int status = 0;
    ::waitpid(child, &status, 0);
    ::close(pipefd[0]);
    REQUIRE(acked == 40);

    Registry reg(std::make_unique<registry::FileStore>(dir.path));
    const auto rows = reg.query("Student");
    CHECK(rows.size() >= 40);
    for (int i = 0; i < 40; ++i) CHECK(reg.get("Student", "k" + std::to_string(i)).has_value());
  }

  TEST_CASE("CRUD fuzz against a model, memory and file stores agree") {
    TempDir dir("campus-reg-fuzz");
    std::mt19937_64 rng(43);
    std::map<std::string, Json> model;
    {
      Registry mem = memory_registry();
      Registry file(std::make_unique<registry::FileStore>(dir.path));
      for (int step = 0; step < 2000; ++step) {
        const std::string id = "s" + std::to_string(rng() % 60);
        const auto op = rng() % 3;
        if (op < 2) {
          const auto doc = student(id, rng() % 80, "e" + std::to_string(rng() % 5));
          bool clash = false;
          for (const auto& [other, d] : model)
            if (other != id && d["wallet_address"] == doc["wallet_address"]) clash = true;
          Errc expect{};
          bool mem_ok = true, file_ok = true;
          try {
            mem.put("Student", doc);
          } catch (const Error& e) {
            mem_ok = false;
            expect = e.code();
          }
          try {
            file.put("Student", doc);
          } catch (const Error& e) {
            file_ok = false;
            CHECK(e.code() == expect);
          }
          REQUIRE(mem_ok == file_ok);
          REQUIRE(mem_ok == !clash);
          if (mem_ok) model[id] = doc;
        } else {
          mem.remove("Student", id);
          file.remove("Student", id);
          model.erase(id);
        }
      }
      std::vector<Json> expected;
      for (const auto& [id, d] : model) expected.push_back(d);
      CHECK(mem.query("Student") == expected);
      CHECK(file.query("Student") == expected);
      file.flush();
    }
    Registry reopened(std::make_unique<registry::FileStore>(dir.path));
    std::vector<Json> expected;
    for (const auto& [id, d] : model) expected.push_back(d);
    CHECK(reopened.query("Student") == expected);
    for (int e = 0; e < 5; ++e) {
      std::vector<Json> hits;
      for (const auto& d : expected)
        if (d["email"] == "e" + std::to_string(e)) hits.push_back(d);
      CHECK(reopened.query("Student", {{"email", "e" + std::to_string(e)}}) == hits);
    }
  }
}
