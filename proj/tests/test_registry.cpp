#include <doctest.h>

#include <algorithm>
#include <set>
#include <thread>

#include "common/error.hpp"
#include "common/timeutil.hpp"
#include "registry/event_store.hpp"
#include "registry/registry.hpp"
#include "support.hpp"

using namespace lotwatch;
using namespace lotwatch::registry;

namespace {

PlateString P(const char* s) { return *PlateString::from_normalized(s); }
Timestamp T(const char* s) { return *parse_iso8601(s); }

PatrolEvent event(const char* plate, const char* place, Verdict v) {
  PatrolEvent ev;
  ev.plate = P(plate);
  ev.captured_at = T("2025-03-03T08:00:00Z");
  ev.place = place;
  ev.verdict = v;
  ev.backend = "dual/heuristic/baseline/binary_roi";
  return ev;
}

}  // namespace

TEST_SUITE("registry") {

TEST_CASE("timestamps") {
  CHECK(format_iso8601(T("2025-03-03T08:00:30Z")) == "2025-03-03T08:00:30Z");
  CHECK(format_iso8601(T("2025-03-03")) == "2025-03-03T00:00:00Z");
  CHECK(T("2025-03-03T08:00:30") == T("2025-03-03T08:00:30Z"));
  CHECK_FALSE(parse_iso8601("2025-13-01").has_value());
  CHECK_FALSE(parse_iso8601("2025-02-30").has_value());
  CHECK_FALSE(parse_iso8601("yesterday").has_value());
}

TEST_CASE("parse the fixture registry") {
  const auto reg = load_registry(testsupport::data_dir() / "registry.csv");
  CHECK(reg.size() == 9);
  REQUIRE(reg.find(P("HPJ149")) != nullptr);
  CHECK(reg.find(P("HPJ149"))->owner_label == "Lin Mei-hua");
  CHECK(reg.find(P("ABC1234")) != nullptr);
  CHECK(reg.find(P("ZZZ999")) == nullptr);
}

TEST_CASE("parse normalizes plates and tolerates short rows") {
  const auto reg = Registry::parse("hpj-149\nabc 1234,Someone\n\n# note\nKDR552,,2025-01-01,\n");
  CHECK(reg.size() == 3);
  CHECK(reg.find(P("ABC1234"))->owner_label == "Someone");
  CHECK(reg.find(P("KDR552"))->valid_from.has_value());
  CHECK_FALSE(reg.find(P("KDR552"))->valid_to.has_value());
}

TEST_CASE("parse errors name the line") {
  auto expect_error = [](const char* text, const char* needle) {
    try {
      (void)Registry::parse(text, "reg.csv");
      FAIL("expected a config error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::config);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_error("plate,owner\nHPJ149,a\nhpj149,b\n", "reg.csv:3");
  expect_error("HPJ149,a,2025-05-01,2025-01-01\n", "reg.csv:1");
  expect_error("HP,a\n", "invalid plate");
  expect_error("HPJ149,a,soon\n", "invalid timestamp");
  CHECK_THROWS_AS(load_registry("/nonexistent/registry.csv"), Error);
}

TEST_CASE("legality follows the validity window") {
  const auto reg = Registry::parse(
      "HPJ149,a\n"
      "ABC1234,b,2025-01-01,2025-06-30\n"
      "KDR552,c,,2024-12-31\n");
  CHECK(check_legality(reg, P("HPJ149"), T("2030-01-01")) == Verdict::legal);
  CHECK(check_legality(reg, P("ZZZ999"), T("2025-03-01")) == Verdict::illegal);
  CHECK(check_legality(reg, P("ABC1234"), T("2025-03-01")) == Verdict::legal);
  CHECK(check_legality(reg, P("ABC1234"), T("2024-12-31T23:59:59Z")) == Verdict::illegal);
  CHECK(check_legality(reg, P("ABC1234"), T("2025-06-30T18:00:00Z")) == Verdict::legal);
  CHECK(check_legality(reg, P("ABC1234"), T("2025-07-01T00:00:00Z")) == Verdict::illegal);
  CHECK(check_legality(reg, P("KDR552"), T("2025-03-01")) == Verdict::illegal);
}

TEST_CASE("registry handle swaps snapshots") {
  RegistryHandle h;
  CHECK_FALSE(h.loaded());
  CHECK(h.get() == nullptr);
  h.replace(Registry::parse("HPJ149\n"));
  const auto old = h.get();
  h.replace(Registry::parse("HPJ149\nABC1234\n"));
  CHECK(old->size() == 1);
  CHECK(h.get()->size() == 2);
}

TEST_CASE("verdict names") {
  CHECK(to_string(Verdict::illegal) == "illegal");
  CHECK(parse_verdict("unreadable") == Verdict::unreadable);
  CHECK_FALSE(parse_verdict("maybe").has_value());
}

TEST_CASE("event JSON round trip") {
  auto ev = event("HPJ149", "A3", Verdict::legal);
  ev.seq = 9;
  ev.notified = true;
  CHECK(event_from_json(to_json(ev)) == ev);
  PatrolEvent unreadable;
  unreadable.seq = 2;
  unreadable.failure_reason = "detect: no plate found";
  unreadable.place = "B2";
  unreadable.captured_at = T("2025-03-03T08:03:30Z");
  CHECK(event_from_json(to_json(unreadable)) == unreadable);
  CHECK_THROWS_AS(event_from_json(nlohmann::json{{"seq", 1}}), Error);
}

TEST_CASE("event store appends, reads and resumes numbering") {
  testsupport::TempDir dir;
  const auto path = dir / "events.jsonl";
  {
    EventStore store(path);
    CHECK(store.last_seq() == 0);
    CHECK(store.record_event(event("HPJ149", "A1", Verdict::legal)) == 1);
    CHECK(store.record_event(event("ZZZ999", "A2", Verdict::illegal)) == 2);
    CHECK(store.read_all().size() == 2);
    CHECK(store.read_since(1).size() == 1);
    CHECK(store.read_since(1).front().place == "A2");
  }
  EventStore again(path);
  CHECK(again.last_seq() == 2);
  CHECK(again.record_event(event("ABC1234", "A3", Verdict::legal)) == 3);
  CHECK(EventStore::read_log(path).size() == 3);
  CHECK(EventStore::read_log(dir / "absent.jsonl").empty());
}

TEST_CASE("torn tail is ignored and truncated") {
  testsupport::TempDir dir;
  const auto path = dir / "events.jsonl";
  {
    EventStore store(path);
    store.record_event(event("HPJ149", "A1", Verdict::legal));
  }
  {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    out << R"({"seq":2,"plate":"ABC12)";
  }
  CHECK(EventStore::read_log(path).size() == 1);
  EventStore store(path);
  CHECK(store.record_event(event("ABC1234", "A2", Verdict::legal)) == 2);
  const auto all = EventStore::read_log(path);
  REQUIRE(all.size() == 2);
  CHECK(all[1].plate->str() == "ABC1234");
  CHECK(testsupport::slurp(path).back() == '\n');
}

TEST_CASE("concurrent appends get unique, gap-free sequence numbers") {
  testsupport::TempDir dir;
  EventStore store(dir / "events.jsonl");
  constexpr int kThreads = 4, kEach = 50;
  std::vector<std::thread> threads;
  std::vector<std::vector<std::uint64_t>> got(kThreads);
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < kEach; ++i) got[t].push_back(store.record_event(event("HPJ149", "A1", Verdict::legal)));
    });
  }
  for (auto& th : threads) th.join();
  std::set<std::uint64_t> seqs;
  for (const auto& g : got) {
    CHECK(std::is_sorted(g.begin(), g.end()));
    seqs.insert(g.begin(), g.end());
  }
  CHECK(seqs.size() == kThreads * kEach);
  CHECK(*seqs.rbegin() == kThreads * kEach);
  const auto all = store.read_all();
  REQUIRE(all.size() == kThreads * kEach);
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i].seq == i + 1);
}

}
