#include <doctest.h>

#include <set>

#include "common/error.hpp"
#include "patrol/patrol.hpp"
#include "patrol/scenario.hpp"
#include "registry/event_store.hpp"
#include "stub_recognizer.hpp"
#include "support.hpp"

using namespace lotwatch;
using namespace lotwatch::patrol;

namespace {

registry::Registry fixture_registry() { return registry::load_registry(testsupport::data_dir() / "registry.csv"); }

std::unique_ptr<Recognizer> baseline() {
  return make_recognizer(PipelineConfig::dual(detection::DetectorKind::heuristic, ocr::OcrKind::baseline,
                                              RoiVariant::binary),
                         {});
}

Scenario seed42(const testsupport::TempDir& dir) {
  auto doc = nlohmann::json::parse(testsupport::slurp(testsupport::data_dir() / "scenario_seed42.json"));
  doc["registry"] = (testsupport::data_dir() / "registry.csv").string();
  doc["event_log"] = (dir / "events.jsonl").string();
  return parse_scenario(doc, testsupport::data_dir());
}

}  // namespace

TEST_SUITE("patrol") {

TEST_CASE("generated lots honour the requested counts") {
  const auto reg = fixture_registry();
  const Lot lot = generate_lot(12, 10, reg, 3, 42);
  REQUIRE(lot.slots.size() == 12);
  CHECK(lot.slots[0].id == "A1");
  CHECK(lot.slots[5].id == "A6");
  CHECK(lot.slots[6].id == "B1");
  CHECK(lot.occupied() == 10);
  int illegal = 0;
  std::set<std::string> plates;
  for (const auto& s : lot.slots) {
    if (!s.occupant) continue;
    plates.insert(s.occupant->str());
    if (reg.find(*s.occupant) == nullptr) ++illegal;
  }
  CHECK(illegal == 3);
  CHECK(plates.size() == 10);

  const Lot again = generate_lot(12, 10, reg, 3, 42);
  for (std::size_t i = 0; i < lot.slots.size(); ++i) CHECK(lot.slots[i].occupant == again.slots[i].occupant);
  const Lot other = generate_lot(12, 10, reg, 3, 43);
  bool differs = false;
  for (std::size_t i = 0; i < lot.slots.size(); ++i) differs |= lot.slots[i].occupant != other.slots[i].occupant;
  CHECK(differs);
}

TEST_CASE("lot count validation") {
  const auto reg = fixture_registry();
  CHECK_THROWS_AS(generate_lot(5, 6, reg, 0, 1), Error);
  CHECK_THROWS_AS(generate_lot(12, 3, reg, 4, 1), Error);
  CHECK_THROWS_AS(generate_lot(30, 20, reg, 0, 1), Error);  // registry too small
  CHECK_NOTHROW(generate_lot(0, 0, reg, 0, 1));
}

TEST_CASE("captures are deterministic per slot and angle") {
  const auto reg = fixture_registry();
  const Lot lot = generate_lot(12, 10, reg, 3, 42);
  std::string occupied, empty;
  for (const auto& s : lot.slots) (s.occupant ? occupied : empty) = s.id;
  const Timestamp t{};
  CHECK(capture(lot, occupied, 0.0, t).image == capture(lot, occupied, 0.0, t).image);
  CHECK_FALSE(capture(lot, occupied, 10.0, t).image == capture(lot, occupied, 0.0, t).image);
  try {
    (void)capture(lot, empty, 0.0, t);
    FAIL("expected not_found");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_found);
    CHECK(std::string(e.what()) == "no vehicle");
  }
  CHECK_THROWS_AS(capture(lot, "Z9", 0.0, t), Error);

  const auto spec = capture_degrade(lot, *lot.find(occupied), -10.0, {});
  CHECK(spec.rotation_deg == doctest::Approx(-1.0));
  CHECK(spec.noise_sigma == 3.0);
}

TEST_CASE("sweep plan validation") {
  const auto reg = fixture_registry();
  const Lot lot = generate_lot(12, 10, reg, 3, 42);
  CHECK_NOTHROW(SweepPlan::covering(lot, {0.0}).validate(lot));
  CHECK_THROWS_AS(SweepPlan::covering(lot, {}).validate(lot), Error);
  SweepPlan partial{{"A1"}, {0.0}};
  CHECK_THROWS_AS(partial.validate(lot), Error);
}

TEST_CASE("patrol over the seed-42 lot with the baseline reader") {
  testsupport::TempDir dir;
  const auto reg = fixture_registry();
  const Lot lot = generate_lot(12, 10, reg, 3, 42);
  const auto rec = baseline();
  notify::RecordingNotifier notifier;
  registry::EventStore store(dir / "events.jsonl");
  PatrolOptions opts;
  opts.start = *parse_iso8601("2025-03-03T08:00:00Z");
  const auto report = run_patrol(lot, SweepPlan::covering(lot, {0.0, -10.0, 10.0}), *rec, reg, notifier, store, opts);
  CHECK(report.legal == 7);
  CHECK(report.illegal == 3);
  CHECK(report.unreadable == 0);
  CHECK(report.empty == 2);
  CHECK(report.errors.empty());
  CHECK(report.events.size() == 10);
  CHECK(notifier.sent().size() == 10);
  int warnings = 0;
  for (const auto& n : notifier.sent()) warnings += n.severity == notify::Severity::warning ? 1 : 0;
  CHECK(warnings == 3);
  CHECK(store.read_all() == report.events);

  // Simulated time advances per waypoint, empty slots included.
  for (const auto& ev : report.events) {
    const auto idx = std::distance(lot.slots.begin(),
                                   std::find_if(lot.slots.begin(), lot.slots.end(), [&](auto& s) { return s.id == ev.place; }));
    CHECK(ev.captured_at == opts.start + std::chrono::seconds(30 * idx));
  }
}

TEST_CASE("notify_legal=false only reports illegal and unreadable") {
  testsupport::TempDir dir;
  const auto reg = fixture_registry();
  const Lot lot = generate_lot(12, 10, reg, 3, 42);
  const auto rec = baseline();
  notify::RecordingNotifier notifier;
  registry::EventStore store(dir / "events.jsonl");
  PatrolOptions opts;
  opts.start = *parse_iso8601("2025-03-03T08:00:00Z");
  opts.notify_legal = false;
  const auto report = run_patrol(lot, SweepPlan::covering(lot, {0.0}), *rec, reg, notifier, store, opts);
  CHECK(notifier.sent().size() == 3);
  CHECK(store.read_all().size() == 10);
  int notified = 0;
  for (const auto& ev : report.events) notified += ev.notified ? 1 : 0;
  CHECK(notified == 3);
}

TEST_CASE("a forced-degraded slot ends unreadable after every angle") {
  testsupport::TempDir dir;
  const auto reg = fixture_registry();
  Lot lot = generate_lot(12, 10, reg, 3, 42);
  Slot* target = nullptr;
  for (auto& s : lot.slots) {
    if (s.occupant && !target) target = &s;
  }
  REQUIRE(target != nullptr);
  target->forced_degrade = synth::DegradeSpec{0.0, 10.0, 12, 0};

  const auto rec = baseline();
  notify::RecordingNotifier notifier;
  registry::EventStore store(dir / "events.jsonl");
  const auto report = run_patrol(lot, SweepPlan::covering(lot, {0.0, -10.0, 10.0}), *rec, reg, notifier, store, {});
  CHECK(report.unreadable == 1);
  CHECK(report.legal + report.illegal == 9);
  const auto it = std::find_if(report.events.begin(), report.events.end(),
                               [&](const auto& ev) { return ev.place == target->id; });
  REQUIRE(it != report.events.end());
  CHECK(it->verdict == registry::Verdict::unreadable);
  CHECK_FALSE(it->plate.has_value());
  CHECK_FALSE(it->failure_reason.empty());
  const auto& sent = notifier.sent();
  const auto msg = std::find_if(sent.begin(), sent.end(), [&](auto& n) { return n.event_seq == it->seq; });
  REQUIRE(msg != sent.end());
  CHECK(msg->text.find("Status: MANUAL REVIEW") != std::string::npos);
}

TEST_CASE("first successful angle wins") {
  testsupport::TempDir dir;
  const auto reg = fixture_registry();
  const Lot lot = generate_lot(6, 1, reg, 0, 5);
  // Fails for the first two captures, then reads the right plate.
  std::string truth;
  for (const auto& s : lot.slots) {
    if (s.occupant) truth = s.occupant->str();
  }
  testsupport::StubRecognizer rec("stub", [&](const std::string&, int call) { return call < 2 ? "??" : truth; });
  notify::RecordingNotifier notifier;
  registry::EventStore store(dir / "events.jsonl");
  PatrolOptions opts;
  opts.start = *parse_iso8601("2025-03-03T08:00:00Z");
  const auto report = run_patrol(lot, SweepPlan::covering(lot, {0.0, -10.0, 10.0}), rec, reg, notifier, store, opts);
  CHECK(report.legal == 1);
  CHECK(report.events.at(0).plate->str() == truth);
}

TEST_CASE("scenario parsing") {
  testsupport::TempDir dir;
  const auto sc = seed42(dir);
  CHECK(sc.slots == 12);
  CHECK(sc.seed == 42);
  CHECK(sc.angles.size() == 3);
  CHECK(format_iso8601(sc.start) == "2025-03-03T08:00:00Z");
  CHECK(sc.pipeline.summary() == "dual/heuristic/baseline/binary_roi");

  const auto rel = parse_scenario({{"registry", "r.csv"}, {"event_log", "e.jsonl"}}, "/base");
  CHECK(rel.registry_path == std::filesystem::path("/base/r.csv"));

  CHECK_THROWS_AS(parse_scenario({{"registry", "r.csv"}}, {}), Error);
  CHECK_THROWS_AS(parse_scenario({{"registry", "r.csv"}, {"event_log", "e"}, {"start_time", "soon"}}, {}), Error);
  CHECK_THROWS_AS(
      parse_scenario({{"registry", "r.csv"}, {"event_log", "e"}, {"lot", {{"force_degrade", {{"A1", {{"rotation_deg", 45}}}}}}}}, {}),
      Error);
  CHECK_THROWS_AS(load_scenario(dir / "nope.json"), Error);
}

TEST_CASE("scenario run in dry-run mode") {
  testsupport::TempDir dir;
  const auto sc = seed42(dir);
  const auto run = run_scenario(sc, {}, {}, true, [](auto) {});
  CHECK(run.report.legal == 7);
  CHECK(run.report.illegal == 3);
  CHECK(run.report.empty == 2);
  CHECK(run.deliveries.empty());
  CHECK(run.dry_run.size() == 10);
  const auto doc = to_json(run);
  CHECK(doc.at("legal") == 7);
  CHECK(doc.at("dry_run").size() == 10);
}

}
