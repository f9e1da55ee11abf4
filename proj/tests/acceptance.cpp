// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bench/bench.hpp"
#include "common/http.hpp"
#include "common/rng.hpp"
#include "detection/detection.hpp"
#include "imaging/image.hpp"
#include "lmm/lmm_client.hpp"
#include "mocks/mock_lmm.hpp"
#include "mocks/mock_webhook.hpp"
#include "otsu_oracle.hpp"
#include "patrol/scenario.hpp"
#include "recognizer/pipeline.hpp"
#include "registry/event_store.hpp"
#include "stub_recognizer.hpp"
#include "support.hpp"
#include "synth/plate_synth.hpp"

using namespace lotwatch;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Exact-match count for the degraded round trip below. Measured once with
// the seeds fixed here; any change means the rendering or reading path moved.
constexpr int kDegradedPlates = 200;
constexpr int kDegradedPinnedExact = 199;

// SHA-256 of the fixed zero-shot instruction text.
constexpr const char* kPromptSha256 = "c27022205b077143dbf8b11b95ab6d45ae8cecf2153bd65b5baaa104597f8acc";

struct Verdict {
  bool pass = false;
  std::string detail;
};

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

PlateString random_plate(Rng& rng) {
  static constexpr std::string_view alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
  std::string s(6 + rng.below(2), ' ');
  for (auto& c : s) c = alphabet[rng.below(alphabet.size())];
  return *PlateString::from_normalized(s);
}

const Sleeper no_sleep = [](std::chrono::duration<double>) {};

std::unique_ptr<Recognizer> binary_baseline() {
  return make_recognizer(
      PipelineConfig::dual(detection::DetectorKind::heuristic, ocr::OcrKind::baseline, RoiVariant::binary), {});
}

Histogram256 random_histogram(Rng& rng) {
  Histogram256 h;
  const auto shape = rng.below(3);
  const int populated = shape == 1 ? 1 + static_cast<int>(rng.below(6)) : 256;
  for (int i = 0; i < populated; ++i) {
    const int v = populated == 256 ? i : static_cast<int>(rng.below(256));
    std::uint64_t c = rng.below(shape == 0 ? 50 : 4000);
    if (shape == 2) {
      const int d1 = std::abs(v - 60), d2 = std::abs(v - 190);
      c = (std::min(d1, d2) < 25) ? c * 4 : c / 8;
    }
    h.counts[static_cast<std::size_t>(v)] += c;
    h.total += c;
  }
  if (h.total == 0) {
    h.counts[rng.below(256)] = 1;
    h.total = 1;
  }
  return h;
}

Verdict otsu_equivalence() {
  Rng rng(1000);
  std::vector<Histogram256> hists;
  for (int i = 0; i < 1000; ++i) hists.push_back(random_histogram(rng));
  const auto t0 = Clock::now();
  std::vector<int> got;
  for (const auto& h : hists) got.push_back(imaging::otsu_threshold(h));
  const double elapsed = since(t0);
  int mismatches = 0;
  for (std::size_t i = 0; i < hists.size(); ++i) mismatches += got[i] != testsupport::otsu_oracle(hists[i].counts);
  return {mismatches == 0 && elapsed < 1.0,
          std::to_string(mismatches) + " mismatches over 1000 histograms, " + fmt("%.3f s", elapsed)};
}

Verdict clean_round_trip() {
  const auto rec = binary_baseline();
  const synth::GlyphAtlas atlas;
  Rng rng(500);
  const auto t0 = Clock::now();
  int exact = 0;
  for (int i = 0; i < 500; ++i) {
    const auto plate = random_plate(rng);
    const auto r = rec->recognize(RecognitionInput::from_image(synth::render_plate(plate, atlas, 20).image));
    exact += r.plate == plate;
  }
  const double elapsed = since(t0);
  return {exact == 500 && elapsed < 20.0, std::to_string(exact) + "/500 exact, " + fmt("%.2f s", elapsed)};
}

Verdict degraded_round_trip() {
  const auto rec = binary_baseline();
  const synth::GlyphAtlas atlas;
  Rng rng(300);
  int exact = 0;
  for (int i = 0; i < kDegradedPlates; ++i) {
    const auto plate = random_plate(rng);
    const synth::DegradeSpec spec{8.0, 2.0, 0, static_cast<std::uint64_t>(i)};
    const auto img = synth::degrade(synth::render_plate(plate, atlas, 20).image, spec);
    exact += rec->recognize(RecognitionInput::from_image(img)).plate == plate;
  }
  return {exact == kDegradedPinnedExact, std::to_string(exact) + "/" + std::to_string(kDegradedPlates) +
                                             " exact, pinned " + std::to_string(kDegradedPinnedExact)};
}

Verdict detector_quality() {
  const synth::GlyphAtlas atlas;
  Rng rng(100);
  int good = 0;
  double worst = 1.0;
  for (int i = 0; i < 100; ++i) {
    const auto plate = synth::render_plate(random_plate(rng), atlas, 0);
    const int cw = 480, ch = 240;
    const int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(cw - plate.image.width() + 1)));
    const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(ch - plate.image.height() + 1)));
    const auto scene = synth::compose_scene(plate, cw, ch, x, y);
    const double v = detection::iou(detection::detect_heuristic(scene.image), scene.box);
    good += v >= 0.9236;
    worst = std::min(worst, v);
  }
  return {good >= 95, std::to_string(good) + "/100 scenes at IoU >= 0.9236, worst " + fmt("%.4f", worst)};
}

Verdict metric_fidelity() {
  std::vector<bench::DatasetItem> items;
  Rng rng(50);
  for (int i = 0; i < 50; ++i) items.push_back({"img" + std::to_string(i) + ".png", random_plate(rng)});
  std::vector<bench::BenchConfig> configs{{"fixture", [&] {
    return std::make_unique<testsupport::StubRecognizer>("fixture", [&](const std::string& stem, int call) {
      const auto n = std::stoi(stem.substr(3));
      return call < 27 ? items[static_cast<std::size_t>(n)].truth.str() : std::string("ZZ99999");
    });
  }}};
  const auto s = bench::run_bench(items, configs).front();
  const auto rate = bench::format_percent(s.exact_match_rate());

  RecognitionResult pred;
  pred.plate = PlateString::from_normalized("HPJ149");
  const auto rec = bench::score({"HPJ149.jpg", *PlateString::from_normalized("HPJ149")}, pred);
  const bool ok = s.exact_count == 27 && rate == "54" && rec.char_correct == 6 && rec.char_total == 6;
  return {ok, "27/50 -> " + rate + "%, HPJ149 vs HPJ149 -> " + std::to_string(rec.char_correct) + "/" +
                  std::to_string(rec.char_total)};
}

std::vector<std::string> golden_lines(const fs::path& p) {
  std::istringstream in(testsupport::slurp(p));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

Verdict report_emitter() {
  using bench::BenchSummary;
  const std::vector<BenchSummary> reference = {
      BenchSummary::from_counts("YOLOv11n + Tesseract", RoiVariant::original, 50, 27, 0.6963),
      BenchSummary::from_counts("YOLOv11n + Tesseract", RoiVariant::gray, 50, 29, 0.6963),
      BenchSummary::from_counts("YOLOv11n + Tesseract", RoiVariant::binary, 50, 30, 0.6963),
      BenchSummary::from_counts("YOLOv11n + EasyOCR", RoiVariant::original, 50, 35, 0.3937),
      BenchSummary::from_counts("YOLOv11n + EasyOCR", RoiVariant::gray, 50, 36, 0.3937),
      BenchSummary::from_counts("YOLOv11n + EasyOCR", RoiVariant::binary, 50, 25, 0.3937),
      BenchSummary::from_counts("GPT-4o", std::nullopt, 50, 49, 2.8048),
  };
  const auto table = bench::emit_table(reference, bench::TableFormat::markdown);
  const auto rows = golden_lines(testsupport::golden_dir() / "table1_rows.md");
  int found = 0;
  for (const auto& row : rows) found += table.find(row + "\n") != std::string::npos;
  return {!rows.empty() && found == static_cast<int>(rows.size()),
          std::to_string(found) + "/" + std::to_string(rows.size()) + " reference rows reproduced"};
}

Verdict lmm_contract(std::vector<std::string>& urls) {
  namespace script = mocks::script;
  mocks::MockLmmServer mock(script::answer("hpj-149"));
  urls.push_back(mock.endpoint());
  lmm::LmmConfig cfg;
  cfg.endpoint = mock.endpoint();
  cfg.api_key_env = "LOTWATCH_ACCEPTANCE_NO_KEY";
  cfg.timeout_s = 5.0;
  const lmm::LmmClient client(cfg, no_sleep);
  const auto img = synth::render_plate(*PlateString::from_normalized("HPJ149"), synth::GlyphAtlas{}, 20).image;

  std::vector<std::string> problems;
  const auto a = client.recognize_image(img);
  if (!a.normalized || a.normalized->str() != "HPJ149") problems.push_back("normalization");

  const auto body = nlohmann::json::parse(mock.calls().at(0).body);
  const std::string sent = body.at("messages").at(0).at("content").at(0).at("text");
  if (sha256_hex(lmm::build_prompt()) != kPromptSha256 || sha256_hex(sent) != kPromptSha256)
    problems.push_back("prompt checksum");

  mock.reset();
  mock.set_script(script::fail_then(7, 503, "HPJ149"));
  const auto b = client.recognize_image(img);
  if (!(b.call_succeeded && b.attempts == 8 && b.normalized)) problems.push_back("fail-7-then-succeed");

  mock.reset();
  mock.set_script(script::always_fail(503));
  const auto c = client.recognize_image(img);
  if (c.call_succeeded || c.attempts != 8 || mock.call_count() != 8) problems.push_back("fail-8");

  std::string detail = "normalize, prompt sha256, 7 failures then success (attempts " + std::to_string(b.attempts) +
                       "), 8 failures (attempts " + std::to_string(c.attempts) + ")";
  for (const auto& p : problems) detail += "; broken: " + p;
  return {problems.empty(), detail};
}

Verdict timing_harness() {
  std::vector<bench::DatasetItem> items;
  Rng rng(20);
  for (int i = 0; i < 20; ++i) {
    const auto p = random_plate(rng);
    items.push_back({p.str() + ".png", p});
  }
  std::vector<bench::BenchConfig> configs{{"sleep50", [] {
    return std::make_unique<testsupport::StubRecognizer>(
        "sleep50", [](const std::string& stem, int) { return stem; }, std::chrono::milliseconds(50));
  }}};
  const auto s = bench::run_bench(items, configs).front();
  const double t = s.mean_time_s.value_or(-1.0);
  return {t >= 0.050 && t <= 0.070, "mean " + fmt("%.4f s", t) + " over " + std::to_string(s.timed_runs) + " runs"};
}

Verdict end_to_end_patrol(std::vector<std::string>& urls) {
  testsupport::TempDir dir;
  mocks::MockWebhookServer hook;
  urls.push_back(hook.url());
  auto doc = nlohmann::json::parse(testsupport::slurp(testsupport::data_dir() / "scenario_seed42.json"));
  doc["event_log"] = (dir / "events.jsonl").string();
  doc["notify"]["webhook_url"] = hook.url();
  doc["notify"]["token_env"] = "LOTWATCH_ACCEPTANCE_NO_TOKEN";
  const auto sc = patrol::parse_scenario(doc, testsupport::data_dir());

  lmm::LmmConfig unused_lmm;
  unused_lmm.endpoint = "http://127.0.0.1:9/v1/chat/completions";
  const auto run = patrol::run_scenario(sc, unused_lmm, {}, true, no_sleep);
  const auto& rep = run.report;

  std::vector<std::string> problems;
  if (rep.legal != 7 || rep.illegal != 3 || rep.unreadable != 0 || rep.empty != 2) problems.push_back("counts");

  const auto bodies = hook.delivered_bodies();
  int warnings = 0, legal = 0;
  for (const auto& b : bodies) {
    const std::string text = nlohmann::json::parse(b).at("messages").at(0).at("text");
    warnings += text.rfind("⚠ ILLEGAL PARKING\n", 0) == 0;
    legal += text.find("\nStatus: LEGAL") != std::string::npos;
  }
  if (warnings != 3 || legal != 7 || bodies.size() != 10) problems.push_back("message mix");

  const auto golden = golden_lines(testsupport::golden_dir() / "seed42_webhook.jsonl");
  if (golden != bodies) {
    problems.push_back("webhook bodies differ from golden");
    std::string actual;
    for (const auto& b : bodies) actual += b + "\n";
    testsupport::spit(fs::current_path() / "seed42_webhook.actual.jsonl", actual);
  }

  const auto persisted = registry::EventStore(dir / "events.jsonl").read_all();
  if (persisted.size() != 10 || persisted != rep.events) problems.push_back("event log");

  std::string detail = "legal " + std::to_string(rep.legal) + ", illegal " + std::to_string(rep.illegal) +
                       ", unreadable " + std::to_string(rep.unreadable) + ", empty " + std::to_string(rep.empty) +
                       "; " + std::to_string(warnings) + " warning + " + std::to_string(legal) +
                       " legal messages; " + std::to_string(persisted.size()) + " events re-read";
  for (const auto& p : problems) detail += "; broken: " + p;
  return {problems.empty(), detail};
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  std::vector<std::string> urls;
  bool all_pass = true;

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"Otsu matches the exhaustive oracle", otsu_equivalence},
      {"clean synthetic plates round-trip exactly", clean_round_trip},
      {"degraded round trip reproduces the pinned rate", degraded_round_trip},
      {"heuristic detector meets the IoU bar", detector_quality},
      {"exact-match and per-character metrics", metric_fidelity},
      {"report emitter reproduces the reference rows", report_emitter},
      {"LMM client contract against the mock", [&] { return lmm_contract(urls); }},
      {"timing harness measures a 50 ms stub", timing_harness},
      {"seed-42 patrol end to end", [&] { return end_to_end_patrol(urls); }},
  };

  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Verdict v;
    const auto start = Clock::now();
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    all_pass &= v.pass;
    std::printf("[%s] %2d. %s (%s) [%.2f s]\n", v.pass ? "PASS" : "FAIL", index, name.c_str(), v.detail.c_str(),
                since(start));
  }

  const double total = since(t0);
  bool loopback_only = true;
  for (const auto& u : urls) loopback_only &= u.rfind("http://127.0.0.1:", 0) == 0;
  const bool fast = total < 60.0 && loopback_only;
  all_pass &= fast;
  std::printf("[%s] 10. whole suite under 60 s on loopback only (%.2f s, %zu mock endpoints, %s)\n",
              fast ? "PASS" : "FAIL", total, urls.size(), loopback_only ? "all loopback" : "non-loopback URL");
  return all_pass ? 0 : 1;
}
