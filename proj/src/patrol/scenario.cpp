#include "patrol/scenario.hpp"

#include <fstream>

#include "common/error.hpp"
#include "registry/event_store.hpp"

namespace lotwatch::patrol {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

synth::DegradeSpec degrade_from_json(const json& j) {
  synth::DegradeSpec spec;
  spec.noise_sigma = j.value("noise_sigma", 0.0);
  spec.rotation_deg = j.value("rotation_deg", 0.0);
  spec.blur_radius = j.value("blur_radius", 0);
  synth::validate(spec);
  return spec;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

Scenario parse_scenario(const json& doc, const fs::path& base_dir) {
  try {
    Scenario sc;
    if (doc.contains("lot")) {
      const auto& lot = doc.at("lot");
      sc.slots = lot.value("slots", sc.slots);
      sc.occupied = lot.value("occupied", sc.occupied);
      sc.illegal = lot.value("illegal", sc.illegal);
      sc.seed = lot.value("seed", sc.seed);
      if (lot.contains("force_degrade")) {
        for (const auto& [slot, spec] : lot.at("force_degrade").items()) sc.force_degrade[slot] = degrade_from_json(spec);
      }
    }
    if (doc.contains("plan")) {
      const auto& plan = doc.at("plan");
      if (plan.contains("angles")) sc.angles = plan.at("angles").get<std::vector<double>>();
      if (plan.contains("waypoints")) sc.waypoints = plan.at("waypoints").get<std::vector<std::string>>();
    }
    if (doc.contains("pipeline")) sc.pipeline = pipeline_from_json(doc.at("pipeline"));
    sc.registry_path = resolve(base_dir, doc.at("registry").get<std::string>());
    sc.event_log_path = resolve(base_dir, doc.at("event_log").get<std::string>());
    if (doc.contains("start_time")) {
      const auto t = parse_iso8601(doc.at("start_time").get<std::string>());
      if (!t) throw Error(ErrorCode::config, "invalid start_time in scenario");
      sc.start = *t;
    }
    sc.step = std::chrono::seconds(doc.value("step_seconds", 30));
    if (doc.contains("notify")) {
      const auto& n = doc.at("notify");
      if (n.contains("webhook_url")) sc.webhook_url = n.at("webhook_url").get<std::string>();
      if (n.contains("token_env")) sc.token_env = n.at("token_env").get<std::string>();
      if (n.contains("recipient")) sc.recipient = n.at("recipient").get<std::string>();
      if (n.contains("notify_legal")) sc.notify_legal = n.at("notify_legal").get<bool>();
    }
    if (doc.contains("capture")) {
      const auto& c = doc.at("capture");
      sc.capture.cell_size = c.value("cell_size", sc.capture.cell_size);
      sc.capture.margin = c.value("margin", sc.capture.margin);
      sc.capture.angle_attenuation = c.value("angle_attenuation", sc.capture.angle_attenuation);
      sc.capture.noise_sigma = c.value("noise_sigma", sc.capture.noise_sigma);
    }
    return sc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, std::string("malformed scenario: ") + e.what());
  }
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::not_found, "cannot open scenario " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, "scenario " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_scenario(doc, path.parent_path());
}

Lot build_lot(const Scenario& sc, const registry::Registry& reg) {
  Lot lot = generate_lot(sc.slots, sc.occupied, reg, sc.illegal, sc.seed);
  for (const auto& [id, spec] : sc.force_degrade) {
    Slot* slot = lot.find(id);
    if (slot == nullptr) throw Error(ErrorCode::config, "force_degrade names unknown slot " + id);
    slot->forced_degrade = spec;
  }
  return lot;
}

ScenarioRun run_scenario(const Scenario& sc, const lmm::LmmConfig& lmm_cfg,
                         const notify::WebhookConfig& notify_defaults, bool notify_legal_default, Sleeper sleeper) {
  const auto reg = registry::load_registry(sc.registry_path);
  const Lot lot = build_lot(sc, reg);
  SweepPlan plan = sc.waypoints.empty() ? SweepPlan::covering(lot, sc.angles) : SweepPlan{sc.waypoints, sc.angles};
  const auto recognizer = make_recognizer(sc.pipeline, lmm_cfg, sleeper);
  registry::EventStore store(sc.event_log_path);

  notify::WebhookConfig sink = notify_defaults;
  if (sc.webhook_url) sink.url = *sc.webhook_url;
  if (sc.token_env) sink.token_env = *sc.token_env;
  if (sc.recipient) sink.recipient = *sc.recipient;

  PatrolOptions options;
  options.start = sc.start;
  options.step = sc.step;
  options.notify_legal = sc.notify_legal.value_or(notify_legal_default);
  options.recipient = sink.recipient.empty() ? "manager" : sink.recipient;
  options.capture = sc.capture;

  ScenarioRun run;
  if (sink.url.empty()) {
    notify::RecordingNotifier notifier;
    run.report = run_patrol(lot, plan, *recognizer, reg, notifier, store, options);
    run.dry_run = notifier.sent();
  } else {
    notify::WebhookNotifier notifier(sink, sleeper);
    run.report = run_patrol(lot, plan, *recognizer, reg, notifier, store, options);
    notifier.shutdown();
    run.deliveries = notifier.records();
  }
  return run;
}

json to_json(const ScenarioRun& run) {
  json out = to_json(run.report);
  json deliveries = json::array();
  for (const auto& d : run.deliveries) {
    json item = {{"id", d.id}, {"event_seq", d.event_seq}, {"recipient", d.recipient}, {"attempts", d.attempts},
                 {"status", std::string(notify::to_string(d.status))}};
    if (d.last_error) item["last_error"] = *d.last_error;
    deliveries.push_back(std::move(item));
  }
  json dry = json::array();
  for (const auto& n : run.dry_run) {
    dry.push_back({{"event_seq", n.event_seq}, {"recipient", n.recipient},
                   {"severity", std::string(notify::to_string(n.severity))}, {"text", n.text}});
  }
  out["deliveries"] = std::move(deliveries);
  out["dry_run"] = std::move(dry);
  return out;
}

}  // namespace lotwatch::patrol
