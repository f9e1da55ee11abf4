#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "common/backoff.hpp"
#include "lmm/lmm_client.hpp"
#include "notify/notify.hpp"
#include "patrol/patrol.hpp"
#include "recognizer/pipeline.hpp"

namespace lotwatch::patrol {

// Everything one patrol run needs, read from a single JSON document:
//
//   {
//     "lot": {"slots": 12, "occupied": 10, "illegal": 3, "seed": 42,
//             "force_degrade": {"B2": {"noise_sigma": 0, "rotation_deg": 10, "blur_radius": 12}}},
//     "plan": {"angles": [0, -10, 10], "waypoints": ["A1", ...]},
//     "pipeline": {"backend": "dual", "detector": "heuristic", "ocr": "baseline", "variant": "binary"},
//     "registry": "registry.csv",
//     "event_log": "events.jsonl",
//     "start_time": "2025-03-03T08:00:00Z",
//     "step_seconds": 30,
//     "notify": {"webhook_url": "...", "recipient": "manager", "notify_legal": true},
//     "capture": {"cell_size": 3, "margin": 20, "angle_attenuation": 0.1, "noise_sigma": 3}
//   }
//
// Relative paths resolve against the scenario file's directory.
struct Scenario {
  int slots = 12;
  int occupied = 10;
  int illegal = 3;
  std::uint64_t seed = 42;
  std::map<std::string, synth::DegradeSpec> force_degrade;

  std::vector<double> angles{0.0, -10.0, 10.0};
  std::vector<std::string> waypoints;  // empty: every slot in order

  PipelineConfig pipeline;
  std::filesystem::path registry_path;
  std::filesystem::path event_log_path;
  Timestamp start{};
  std::chrono::seconds step{30};

  std::optional<std::string> webhook_url;
  std::optional<std::string> token_env;
  std::optional<std::string> recipient;
  std::optional<bool> notify_legal;
  CaptureSettings capture;
};

// Throws Error(config) on malformed documents.
Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

// Builds the lot from the scenario and applies force_degrade.
Lot build_lot(const Scenario& sc, const registry::Registry& reg);

struct ScenarioRun {
  PatrolReport report;
  std::vector<notify::DeliveryRecord> deliveries;  // webhook mode
  std::vector<notify::Notification> dry_run;       // no webhook configured
};

// Report plus "deliveries" and "dry_run" notification lists.
nlohmann::json to_json(const ScenarioRun& run);

// Wires registry, event store, recognizer and notifier together, runs the
// patrol and drains the notification queue. Scenario notify settings
// override `notify_defaults`; without any webhook URL notifications are
// collected in memory.
ScenarioRun run_scenario(const Scenario& sc, const lmm::LmmConfig& lmm_cfg,
                         const notify::WebhookConfig& notify_defaults, bool notify_legal_default = true,
                         Sleeper sleeper = real_sleeper());

}  // namespace lotwatch::patrol
