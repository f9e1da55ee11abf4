#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bench/bench.hpp"
#include "lmm/lmm_client.hpp"
#include "notify/notify.hpp"
#include "recognizer/pipeline.hpp"

namespace lotwatch::service {

// Application configuration. Secrets are referenced by environment
// variable name only; a document carrying "api_key" or "token" values is
// rejected.
//
//   {
//     "lmm": {"endpoint": "...", "model_id": "gpt-4o", "api_key_env": "OPENAI_API_KEY",
//             "timeout_s": 30, "max_attempts": 8, "backoff_base_s": 0.5, "backoff_cap_s": 8,
//             "reask_on_malformed": false},
//     "notify": {"webhook_url": "...", "token_env": "LINE_CHANNEL_ACCESS_TOKEN",
//                "recipient": "U123", "notify_legal": true, "max_attempts": 5},
//     "registry_path": "registry.csv",
//     "event_log_path": "events.jsonl",
//     "server": {"host": "127.0.0.1", "port": 8080},
//     "bench": {"backend": "dual", "detector": "heuristic", "ocr": "baseline",
//               "variant": "binary", "repeats": 1, "format": "markdown"}
//   }
struct AppConfig {
  lmm::LmmConfig lmm;
  notify::WebhookConfig notify;
  bool notify_legal = true;
  std::filesystem::path registry_path = "registry.csv";
  std::filesystem::path event_log_path = "events.jsonl";
  std::string host = "127.0.0.1";
  int port = 8080;

  PipelineConfig bench_pipeline;
  int bench_repeats = 1;
  bench::TableFormat bench_format = bench::TableFormat::markdown;
};

// Relative paths resolve against base_dir. Throws Error(config).
AppConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
AppConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const AppConfig& cfg);

// SHA-256 of the canonical JSON form.
std::string config_digest(const AppConfig& cfg);

}  // namespace lotwatch::service
