#include "service/config.hpp"

#include <fstream>

#include "common/error.hpp"
#include "common/http.hpp"

namespace lotwatch::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() || base.empty()) ? path : base / path;
}

void reject_secrets(const json& section, const char* name) {
  for (const char* key : {"api_key", "token", "password", "secret"}) {
    if (section.contains(key)) {
      throw Error(ErrorCode::config, std::string(name) + "." + key +
                                         ": credentials are read from environment variables, not the config file");
    }
  }
}

}  // namespace

AppConfig parse_config(const json& doc, const fs::path& base_dir) {
  AppConfig cfg;
  try {
    if (doc.contains("lmm")) {
      const auto& j = doc.at("lmm");
      reject_secrets(j, "lmm");
      cfg.lmm.endpoint = j.value("endpoint", cfg.lmm.endpoint);
      cfg.lmm.model_id = j.value("model_id", cfg.lmm.model_id);
      cfg.lmm.api_key_env = j.value("api_key_env", cfg.lmm.api_key_env);
      cfg.lmm.timeout_s = j.value("timeout_s", cfg.lmm.timeout_s);
      cfg.lmm.retry.max_attempts = j.value("max_attempts", cfg.lmm.retry.max_attempts);
      cfg.lmm.retry.base_delay_s = j.value("backoff_base_s", cfg.lmm.retry.base_delay_s);
      cfg.lmm.retry.cap_s = j.value("backoff_cap_s", cfg.lmm.retry.cap_s);
      cfg.lmm.reask_on_malformed = j.value("reask_on_malformed", cfg.lmm.reask_on_malformed);
      parse_url(cfg.lmm.endpoint);
      if (cfg.lmm.retry.max_attempts < 1) throw Error(ErrorCode::config, "lmm.max_attempts must be >= 1");
    }
    if (doc.contains("notify")) {
      const auto& j = doc.at("notify");
      reject_secrets(j, "notify");
      cfg.notify.url = j.value("webhook_url", cfg.notify.url);
      cfg.notify.token_env = j.value("token_env", cfg.notify.token_env);
      cfg.notify.recipient = j.value("recipient", cfg.notify.recipient);
      cfg.notify.retry.max_attempts = j.value("max_attempts", cfg.notify.retry.max_attempts);
      cfg.notify.retry.base_delay_s = j.value("backoff_base_s", cfg.notify.retry.base_delay_s);
      cfg.notify.timeout_s = j.value("timeout_s", cfg.notify.timeout_s);
      cfg.notify_legal = j.value("notify_legal", cfg.notify_legal);
      if (!cfg.notify.url.empty()) parse_url(cfg.notify.url);
    }
    if (doc.contains("registry_path")) cfg.registry_path = resolve(base_dir, doc.at("registry_path").get<std::string>());
    if (doc.contains("event_log_path")) cfg.event_log_path = resolve(base_dir, doc.at("event_log_path").get<std::string>());
    if (doc.contains("server")) {
      cfg.host = doc.at("server").value("host", cfg.host);
      cfg.port = doc.at("server").value("port", cfg.port);
    }
    if (doc.contains("bench")) {
      const auto& j = doc.at("bench");
      cfg.bench_pipeline = pipeline_from_json(j);
      cfg.bench_repeats = j.value("repeats", cfg.bench_repeats);
      const auto format = bench::parse_table_format(j.value("format", "markdown"));
      if (!format) throw Error(ErrorCode::config, "bench.format must be markdown or csv");
      cfg.bench_format = *format;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, std::string("malformed config: ") + e.what());
  }
  return cfg;
}

AppConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::not_found, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

json to_json(const AppConfig& cfg) {
  json bench = {{"repeats", cfg.bench_repeats},
                {"format", cfg.bench_format == bench::TableFormat::csv ? "csv" : "markdown"},
                {"pipeline", cfg.bench_pipeline.summary()}};
  return {
      {"lmm",
       {{"endpoint", cfg.lmm.endpoint},
        {"model_id", cfg.lmm.model_id},
        {"api_key_env", cfg.lmm.api_key_env},
        {"timeout_s", cfg.lmm.timeout_s},
        {"max_attempts", cfg.lmm.retry.max_attempts},
        {"backoff_base_s", cfg.lmm.retry.base_delay_s},
        {"backoff_cap_s", cfg.lmm.retry.cap_s},
        {"reask_on_malformed", cfg.lmm.reask_on_malformed}}},
      {"notify",
       {{"webhook_url", cfg.notify.url},
        {"token_env", cfg.notify.token_env},
        {"recipient", cfg.notify.recipient},
        {"notify_legal", cfg.notify_legal},
        {"max_attempts", cfg.notify.retry.max_attempts}}},
      {"registry_path", cfg.registry_path.string()},
      {"event_log_path", cfg.event_log_path.string()},
      {"server", {{"host", cfg.host}, {"port", cfg.port}}},
      {"bench", bench},
  };
}

std::string config_digest(const AppConfig& cfg) { return sha256_hex(to_json(cfg).dump()); }

}  // namespace lotwatch::service
