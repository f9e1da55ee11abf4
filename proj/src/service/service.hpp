#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "common/backoff.hpp"
#include "recognizer/pipeline.hpp"
#include "service/config.hpp"

namespace lotwatch::service {

// Machine-readable failure body: {"code", "message", "stage"}.
struct ApiError {
  std::string code;
  std::string message;
  std::string stage;
  int http_status = 500;

  nlohmann::json to_json() const;
};

nlohmann::json to_json(const RecognitionResult& r);

// Maps a failed recognition to its API error (decode 400, lmm 502,
// detect/ocr/format 422).
ApiError api_error_for(const RecognitionResult& r);

// HTTP front end:
//   POST /v1/recognize   raw image bytes, or {"image_base64": ...}; backend
//                        selectors as query parameters or JSON fields
//   POST /v1/patrol      scenario document -> patrol report
//   GET  /v1/events      ?since=SEQ
//   GET  /healthz        503 until the registry is loaded
class Service {
 public:
  explicit Service(AppConfig cfg, Sleeper sleeper = real_sleeper());
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Loads cfg.registry_path; the service reports ready afterwards.
  void load_registry();
  bool ready() const;

  // Binds host:port (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  // Serves on the bound socket until stop(); blocks.
  void listen();
  // bind + listen on a background thread.
  int start(const std::string& host, int port);
  void stop();

  const AppConfig& config() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lotwatch::service
