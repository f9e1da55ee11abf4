#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "common/backoff.hpp"
#include "imaging/image.hpp"
#include "recognizer/plate.hpp"

namespace lotwatch::lmm {

// The fixed zero-shot instruction sent with every image.
std::string_view build_prompt();

// Same rule as normalize_plate; nullopt is a parse failure.
std::optional<PlateString> parse_response(std::string_view raw);

struct LmmConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model_id = "gpt-4o";
  // Name of the environment variable holding the bearer token.
  std::string api_key_env = "OPENAI_API_KEY";
  double timeout_s = 30.0;
  RetryPolicy retry{8, 0.5, 2.0, 8.0};
  // Ask once more when the model answers something that does not normalize.
  bool reask_on_malformed = false;
};

struct LmmRequest {
  std::vector<std::uint8_t> image_png;
  std::string prompt;
  std::string model_id;
  double timeout_s = 30.0;
};

struct PhaseTiming {
  double load = 0.0;   // image encode + request build
  double call = 0.0;   // HTTP round trips including backoff sleeps
  double parse = 0.0;  // response decode + normalization
  double total = 0.0;  // load + call + parse
};

struct LmmResponse {
  std::string raw_text;
  std::optional<PlateString> normalized;
  int attempts = 0;
  PhaseTiming elapsed;
  bool call_succeeded = false;
  int last_status = 0;  // 0 when the last attempt failed in transport
  std::string error;    // set when call_succeeded is false
  std::vector<double> backoff_delays_s;
};

// Chat-completions client for an OpenAI-compatible endpoint. Shareable
// across threads; each call is independent.
class LmmClient {
 public:
  explicit LmmClient(LmmConfig config, Sleeper sleeper = real_sleeper(), std::uint64_t jitter_seed = 0x5eed);

  const LmmConfig& config() const noexcept { return config_; }

  LmmRequest make_request(const Image& img) const;

  // JSON document posted to the endpoint.
  std::string request_body(const LmmRequest& req) const;

  // Retries transport errors, 429 and 5xx with exponential backoff and full
  // jitter; other statuses fail at once. A successful call whose answer does
  // not normalize is not retried unless reask_on_malformed is set.
  LmmResponse recognize_with_retry(const LmmRequest& req) const;

  // make_request + recognize_with_retry, with PNG encoding counted as load.
  LmmResponse recognize_image(const Image& img) const;

  std::uint64_t http_calls() const noexcept { return http_calls_.load(); }

 private:
  LmmResponse run(const Image* img, const LmmRequest* prepared) const;

  LmmConfig config_;
  Sleeper sleeper_;
  std::uint64_t jitter_seed_;
  mutable std::atomic<std::uint64_t> http_calls_{0};
  mutable std::atomic<std::uint64_t> call_counter_{0};
};

}  // namespace lotwatch::lmm
