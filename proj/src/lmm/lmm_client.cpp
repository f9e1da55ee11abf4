#include "lmm/lmm_client.hpp"

#include <chrono>
#include <cstdlib>

#include <json.hpp>

#include "common/http.hpp"
#include "common/rng.hpp"
#include "imaging/codec.hpp"

namespace lotwatch::lmm {

namespace {

constexpr std::string_view kPrompt =
    "This image is a photo of a car or motorcycle license plate. Please output only the license "
    "plate number shown in the image, in a format of 6 or 7 characters composed of English letters "
    "and numbers, such as \"ABC1234.\" The license plate number should retain only alphanumeric "
    "content, with all spaces and hyphens removed. Do not add any annotations or extra text, only "
    "return the license plate number.";

bool retryable(int status) { return status == 0 || status == 429 || (status >= 500 && status <= 599); }

struct CallOutcome {
  bool ok = false;
  std::string content;
  int status = 0;
  std::string error;
};

}  // namespace

std::string_view build_prompt() { return kPrompt; }

std::optional<PlateString> parse_response(std::string_view raw) { return normalize_plate(raw); }

LmmClient::LmmClient(LmmConfig config, Sleeper sleeper, std::uint64_t jitter_seed)
    : config_(std::move(config)), sleeper_(std::move(sleeper)), jitter_seed_(jitter_seed) {
  parse_url(config_.endpoint);
}

LmmRequest LmmClient::make_request(const Image& img) const {
  return LmmRequest{imaging::encode_png(img), std::string(kPrompt), config_.model_id, config_.timeout_s};
}

std::string LmmClient::request_body(const LmmRequest& req) const {
  const std::string data_url =
      "data:image/png;base64," +
      base64_encode(std::string_view(reinterpret_cast<const char*>(req.image_png.data()), req.image_png.size()));
  nlohmann::json doc = {
      {"model", req.model_id},
      {"messages",
       nlohmann::json::array({{{"role", "user"},
                               {"content", nlohmann::json::array({
                                               {{"type", "text"}, {"text", req.prompt}},
                                               {{"type", "image_url"}, {"image_url", {{"url", data_url}}}},
                                           })}}})},
  };
  return doc.dump();
}

LmmResponse LmmClient::recognize_with_retry(const LmmRequest& req) const { return run(nullptr, &req); }

LmmResponse LmmClient::recognize_image(const Image& img) const { return run(&img, nullptr); }

LmmResponse LmmClient::run(const Image* img, const LmmRequest* prepared) const {
  using clock = std::chrono::steady_clock;
  LmmResponse out;
  const auto t0 = clock::now();

  LmmRequest built;
  if (img != nullptr) built = make_request(*img);
  const LmmRequest& req = img != nullptr ? built : *prepared;
  const std::string body = request_body(req);
  HeaderList headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0') {
    headers.emplace_back("Authorization", std::string("Bearer ") + key);
  }
  const auto t1 = clock::now();

  Rng jitter(mix_seed(jitter_seed_, std::to_string(call_counter_.fetch_add(1))));
  const int max_attempts = std::max(1, config_.retry.max_attempts);

  // One logical question: retried on retryable statuses until it succeeds,
  // fails for good, or exhausts the attempt budget shared with re-asks.
  auto ask = [&]() -> CallOutcome {
    CallOutcome outcome;
    int failures = 0;
    while (out.attempts < max_attempts) {
      ++out.attempts;
      http_calls_.fetch_add(1);
      const auto res = http_post(config_.endpoint, body, "application/json", headers, req.timeout_s);
      outcome.status = res.status;
      if (res.status >= 200 && res.status < 300) {
        try {
          const auto doc = nlohmann::json::parse(res.body);
          outcome.content = doc.at("choices").at(0).at("message").at("content").get<std::string>();
          outcome.ok = true;
        } catch (const nlohmann::json::exception& e) {
          outcome.error = std::string("malformed upstream response: ") + e.what();
        }
        return outcome;
      }
      outcome.error = res.transport_ok() ? "HTTP " + std::to_string(res.status) : "transport: " + res.transport_error;
      if (!retryable(res.status)) return outcome;
      ++failures;
      if (out.attempts < max_attempts) {
        const double delay = jittered_delay(config_.retry, failures, jitter);
        out.backoff_delays_s.push_back(delay);
        sleeper_(std::chrono::duration<double>(delay));
      }
    }
    return outcome;
  };

  CallOutcome outcome = ask();
  if (outcome.ok && config_.reask_on_malformed && !parse_response(outcome.content) && out.attempts < max_attempts) {
    outcome = ask();
  }
  const auto t2 = clock::now();

  out.call_succeeded = outcome.ok;
  out.last_status = outcome.status;
  if (outcome.ok) {
    out.raw_text = outcome.content;
    out.normalized = parse_response(out.raw_text);
  } else {
    out.error = outcome.error;
  }
  const auto t3 = clock::now();

  const auto ns = [](clock::duration d) { return std::chrono::duration_cast<std::chrono::nanoseconds>(d).count(); };
  const auto load_ns = ns(t1 - t0), call_ns = ns(t2 - t1), parse_ns = ns(t3 - t2);
  out.elapsed.load = static_cast<double>(load_ns) * 1e-9;
  out.elapsed.call = static_cast<double>(call_ns) * 1e-9;
  out.elapsed.parse = static_cast<double>(parse_ns) * 1e-9;
  out.elapsed.total = static_cast<double>(load_ns + call_ns + parse_ns) * 1e-9;
  return out;
}

}  // namespace lotwatch::lmm
