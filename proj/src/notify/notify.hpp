#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "common/backoff.hpp"
#include "common/timeutil.hpp"
#include "registry/event_store.hpp"

namespace lotwatch::notify {

enum class Severity { info, warning };

std::string_view to_string(Severity s);

struct Notification {
  std::string recipient;
  std::string text;
  Severity severity = Severity::info;
  std::uint64_t event_seq = 0;
};

using TimeFormatter = std::function<std::string(Timestamp)>;

// Message body for an event; warning severity iff the verdict is illegal.
Notification format_message(const registry::PatrolEvent& ev, const std::string& recipient,
                            const TimeFormatter& format_time = format_iso8601);

enum class DeliveryStatus { pending, delivered, failed };

std::string_view to_string(DeliveryStatus s);

struct DeliveryRecord {
  std::uint64_t id = 0;  // enqueue order
  std::uint64_t event_seq = 0;
  std::string recipient;
  int attempts = 0;
  DeliveryStatus status = DeliveryStatus::pending;
  std::optional<std::string> last_error;
};

struct WebhookConfig {
  std::string url;
  std::string token_env = "LINE_CHANNEL_ACCESS_TOKEN";
  std::string recipient;
  RetryPolicy retry{5, 0.5, 2.0, 8.0};
  double timeout_s = 10.0;
};

// {"to": recipient, "messages": [{"type": "text", "text": body}]}
std::string push_body(const Notification& n);

// One synchronous delivery with retries on 429, 5xx and transport errors.
// Never throws for delivery problems; they end up in the record.
DeliveryRecord dispatch(const Notification& n, const WebhookConfig& sink, const Sleeper& sleeper, Rng& jitter);

class Notifier {
 public:
  virtual ~Notifier() = default;
  // Returns the id of the queued notification.
  virtual std::uint64_t enqueue(Notification n) = 0;
};

// Multi-producer queue drained by one consumer thread in FIFO order, which
// keeps per-recipient ordering. Destruction drains whatever is queued.
class WebhookNotifier final : public Notifier {
 public:
  explicit WebhookNotifier(WebhookConfig sink, Sleeper sleeper = real_sleeper(), std::uint64_t jitter_seed = 0x11e);
  ~WebhookNotifier() override;
  WebhookNotifier(const WebhookNotifier&) = delete;
  WebhookNotifier& operator=(const WebhookNotifier&) = delete;

  std::uint64_t enqueue(Notification n) override;

  // Blocks until every notification enqueued so far is delivered or failed.
  void drain();
  // drain(), then stop the consumer. Idempotent.
  void shutdown();

  std::vector<DeliveryRecord> records() const;

 private:
  void consume();

  WebhookConfig sink_;
  Sleeper sleeper_;
  Rng jitter_;

  mutable std::mutex mu_;
  std::condition_variable work_cv_;
  std::condition_variable idle_cv_;
  std::deque<std::pair<std::uint64_t, Notification>> queue_;
  std::vector<DeliveryRecord> records_;
  std::uint64_t next_id_ = 1;
  bool busy_ = false;
  bool stopping_ = false;
  std::thread worker_;
};

// Collects notifications in memory; for dry runs and tests.
class RecordingNotifier final : public Notifier {
 public:
  std::uint64_t enqueue(Notification n) override;
  std::vector<Notification> sent() const;

 private:
  mutable std::mutex mu_;
  std::vector<Notification> sent_;
};

}  // namespace lotwatch::notify
