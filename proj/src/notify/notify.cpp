#include "notify/notify.hpp"

#include <cstdlib>

#include <json.hpp>

#include "common/http.hpp"

namespace lotwatch::notify {

std::string_view to_string(Severity s) { return s == Severity::warning ? "warning" : "info"; }

std::string_view to_string(DeliveryStatus s) {
  switch (s) {
    case DeliveryStatus::pending: return "pending";
    case DeliveryStatus::delivered: return "delivered";
    case DeliveryStatus::failed: return "failed";
  }
  return "pending";
}

Notification format_message(const registry::PatrolEvent& ev, const std::string& recipient,
                            const TimeFormatter& format_time) {
  const std::string time = format_time(ev.captured_at);
  Notification n;
  n.recipient = recipient;
  n.event_seq = ev.seq;
  switch (ev.verdict) {
    case registry::Verdict::legal:
      n.severity = Severity::info;
      n.text = "Parking check\nPlate: " + ev.plate->str() + "\nTime: " + time + "\nPlace: " + ev.place +
               "\nStatus: LEGAL";
      break;
    case registry::Verdict::illegal:
      n.severity = Severity::warning;
      n.text = "⚠ ILLEGAL PARKING\nPlate: " + ev.plate->str() + "\nTime: " + time + "\nPlace: " + ev.place +
               "\nStatus: ILLEGAL — action required";
      break;
    case registry::Verdict::unreadable:
      n.severity = Severity::info;
      n.text = "Parking check\nPlate: UNREADABLE (" + ev.failure_reason + ")\nTime: " + time + "\nPlace: " +
               ev.place + "\nStatus: MANUAL REVIEW";
      break;
  }
  return n;
}

std::string push_body(const Notification& n) {
  const nlohmann::json doc = {
      {"to", n.recipient},
      {"messages", nlohmann::json::array({{{"type", "text"}, {"text", n.text}}})},
  };
  return doc.dump();
}

DeliveryRecord dispatch(const Notification& n, const WebhookConfig& sink, const Sleeper& sleeper, Rng& jitter) {
  DeliveryRecord rec;
  rec.event_seq = n.event_seq;
  rec.recipient = n.recipient;
  HeaderList headers;
  if (const char* token = std::getenv(sink.token_env.c_str()); token != nullptr && *token != '\0') {
    headers.emplace_back("Authorization", std::string("Bearer ") + token);
  }
  const std::string body = push_body(n);
  const int max_attempts = std::max(1, sink.retry.max_attempts);
  while (rec.attempts < max_attempts) {
    ++rec.attempts;
    HttpResponse res;
    try {
      res = http_post(sink.url, body, "application/json", headers, sink.timeout_s);
    } catch (const std::exception& e) {
      // Configuration problems (bad URL) cannot improve with retries.
      rec.status = DeliveryStatus::failed;
      rec.last_error = e.what();
      return rec;
    }
    if (res.status >= 200 && res.status < 300) {
      rec.status = DeliveryStatus::delivered;
      rec.last_error.reset();
      return rec;
    }
    rec.last_error = res.transport_ok() ? "HTTP " + std::to_string(res.status) : "transport: " + res.transport_error;
    const bool retryable = !res.transport_ok() || res.status == 429 || res.status >= 500;
    if (!retryable) break;
    if (rec.attempts < max_attempts) {
      sleeper(std::chrono::duration<double>(jittered_delay(sink.retry, rec.attempts, jitter)));
    }
  }
  rec.status = DeliveryStatus::failed;
  return rec;
}

WebhookNotifier::WebhookNotifier(WebhookConfig sink, Sleeper sleeper, std::uint64_t jitter_seed)
    : sink_(std::move(sink)), sleeper_(std::move(sleeper)), jitter_(jitter_seed) {
  worker_ = std::thread([this] { consume(); });
}

WebhookNotifier::~WebhookNotifier() { shutdown(); }

std::uint64_t WebhookNotifier::enqueue(Notification n) {
  std::uint64_t id;
  {
    std::lock_guard lock(mu_);
    id = next_id_++;
    DeliveryRecord pending;
    pending.id = id;
    pending.event_seq = n.event_seq;
    pending.recipient = n.recipient;
    records_.push_back(pending);
    queue_.emplace_back(id, std::move(n));
  }
  work_cv_.notify_one();
  return id;
}

void WebhookNotifier::consume() {
  std::unique_lock lock(mu_);
  while (true) {
    work_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
    if (queue_.empty()) {
      if (stopping_) return;
      continue;
    }
    auto [id, n] = std::move(queue_.front());
    queue_.pop_front();
    busy_ = true;
    lock.unlock();
    DeliveryRecord rec = dispatch(n, sink_, sleeper_, jitter_);
    lock.lock();
    rec.id = id;
    records_[id - 1] = std::move(rec);
    busy_ = false;
    if (queue_.empty()) idle_cv_.notify_all();
  }
}

void WebhookNotifier::drain() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [&] { return queue_.empty() && !busy_; });
}

void WebhookNotifier::shutdown() {
  {
    std::lock_guard lock(mu_);
    if (!worker_.joinable()) return;
    stopping_ = true;
  }
  work_cv_.notify_all();
  worker_.join();
}

std::vector<DeliveryRecord> WebhookNotifier::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::uint64_t RecordingNotifier::enqueue(Notification n) {
  std::lock_guard lock(mu_);
  sent_.push_back(std::move(n));
  return sent_.size();
}

std::vector<Notification> RecordingNotifier::sent() const {
  std::lock_guard lock(mu_);
  return sent_;
}

}  // namespace lotwatch::notify
