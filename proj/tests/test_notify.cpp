#include <doctest.h>

#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "common/rng.hpp"
#include "mocks/mock_webhook.hpp"
#include "notify/notify.hpp"

using namespace lotwatch;
using namespace lotwatch::notify;
using registry::PatrolEvent;
using registry::Verdict;

namespace {

PatrolEvent event(std::uint64_t seq, const char* plate, const char* place, Verdict v) {
  PatrolEvent ev;
  ev.seq = seq;
  if (plate) ev.plate = *PlateString::from_normalized(plate);
  ev.captured_at = *parse_iso8601("2025-03-03T08:01:30Z");
  ev.place = place;
  ev.verdict = v;
  return ev;
}

WebhookConfig sink_for(const mocks::MockWebhookServer& mock) {
  WebhookConfig cfg;
  cfg.url = mock.url();
  cfg.recipient = "manager";
  cfg.token_env = "LW_TEST_WEBHOOK_TOKEN";
  cfg.timeout_s = 5.0;
  return cfg;
}

const Sleeper no_sleep = [](std::chrono::duration<double>) {};

}  // namespace

TEST_SUITE("notify") {

TEST_CASE("message templates") {
  const auto legal = format_message(event(1, "HPJ149", "A3", Verdict::legal), "manager");
  CHECK(legal.text == "Parking check\nPlate: HPJ149\nTime: 2025-03-03T08:01:30Z\nPlace: A3\nStatus: LEGAL");
  CHECK(legal.severity == Severity::info);
  CHECK(legal.event_seq == 1);

  const auto illegal = format_message(event(2, "ZYY714", "A2", Verdict::illegal), "manager");
  CHECK(illegal.text ==
        "\xE2\x9A\xA0 ILLEGAL PARKING\nPlate: ZYY714\nTime: 2025-03-03T08:01:30Z\nPlace: A2\n"
        "Status: ILLEGAL \xE2\x80\x94 action required");
  CHECK(illegal.severity == Severity::warning);

  auto ev = event(3, nullptr, "B2", Verdict::unreadable);
  ev.failure_reason = "detect: no plate found";
  const auto unreadable = format_message(ev, "manager");
  CHECK(unreadable.text ==
        "Parking check\nPlate: UNREADABLE (detect: no plate found)\nTime: 2025-03-03T08:01:30Z\nPlace: B2\n"
        "Status: MANUAL REVIEW");
  CHECK(unreadable.severity == Severity::info);

  const auto custom = format_message(event(4, "HPJ149", "A3", Verdict::legal), "x", [](Timestamp) { return "T"; });
  CHECK(custom.text.find("Time: T\n") != std::string::npos);
}

TEST_CASE("push body shape") {
  const Notification n{"U123", "hello\nworld", Severity::info, 7};
  const auto doc = nlohmann::json::parse(push_body(n));
  CHECK(doc.at("to") == "U123");
  CHECK(doc.at("messages").size() == 1);
  CHECK(doc.at("messages").at(0).at("type") == "text");
  CHECK(doc.at("messages").at(0).at("text") == "hello\nworld");
}

TEST_CASE("dispatch retry policy") {
  mocks::MockWebhookServer mock;
  Rng rng(1);
  const Notification n{"manager", "hi", Severity::info, 1};

  SUBCASE("200 delivers at once") {
    const auto rec = dispatch(n, sink_for(mock), no_sleep, rng);
    CHECK(rec.status == DeliveryStatus::delivered);
    CHECK(rec.attempts == 1);
    CHECK_FALSE(rec.last_error.has_value());
  }
  SUBCASE("429, 429, 200 delivers on the third attempt") {
    mock.set_statuses({429, 429, 200});
    int sleeps = 0;
    const auto rec = dispatch(n, sink_for(mock), [&](auto) { ++sleeps; }, rng);
    CHECK(rec.status == DeliveryStatus::delivered);
    CHECK(rec.attempts == 3);
    CHECK(sleeps == 2);
  }
  SUBCASE("always 500 fails after five attempts") {
    mock.set_statuses({500});
    const auto rec = dispatch(n, sink_for(mock), no_sleep, rng);
    CHECK(rec.status == DeliveryStatus::failed);
    CHECK(rec.attempts == 5);
    CHECK(rec.last_error == "HTTP 500");
    CHECK(mock.calls().size() == 5);
  }
  SUBCASE("400 is final") {
    mock.set_statuses({400});
    const auto rec = dispatch(n, sink_for(mock), no_sleep, rng);
    CHECK(rec.status == DeliveryStatus::failed);
    CHECK(rec.attempts == 1);
  }
}

TEST_CASE("bearer token is sent but never recorded") {
  mocks::MockWebhookServer mock({401});
  ::setenv("LW_TEST_WEBHOOK_TOKEN", "line-secret-token", 1);
  Rng rng(1);
  const auto rec = dispatch({"manager", "hi", Severity::info, 1}, sink_for(mock), no_sleep, rng);
  ::unsetenv("LW_TEST_WEBHOOK_TOKEN");
  CHECK(mock.calls().at(0).authorization == "Bearer line-secret-token");
  CHECK(rec.last_error->find("line-secret") == std::string::npos);
}

TEST_CASE("queue delivers in FIFO order across producers") {
  mocks::MockWebhookServer mock;
  WebhookNotifier notifier(sink_for(mock), no_sleep);
  constexpr int kProducers = 4, kEach = 15;
  std::vector<std::thread> producers;
  std::mutex order_mu;
  std::vector<std::string> enqueue_order;
  for (int p = 0; p < kProducers; ++p) {
    producers.emplace_back([&, p] {
      for (int i = 0; i < kEach; ++i) {
        const std::string text = "p" + std::to_string(p) + "-" + std::to_string(i);
        std::lock_guard lock(order_mu);  // pins enqueue order for the assertion
        notifier.enqueue({"manager", text, Severity::info, static_cast<std::uint64_t>(p * 100 + i)});
        enqueue_order.push_back(text);
      }
    });
  }
  for (auto& t : producers) t.join();
  notifier.drain();
  const auto bodies = mock.delivered_bodies();
  REQUIRE(bodies.size() == enqueue_order.size());
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    CHECK(nlohmann::json::parse(bodies[i]).at("messages").at(0).at("text") == enqueue_order[i]);
  }
  const auto recs = notifier.records();
  REQUIRE(recs.size() == bodies.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(recs[i].id == i + 1);
    CHECK(recs[i].status == DeliveryStatus::delivered);
  }
}

TEST_CASE("one failing delivery does not block the next") {
  mocks::MockWebhookServer mock({500, 500, 500, 500, 500, 200});
  WebhookNotifier notifier(sink_for(mock), no_sleep);
  notifier.enqueue({"manager", "first", Severity::warning, 1});
  notifier.enqueue({"manager", "second", Severity::info, 2});
  notifier.shutdown();
  const auto recs = notifier.records();
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].status == DeliveryStatus::failed);
  CHECK(recs[0].attempts == 5);
  CHECK(recs[1].status == DeliveryStatus::delivered);
  CHECK(recs[1].attempts == 1);
  notifier.shutdown();  // idempotent
}

TEST_CASE("recording notifier") {
  RecordingNotifier rec;
  CHECK(rec.enqueue({"m", "a", Severity::info, 1}) == 1);
  CHECK(rec.enqueue({"m", "b", Severity::warning, 2}) == 2);
  CHECK(rec.sent().size() == 2);
  CHECK(rec.sent()[1].text == "b");
}

}
