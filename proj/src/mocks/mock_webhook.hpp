#pragma once

#include <memory>
#include <string>
#include <vector>

namespace lotwatch::mocks {

struct WebhookCall {
  std::string body;
  std::string authorization;
  int replied = 0;
};

// Loopback push endpoint at http://127.0.0.1:<port>/v2/bot/message/push.
// Replies follow `statuses` in order; once exhausted, the last one repeats
// (an empty list means always 200).
class MockWebhookServer {
 public:
  explicit MockWebhookServer(std::vector<int> statuses = {});
  ~MockWebhookServer();
  MockWebhookServer(const MockWebhookServer&) = delete;
  MockWebhookServer& operator=(const MockWebhookServer&) = delete;

  std::string url() const;
  int port() const;

  void set_statuses(std::vector<int> statuses);
  std::vector<WebhookCall> calls() const;
  // Bodies of requests answered with 2xx, in arrival order.
  std::vector<std::string> delivered_bodies() const;
  void reset();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lotwatch::mocks
