#include "mocks/mock_webhook.hpp"

#include <mutex>
#include <thread>

#include <httplib.h>

#include "common/error.hpp"

namespace lotwatch::mocks {

struct MockWebhookServer::Impl {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  mutable std::mutex mu;
  std::vector<int> statuses;
  std::vector<WebhookCall> calls;
};

MockWebhookServer::MockWebhookServer(std::vector<int> statuses) : impl_(std::make_unique<Impl>()) {
  impl_->statuses = std::move(statuses);
  impl_->server.Post("/v2/bot/message/push", [this](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(impl_->mu);
    const auto& st = impl_->statuses;
    const std::size_t i = impl_->calls.size();
    const int status = st.empty() ? 200 : st[std::min(i, st.size() - 1)];
    impl_->calls.push_back({req.body, req.get_header_value("Authorization"), status});
    res.status = status;
    res.set_content("{}", "application/json");
  });
  impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  if (impl_->port <= 0) throw Error(ErrorCode::io, "mock webhook server cannot bind a loopback port");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

MockWebhookServer::~MockWebhookServer() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockWebhookServer::url() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port) + "/v2/bot/message/push";
}

int MockWebhookServer::port() const { return impl_->port; }

void MockWebhookServer::set_statuses(std::vector<int> statuses) {
  std::lock_guard lock(impl_->mu);
  impl_->statuses = std::move(statuses);
}

std::vector<WebhookCall> MockWebhookServer::calls() const {
  std::lock_guard lock(impl_->mu);
  return impl_->calls;
}

std::vector<std::string> MockWebhookServer::delivered_bodies() const {
  std::lock_guard lock(impl_->mu);
  std::vector<std::string> out;
  for (const auto& c : impl_->calls) {
    if (c.replied >= 200 && c.replied < 300) out.push_back(c.body);
  }
  return out;
}

void MockWebhookServer::reset() {
  std::lock_guard lock(impl_->mu);
  impl_->calls.clear();
}

}  // namespace lotwatch::mocks
