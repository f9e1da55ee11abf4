#include "mocks/mock_lmm.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "common/error.hpp"
#include "common/http.hpp"

namespace lotwatch::mocks {

namespace script {

LmmScript answer(std::string content) {
  return [content = std::move(content)](const LmmCall&) { return MockReply{200, content, {}, 0.0}; };
}

LmmScript fail_then(int failures, int status, std::string content) {
  return [=](const LmmCall& call) {
    if (call.index <= failures) return MockReply{status, {}, R"({"error":{"message":"scripted failure"}})", 0.0};
    return MockReply{200, content, {}, 0.0};
  };
}

LmmScript always_fail(int status) { return fail_then(1 << 30, status, {}); }

LmmScript malformed_body() {
  return [](const LmmCall&) { return MockReply{200, {}, R"({"unexpected":true})", 0.0}; };
}

}  // namespace script

namespace {

std::vector<std::uint8_t> image_from_body(const std::string& body) {
  try {
    const auto doc = nlohmann::json::parse(body);
    for (const auto& part : doc.at("messages").at(0).at("content")) {
      if (part.value("type", "") != "image_url") continue;
      const std::string url = part.at("image_url").at("url").get<std::string>();
      const auto comma = url.find(',');
      if (comma == std::string::npos) return {};
      const std::string raw = base64_decode(url.substr(comma + 1));
      return {raw.begin(), raw.end()};
    }
  } catch (const std::exception&) {
  }
  return {};
}

}  // namespace

struct MockLmmServer::Impl {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  mutable std::mutex mu;
  LmmScript script;
  std::vector<LmmCall> calls;
};

MockLmmServer::MockLmmServer(LmmScript script) : impl_(std::make_unique<Impl>()) {
  impl_->script = std::move(script);
  impl_->server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
    LmmCall call;
    call.body = req.body;
    call.authorization = req.get_header_value("Authorization");
    call.image_png = image_from_body(req.body);
    LmmScript s;
    {
      std::lock_guard lock(impl_->mu);
      call.index = static_cast<int>(impl_->calls.size()) + 1;
      impl_->calls.push_back(call);
      s = impl_->script;
    }
    const MockReply reply = s ? s(call) : MockReply{500, {}, "no script", 0.0};
    if (reply.delay_s > 0) std::this_thread::sleep_for(std::chrono::duration<double>(reply.delay_s));
    res.status = reply.status;
    if (!reply.raw_body.empty()) {
      res.set_content(reply.raw_body, "application/json");
    } else {
      const nlohmann::json doc = {
          {"id", "mock-" + std::to_string(call.index)},
          {"object", "chat.completion"},
          {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", reply.content}}},
                        {"finish_reason", "stop"}}}}};
      res.set_content(doc.dump(), "application/json");
    }
  });
  impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  if (impl_->port <= 0) throw Error(ErrorCode::io, "mock LMM server cannot bind a loopback port");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

MockLmmServer::~MockLmmServer() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockLmmServer::endpoint() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port) + "/v1/chat/completions";
}

int MockLmmServer::port() const { return impl_->port; }

void MockLmmServer::set_script(LmmScript script) {
  std::lock_guard lock(impl_->mu);
  impl_->script = std::move(script);
}

std::vector<LmmCall> MockLmmServer::calls() const {
  std::lock_guard lock(impl_->mu);
  return impl_->calls;
}

int MockLmmServer::call_count() const {
  std::lock_guard lock(impl_->mu);
  return static_cast<int>(impl_->calls.size());
}

void MockLmmServer::reset() {
  std::lock_guard lock(impl_->mu);
  impl_->calls.clear();
}

}  // namespace lotwatch::mocks
