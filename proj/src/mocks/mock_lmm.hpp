#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace lotwatch::mocks {

// What the mock sends back for one request.
struct MockReply {
  int status = 200;
  std::string content;     // becomes choices[0].message.content on 200
  std::string raw_body;    // when non-empty, sent verbatim instead
  double delay_s = 0.0;
};

struct LmmCall {
  int index = 0;  // 1-based arrival order
  std::string body;
  std::string authorization;
  std::vector<std::uint8_t> image_png;  // decoded from the data URL, empty if absent
};

using LmmScript = std::function<MockReply(const LmmCall&)>;

namespace script {
LmmScript answer(std::string content);
// `failures` replies with `status` (429 or 5xx), then answers.
LmmScript fail_then(int failures, int status, std::string content);
LmmScript always_fail(int status);
// 200 with a body that is not a chat-completions document.
LmmScript malformed_body();
}  // namespace script

// Loopback chat-completions endpoint at http://127.0.0.1:<port>/v1/chat/completions.
class MockLmmServer {
 public:
  explicit MockLmmServer(LmmScript script);
  ~MockLmmServer();
  MockLmmServer(const MockLmmServer&) = delete;
  MockLmmServer& operator=(const MockLmmServer&) = delete;

  std::string endpoint() const;
  int port() const;

  void set_script(LmmScript script);
  std::vector<LmmCall> calls() const;
  int call_count() const;
  void reset();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lotwatch::mocks
