#pragma once

// Deterministic Recognizer doubles for bench and patrol tests.

#include <atomic>
#include <chrono>
#include <functional>
#include <thread>

#include "recognizer/pipeline.hpp"

namespace testsupport {

// Answers with `answer(path stem, call index)`; optionally sleeps first so
// the timing harness has something to measure.
class StubRecognizer final : public lotwatch::Recognizer {
 public:
  using Answer = std::function<std::string(const std::string& stem, int call)>;

  StubRecognizer(std::string label, Answer answer, std::chrono::milliseconds delay = {},
                 std::optional<lotwatch::RoiVariant> variant = std::nullopt)
      : label_(std::move(label)), answer_(std::move(answer)), delay_(delay), variant_(variant) {}

  lotwatch::RecognitionResult recognize(const lotwatch::RecognitionInput& input) const override {
    const auto start = std::chrono::steady_clock::now();
    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    std::string stem;
    if (const auto* p = std::get_if<std::filesystem::path>(&input.source)) stem = p->stem().string();
    lotwatch::RecognitionResult r;
    r.backend = label_;
    r.raw_text = answer_(stem, calls_++);
    r.plate = lotwatch::normalize_plate(r.raw_text);
    if (!r.plate) {
      r.failure_stage = "format";
      r.failure_detail = "stub";
    }
    r.timing_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  }
  std::string summary() const override { return label_; }
  std::string model_label() const override { return label_; }
  std::optional<lotwatch::RoiVariant> variant() const override { return variant_; }

 private:
  std::string label_;
  Answer answer_;
  std::chrono::milliseconds delay_;
  std::optional<lotwatch::RoiVariant> variant_;
  mutable std::atomic<int> calls_{0};
};

}  // namespace testsupport
