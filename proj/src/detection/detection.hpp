#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "imaging/image.hpp"

namespace lotwatch::detection {

enum class DetectorKind { oracle, heuristic, external };

std::string_view to_string(DetectorKind kind);
std::optional<DetectorKind> parse_detector_kind(std::string_view text);

// |a ∩ b| / |a ∪ b|; a degenerate box scores 0.
double iou(const DetectionBox& a, const DetectionBox& b);

// ---- sidecar annotations: one line "x y w h" in <image>.box --------------

std::filesystem::path sidecar_path(const std::filesystem::path& image_path);
void write_sidecar(const std::filesystem::path& image_path, const DetectionBox& box);
// Throws Error(not_found) naming the expected path when the file is absent,
// Error(decode) when it does not hold four integers with positive w and h.
DetectionBox read_sidecar(const std::filesystem::path& image_path);

// Annotation pass-through with confidence 1.0.
DetectionBox detect_oracle(const DetectionBox& annotation);

struct HeuristicParams {
  double density_cutoff = 0.05;  // fraction of the peak row/column count
  int padding = 2;
};

// Projection-profile detector: gray -> Otsu -> binarize, then the tightest
// box spanning rows and columns whose dark count exceeds cutoff * peak,
// padded and clamped. Confidence is the share of dark pixels inside the box.
// Throws Error(unreadable, "no plate found") when the image has no dark mass.
DetectionBox detect_heuristic(const Image& img, const HeuristicParams& params = {});

struct DetectContext {
  std::optional<std::filesystem::path> source;  // for sidecar lookup
  std::optional<DetectionBox> annotation;       // in-memory annotation
};

class Detector {
 public:
  virtual ~Detector() = default;
  virtual DetectorKind kind() const = 0;
  virtual DetectionBox detect(const Image& img, const DetectContext& ctx) const = 0;
};

class OracleDetector final : public Detector {
 public:
  DetectorKind kind() const override { return DetectorKind::oracle; }
  DetectionBox detect(const Image& img, const DetectContext& ctx) const override;
};

class HeuristicDetector final : public Detector {
 public:
  explicit HeuristicDetector(HeuristicParams params = {}) : params_(params) {}
  DetectorKind kind() const override { return DetectorKind::heuristic; }
  DetectionBox detect(const Image& img, const DetectContext& ctx) const override;

 private:
  HeuristicParams params_;
};

// Forwards PNG bytes to an HTTP detector answering {x, y, w, h, confidence}.
class ExternalDetector final : public Detector {
 public:
  ExternalDetector(std::string url, double timeout_s) : url_(std::move(url)), timeout_s_(timeout_s) {}
  DetectorKind kind() const override { return DetectorKind::external; }
  DetectionBox detect(const Image& img, const DetectContext& ctx) const override;

 private:
  std::string url_;
  double timeout_s_;
};

}  // namespace lotwatch::detection
