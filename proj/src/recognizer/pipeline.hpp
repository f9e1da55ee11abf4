#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "detection/detection.hpp"
#include "imaging/image.hpp"
#include "lmm/lmm_client.hpp"
#include "ocr/ocr.hpp"
#include "recognizer/plate.hpp"

namespace lotwatch {

enum class Backend { dual_pipeline, lmm };
enum class RoiVariant { original, gray, binary };

std::string_view to_string(Backend b);
std::string_view to_string(RoiVariant v);
std::optional<Backend> parse_backend(std::string_view text);    // "dual" | "dual_pipeline" | "lmm"
std::optional<RoiVariant> parse_variant(std::string_view text);  // "original" | "gray" | "binary" (+ "_roi")

struct PipelineConfig {
  Backend backend = Backend::dual_pipeline;
  detection::DetectorKind detector = detection::DetectorKind::heuristic;
  ocr::OcrKind ocr = ocr::OcrKind::baseline;
  // Present iff backend == dual_pipeline; the LMM reads the full image.
  std::optional<RoiVariant> variant = RoiVariant::binary;

  std::string external_detector_url;
  std::string external_ocr_target;
  double external_timeout_s = 10.0;

  static PipelineConfig dual(detection::DetectorKind det, ocr::OcrKind ocr, RoiVariant variant);
  static PipelineConfig lmm();

  // Throws Error(config) when the variant/backend pairing is inconsistent.
  void validate() const;

  // e.g. "dual/heuristic/baseline/binary_roi" or "lmm".
  std::string summary() const;
};

// {"backend": "dual"|"lmm", "detector", "ocr", "variant", "external_detector_url",
// "external_ocr"}; missing selectors take the defaults above. Throws
// Error(config) on unknown names.
PipelineConfig pipeline_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& cfg);

struct RecognitionInput {
  // File path (read + decoded inside the timed region, sidecar available),
  // encoded bytes, or an already decoded raster.
  std::variant<std::filesystem::path, std::vector<std::uint8_t>, Image> source;
  std::optional<DetectionBox> annotation;

  static RecognitionInput from_file(std::filesystem::path p) { return {std::move(p), std::nullopt}; }
  static RecognitionInput from_bytes(std::vector<std::uint8_t> b) { return {std::move(b), std::nullopt}; }
  static RecognitionInput from_image(Image img, std::optional<DetectionBox> ann = std::nullopt) {
    return {std::move(img), ann};
  }
};

struct RecognitionResult {
  std::optional<PlateString> plate;
  // "decode", "detect", "ocr", "lmm" or "format"; empty on success.
  std::string failure_stage;
  std::string failure_detail;
  std::string raw_text;
  std::string backend;
  double timing_s = 0.0;  // wall clock from input load to normalized result
  int attempts = 1;
  std::optional<DetectionBox> box;
  std::vector<double> char_confidence;
  std::optional<lmm::PhaseTiming> lmm_phases;

  bool ok() const noexcept { return plate.has_value(); }
};

// Common surface for every backend; downstream code never needs to know
// which one it holds.
class Recognizer {
 public:
  virtual ~Recognizer() = default;
  virtual RecognitionResult recognize(const RecognitionInput& input) const = 0;
  // Summary of the configuration, as recorded in results.
  virtual std::string summary() const = 0;
  // Model name used for report rows (without the ROI variant).
  virtual std::string model_label() const = 0;
  virtual std::optional<RoiVariant> variant() const { return std::nullopt; }
};

// Detector + OCR. Detection runs once per image; the ROI variant only
// changes what the OCR stage sees.
class DualPipeline final : public Recognizer {
 public:
  DualPipeline(std::shared_ptr<const detection::Detector> detector,
               std::shared_ptr<const ocr::TextRecognizer> ocr, RoiVariant variant);

  RecognitionResult recognize(const RecognitionInput& input) const override;

  // One result per requested variant, all sharing the same detection.
  // Each result's timing covers load + detection + its own variant path.
  std::vector<RecognitionResult> recognize_variants(const RecognitionInput& input,
                                                    std::span<const RoiVariant> variants) const;

  std::string summary() const override;
  std::string model_label() const override;
  std::optional<RoiVariant> variant() const override { return variant_; }

 private:
  std::shared_ptr<const detection::Detector> detector_;
  std::shared_ptr<const ocr::TextRecognizer> ocr_;
  RoiVariant variant_;
};

// Single multimodal call on the full original image.
class LmmRecognizer final : public Recognizer {
 public:
  explicit LmmRecognizer(std::shared_ptr<const lmm::LmmClient> client) : client_(std::move(client)) {}

  RecognitionResult recognize(const RecognitionInput& input) const override;
  std::string summary() const override;
  std::string model_label() const override;

 private:
  std::shared_ptr<const lmm::LmmClient> client_;
};

// ROI transform applied between detection and OCR.
Image apply_variant(const Image& roi, RoiVariant variant);

std::unique_ptr<Recognizer> make_recognizer(const PipelineConfig& cfg, const lmm::LmmConfig& lmm_cfg,
                                            Sleeper sleeper = real_sleeper());

RecognitionResult run_pipeline(const RecognitionInput& input, const PipelineConfig& cfg,
                               const lmm::LmmConfig& lmm_cfg = {});

}  // namespace lotwatch
