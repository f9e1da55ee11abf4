#include "recognizer/pipeline.hpp"

#include <chrono>

#include "common/error.hpp"
#include "imaging/codec.hpp"

namespace lotwatch {

using clock_type = std::chrono::steady_clock;

std::string_view to_string(Backend b) { return b == Backend::dual_pipeline ? "dual" : "lmm"; }

std::string_view to_string(RoiVariant v) {
  switch (v) {
    case RoiVariant::original: return "original_roi";
    case RoiVariant::gray: return "gray_roi";
    case RoiVariant::binary: return "binary_roi";
  }
  return "original_roi";
}

std::optional<Backend> parse_backend(std::string_view text) {
  if (text == "dual" || text == "dual_pipeline") return Backend::dual_pipeline;
  if (text == "lmm") return Backend::lmm;
  return std::nullopt;
}

std::optional<RoiVariant> parse_variant(std::string_view text) {
  if (text == "original" || text == "original_roi") return RoiVariant::original;
  if (text == "gray" || text == "gray_roi") return RoiVariant::gray;
  if (text == "binary" || text == "binary_roi") return RoiVariant::binary;
  return std::nullopt;
}

PipelineConfig PipelineConfig::dual(detection::DetectorKind det, ocr::OcrKind ocr, RoiVariant variant) {
  PipelineConfig cfg;
  cfg.backend = Backend::dual_pipeline;
  cfg.detector = det;
  cfg.ocr = ocr;
  cfg.variant = variant;
  return cfg;
}

PipelineConfig PipelineConfig::lmm() {
  PipelineConfig cfg;
  cfg.backend = Backend::lmm;
  cfg.variant.reset();
  return cfg;
}

void PipelineConfig::validate() const {
  if (backend == Backend::dual_pipeline && !variant) {
    throw Error(ErrorCode::config, "dual pipeline requires an ROI variant");
  }
  if (backend == Backend::lmm && variant) {
    throw Error(ErrorCode::config, "the lmm backend reads the full image; no ROI variant applies");
  }
  if (backend == Backend::dual_pipeline && detector == detection::DetectorKind::external &&
      external_detector_url.empty()) {
    throw Error(ErrorCode::config, "external detector selected without a URL");
  }
  if (backend == Backend::dual_pipeline && ocr == ocr::OcrKind::external && external_ocr_target.empty()) {
    throw Error(ErrorCode::config, "external OCR selected without a target");
  }
}

std::string PipelineConfig::summary() const {
  if (backend == Backend::lmm) return "lmm";
  return "dual/" + std::string(detection::to_string(detector)) + "/" + std::string(ocr::to_string(ocr)) + "/" +
         std::string(to_string(*variant));
}

Image apply_variant(const Image& roi, RoiVariant variant) {
  switch (variant) {
    case RoiVariant::original: return roi;
    case RoiVariant::gray: return imaging::ensure_gray(roi);
    case RoiVariant::binary: return imaging::otsu_binarize(roi);
  }
  return roi;
}

namespace {

struct LoadedInput {
  Image image;
  detection::DetectContext ctx;
};

// Throws Error(decode / io) for unreadable inputs.
LoadedInput load_input(const RecognitionInput& input) {
  LoadedInput out;
  out.ctx.annotation = input.annotation;
  if (const auto* path = std::get_if<std::filesystem::path>(&input.source)) {
    out.image = imaging::load_image(*path);
    out.ctx.source = *path;
  } else if (const auto* bytes = std::get_if<std::vector<std::uint8_t>>(&input.source)) {
    out.image = imaging::decode_image(*bytes);
  } else {
    out.image = std::get<Image>(input.source);
  }
  return out;
}

void fail(RecognitionResult& r, std::string stage, std::string detail) {
  r.plate.reset();
  r.failure_stage = std::move(stage);
  r.failure_detail = std::move(detail);
}

void finish_with_text(RecognitionResult& r, const ocr::OcrReading& reading) {
  r.raw_text = reading.text;
  r.char_confidence = reading.per_char_confidence;
  r.plate = normalize_plate(reading.text);
  if (!r.plate) fail(r, "format", "OCR text does not normalize to a plate: '" + reading.text + "'");
}

double elapsed_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

}  // namespace

DualPipeline::DualPipeline(std::shared_ptr<const detection::Detector> detector,
                           std::shared_ptr<const ocr::TextRecognizer> ocr, RoiVariant variant)
    : detector_(std::move(detector)), ocr_(std::move(ocr)), variant_(variant) {}

std::string DualPipeline::summary() const {
  return "dual/" + std::string(detection::to_string(detector_->kind())) + "/" +
         std::string(ocr::to_string(ocr_->kind())) + "/" + std::string(to_string(variant_));
}

std::string DualPipeline::model_label() const {
  return std::string(detection::to_string(detector_->kind())) + " + " + std::string(ocr::to_string(ocr_->kind()));
}

RecognitionResult DualPipeline::recognize(const RecognitionInput& input) const {
  const RoiVariant one[] = {variant_};
  return std::move(recognize_variants(input, one).front());
}

std::vector<RecognitionResult> DualPipeline::recognize_variants(const RecognitionInput& input,
                                                                std::span<const RoiVariant> variants) const {
  const auto start = clock_type::now();
  std::vector<RecognitionResult> results(variants.size());
  for (std::size_t i = 0; i < variants.size(); ++i) {
    results[i].backend = "dual/" + std::string(detection::to_string(detector_->kind())) + "/" +
                         std::string(ocr::to_string(ocr_->kind())) + "/" + std::string(to_string(variants[i]));
  }
  auto fail_all = [&](const std::string& stage, const std::string& detail) {
    const double t = elapsed_since(start);
    for (auto& r : results) {
      fail(r, stage, detail);
      r.timing_s = t;
    }
    return results;
  };

  LoadedInput loaded;
  try {
    loaded = load_input(input);
  } catch (const std::exception& e) {
    return fail_all("decode", e.what());
  }

  DetectionBox box;
  Image roi;
  try {
    box = detector_->detect(loaded.image, loaded.ctx);
    roi = imaging::crop(loaded.image, box);
  } catch (const std::exception& e) {
    return fail_all("detect", e.what());
  }
  const auto shared_elapsed = clock_type::now() - start;

  for (std::size_t i = 0; i < variants.size(); ++i) {
    auto& r = results[i];
    const auto variant_start = clock_type::now();
    r.box = box;
    try {
      finish_with_text(r, ocr_->read(apply_variant(roi, variants[i])));
    } catch (const std::exception& e) {
      fail(r, "ocr", e.what());
    }
    r.timing_s = std::chrono::duration<double>(shared_elapsed + (clock_type::now() - variant_start)).count();
  }
  return results;
}

RecognitionResult LmmRecognizer::recognize(const RecognitionInput& input) const {
  const auto start = clock_type::now();
  RecognitionResult r;
  r.backend = summary();
  LoadedInput loaded;
  try {
    loaded = load_input(input);
  } catch (const std::exception& e) {
    fail(r, "decode", e.what());
    r.timing_s = elapsed_since(start);
    return r;
  }
  const auto resp = client_->recognize_image(loaded.image);
  r.attempts = resp.attempts;
  r.lmm_phases = resp.elapsed;
  if (!resp.call_succeeded) {
    fail(r, "lmm", resp.error);
  } else {
    r.raw_text = resp.raw_text;
    r.plate = resp.normalized;
    if (!r.plate) fail(r, "format", "model answer does not normalize to a plate: '" + resp.raw_text + "'");
  }
  r.timing_s = elapsed_since(start);
  return r;
}

std::string LmmRecognizer::summary() const { return "lmm/" + client_->config().model_id; }

std::string LmmRecognizer::model_label() const { return client_->config().model_id; }

std::unique_ptr<Recognizer> make_recognizer(const PipelineConfig& cfg, const lmm::LmmConfig& lmm_cfg,
                                            Sleeper sleeper) {
  cfg.validate();
  if (cfg.backend == Backend::lmm) {
    return std::make_unique<LmmRecognizer>(std::make_shared<lmm::LmmClient>(lmm_cfg, std::move(sleeper)));
  }
  std::shared_ptr<const detection::Detector> det;
  switch (cfg.detector) {
    case detection::DetectorKind::oracle: det = std::make_shared<detection::OracleDetector>(); break;
    case detection::DetectorKind::heuristic: det = std::make_shared<detection::HeuristicDetector>(); break;
    case detection::DetectorKind::external:
      det = std::make_shared<detection::ExternalDetector>(cfg.external_detector_url, cfg.external_timeout_s);
      break;
  }
  std::shared_ptr<const ocr::TextRecognizer> text;
  if (cfg.ocr == ocr::OcrKind::baseline) {
    text = std::make_shared<ocr::BaselineOcr>();
  } else {
    text = std::make_shared<ocr::ExternalOcr>(cfg.external_ocr_target, cfg.external_timeout_s);
  }
  return std::make_unique<DualPipeline>(std::move(det), std::move(text), *cfg.variant);
}

RecognitionResult run_pipeline(const RecognitionInput& input, const PipelineConfig& cfg,
                               const lmm::LmmConfig& lmm_cfg) {
  return make_recognizer(cfg, lmm_cfg)->recognize(input);
}

PipelineConfig pipeline_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::config, "pipeline selection must be an object");
  PipelineConfig cfg;
  const auto backend = parse_backend(j.value("backend", "dual"));
  if (!backend) throw Error(ErrorCode::config, "backend must be dual or lmm");
  if (*backend == Backend::lmm) {
    cfg = PipelineConfig::lmm();
  } else {
    const auto det = detection::parse_detector_kind(j.value("detector", "heuristic"));
    if (!det) throw Error(ErrorCode::config, "detector must be oracle, heuristic or external");
    const auto ocr_kind = ocr::parse_ocr_kind(j.value("ocr", "baseline"));
    if (!ocr_kind) throw Error(ErrorCode::config, "ocr must be baseline or external");
    const auto variant = parse_variant(j.value("variant", "binary"));
    if (!variant) throw Error(ErrorCode::config, "variant must be original, gray or binary");
    cfg = PipelineConfig::dual(*det, *ocr_kind, *variant);
  }
  cfg.external_detector_url = j.value("external_detector_url", "");
  cfg.external_ocr_target = j.value("external_ocr", "");
  cfg.external_timeout_s = j.value("external_timeout_s", cfg.external_timeout_s);
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const PipelineConfig& cfg) {
  nlohmann::json j = {{"backend", std::string(to_string(cfg.backend))}};
  if (cfg.backend == Backend::dual_pipeline) {
    j["detector"] = std::string(detection::to_string(cfg.detector));
    j["ocr"] = std::string(ocr::to_string(cfg.ocr));
    if (cfg.variant) j["variant"] = std::string(to_string(*cfg.variant));
  }
  if (!cfg.external_detector_url.empty()) j["external_detector_url"] = cfg.external_detector_url;
  if (!cfg.external_ocr_target.empty()) j["external_ocr"] = cfg.external_ocr_target;
  return j;
}

}  // namespace lotwatch
