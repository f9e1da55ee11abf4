#include "detection/detection.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "common/error.hpp"
#include "common/http.hpp"
#include "imaging/codec.hpp"

namespace lotwatch::detection {

std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::oracle: return "oracle";
    case DetectorKind::heuristic: return "heuristic";
    case DetectorKind::external: return "external";
  }
  return "unknown";
}

std::optional<DetectorKind> parse_detector_kind(std::string_view text) {
  if (text == "oracle") return DetectorKind::oracle;
  if (text == "heuristic") return DetectorKind::heuristic;
  if (text == "external") return DetectorKind::external;
  return std::nullopt;
}

double iou(const DetectionBox& a, const DetectionBox& b) {
  const long long ix0 = std::max(a.x, b.x);
  const long long iy0 = std::max(a.y, b.y);
  const long long ix1 = std::min<long long>(static_cast<long long>(a.x) + a.w, static_cast<long long>(b.x) + b.w);
  const long long iy1 = std::min<long long>(static_cast<long long>(a.y) + a.h, static_cast<long long>(b.y) + b.h);
  const long long inter = (ix1 > ix0 && iy1 > iy0) ? (ix1 - ix0) * (iy1 - iy0) : 0;
  const long long uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::filesystem::path sidecar_path(const std::filesystem::path& image_path) {
  auto p = image_path;
  p.replace_extension(".box");
  return p;
}

void write_sidecar(const std::filesystem::path& image_path, const DetectionBox& box) {
  const auto path = sidecar_path(image_path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write annotation " + path.string());
  out << box.x << ' ' << box.y << ' ' << box.w << ' ' << box.h << '\n';
}

DetectionBox read_sidecar(const std::filesystem::path& image_path) {
  const auto path = sidecar_path(image_path);
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::not_found, "missing annotation file " + path.string());
  DetectionBox box;
  std::string extra;
  if (!(in >> box.x >> box.y >> box.w >> box.h) || box.w <= 0 || box.h <= 0 || box.x < 0 ||
      box.y < 0 || (in >> extra)) {
    throw Error(ErrorCode::decode, "malformed annotation file " + path.string());
  }
  box.confidence = 1.0;
  return box;
}

DetectionBox detect_oracle(const DetectionBox& annotation) {
  DetectionBox box = annotation;
  box.confidence = 1.0;
  return box;
}

DetectionBox detect_heuristic(const Image& img, const HeuristicParams& params) {
  const Image bin = imaging::otsu_binarize(img);
  const int w = bin.width(), h = bin.height();
  std::vector<long> rows(static_cast<std::size_t>(h), 0), cols(static_cast<std::size_t>(w), 0);
  long dark_total = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (bin.at(x, y) == 0) {
        ++rows[static_cast<std::size_t>(y)];
        ++cols[static_cast<std::size_t>(x)];
        ++dark_total;
      }
    }
  }
  // A uniform image thresholds to all-dark; that is no plate either.
  if (dark_total == 0 || dark_total == static_cast<long>(bin.pixel_count())) {
    throw Error(ErrorCode::unreadable, "no plate found");
  }

  auto span_above_cutoff = [&](const std::vector<long>& profile) {
    const long peak = *std::max_element(profile.begin(), profile.end());
    const double cutoff = params.density_cutoff * static_cast<double>(peak);
    int first = -1, last = -1;
    for (int i = 0; i < static_cast<int>(profile.size()); ++i) {
      if (static_cast<double>(profile[static_cast<std::size_t>(i)]) > cutoff) {
        if (first < 0) first = i;
        last = i;
      }
    }
    return std::pair{first, last};
  };
  const auto [x0, x1] = span_above_cutoff(cols);
  const auto [y0, y1] = span_above_cutoff(rows);

  const DetectionBox padded{x0 - params.padding, y0 - params.padding,
                            x1 - x0 + 1 + 2 * params.padding, y1 - y0 + 1 + 2 * params.padding, 0.0};
  auto box = imaging::clamp_box(padded, w, h);
  if (!box) throw Error(ErrorCode::unreadable, "no plate found");

  long inside = 0;
  for (int y = box->y; y < box->y + box->h; ++y) {
    for (int x = box->x; x < box->x + box->w; ++x) inside += bin.at(x, y) == 0 ? 1 : 0;
  }
  box->confidence = static_cast<double>(inside) / static_cast<double>(dark_total);
  return *box;
}

DetectionBox OracleDetector::detect(const Image&, const DetectContext& ctx) const {
  if (ctx.annotation) return detect_oracle(*ctx.annotation);
  if (ctx.source) return detect_oracle(read_sidecar(*ctx.source));
  throw Error(ErrorCode::not_found, "oracle detector needs an annotation but none was supplied");
}

DetectionBox HeuristicDetector::detect(const Image& img, const DetectContext&) const {
  return detect_heuristic(img, params_);
}

DetectionBox ExternalDetector::detect(const Image& img, const DetectContext&) const {
  const auto png = imaging::encode_png(img);
  const auto res = http_post(url_, std::string(png.begin(), png.end()), "image/png", {}, timeout_s_);
  if (!res.transport_ok()) throw Error(ErrorCode::upstream, "external detector: " + res.transport_error);
  if (res.status < 200 || res.status >= 300) {
    throw Error(ErrorCode::upstream, "external detector answered HTTP " + std::to_string(res.status));
  }
  try {
    const auto doc = nlohmann::json::parse(res.body);
    DetectionBox box{doc.at("x").get<int>(), doc.at("y").get<int>(), doc.at("w").get<int>(),
                     doc.at("h").get<int>(), doc.value("confidence", 1.0)};
    if (box.w <= 0 || box.h <= 0) throw Error(ErrorCode::unreadable, "no plate found");
    return box;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::upstream, std::string("external detector: bad response: ") + e.what());
  }
}

}  // namespace lotwatch::detection
