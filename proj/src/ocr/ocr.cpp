#include "ocr/ocr.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <memory>

#include "common/error.hpp"
#include "common/http.hpp"
#include "imaging/codec.hpp"

namespace lotwatch::ocr {

using synth::kGlyphCells;
using synth::kGlyphCols;
using synth::kGlyphRows;

std::vector<Segment> segment_characters(const Image& binary_roi) {
  if (binary_roi.channels() != 1) {
    throw Error(ErrorCode::invalid_argument, "segment_characters expects a 1-channel ROI");
  }
  const int w = binary_roi.width(), h = binary_roi.height();
  std::size_t dark = 0;
  for (auto v : binary_roi.data()) {
    if (v != 0 && v != 255) throw Error(ErrorCode::invalid_argument, "segment_characters expects a binary ROI");
    dark += v == 0 ? 1 : 0;
  }
  const bool invert = 2 * dark > binary_roi.pixel_count();
  auto is_ink = [&](int x, int y) { return (binary_roi.at(x, y) == 0) != invert; };

  std::vector<int> col_ink(static_cast<std::size_t>(w), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) col_ink[static_cast<std::size_t>(x)] += is_ink(x, y) ? 1 : 0;
  }

  std::vector<std::pair<int, int>> runs;
  for (int x = 0; x < w;) {
    if (col_ink[static_cast<std::size_t>(x)] == 0) {
      ++x;
      continue;
    }
    const int start = x;
    while (x < w && col_ink[static_cast<std::size_t>(x)] > 0) ++x;
    runs.emplace_back(start, x);
  }
  if (runs.empty()) throw Error(ErrorCode::unreadable, "no characters");

  std::vector<int> widths;
  for (const auto& [a, b] : runs) widths.push_back(b - a);
  std::nth_element(widths.begin(), widths.begin() + static_cast<std::ptrdiff_t>(widths.size() / 2), widths.end());
  const double min_width = 0.1 * widths[widths.size() / 2];

  std::vector<Segment> out;
  for (const auto& [a, b] : runs) {
    const int seg_w = b - a;
    if (seg_w < min_width) continue;
    int top = h, bottom = -1;
    for (int y = 0; y < h; ++y) {
      for (int x = a; x < b; ++x) {
        if (is_ink(x, y)) {
          top = std::min(top, y);
          bottom = std::max(bottom, y);
          break;
        }
      }
    }
    const int seg_h = bottom - top + 1;
    Segment seg{a, b, {}};
    for (int r = 0; r < kGlyphRows; ++r) {
      const int sy = top + ((2 * r + 1) * seg_h) / (2 * kGlyphRows);
      for (int c = 0; c < kGlyphCols; ++c) {
        const int sx = a + ((2 * c + 1) * seg_w) / (2 * kGlyphCols);
        seg.bitmap[static_cast<std::size_t>(r * kGlyphCols + c)] = is_ink(sx, sy) ? 1 : 0;
      }
    }
    out.push_back(seg);
  }
  if (out.empty()) throw Error(ErrorCode::unreadable, "no characters");
  return out;
}

GlyphMatch match_glyph(const synth::GlyphBitmap& bitmap, const synth::GlyphAtlas& atlas) {
  GlyphMatch best;
  int best_score = -1;
  for (std::size_t i = 0; i < synth::GlyphAtlas::size(); ++i) {
    const auto& g = atlas.glyph_at(i);
    int score = 0;
    for (int k = 0; k < kGlyphCells; ++k) score += g[static_cast<std::size_t>(k)] == bitmap[static_cast<std::size_t>(k)];
    if (score > best_score) {
      best_score = score;
      best.ch = synth::kPlateAlphabet[i];
    }
  }
  best.confidence = static_cast<double>(best_score) / kGlyphCells;
  return best;
}

OcrReading recognize_text(const Image& roi, const synth::GlyphAtlas& atlas) {
  const auto segments = segment_characters(imaging::otsu_binarize(roi));
  OcrReading reading;
  for (const auto& seg : segments) {
    const auto m = match_glyph(seg.bitmap, atlas);
    reading.text.push_back(m.ch);
    reading.per_char_confidence.push_back(m.confidence);
  }
  return reading;
}

std::string_view to_string(OcrKind kind) {
  return kind == OcrKind::baseline ? "baseline" : "external";
}

std::optional<OcrKind> parse_ocr_kind(std::string_view text) {
  if (text == "baseline") return OcrKind::baseline;
  if (text == "external") return OcrKind::external;
  return std::nullopt;
}

namespace {

std::string first_line(const std::string& text) {
  const auto nl = text.find_first_of("\r\n");
  return nl == std::string::npos ? text : text.substr(0, nl);
}

std::string run_command(const std::string& command, const std::filesystem::path& png) {
  const std::string line = command + " '" + png.string() + "'";
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(line.c_str(), "r"), pclose);
  if (!pipe) throw Error(ErrorCode::upstream, "cannot spawn external OCR command");
  std::string out;
  char buf[256];
  while (std::fgets(buf, sizeof buf, pipe.get()) != nullptr) out += buf;
  const int status = pclose(pipe.release());
  if (status != 0) throw Error(ErrorCode::upstream, "external OCR command exited with status " + std::to_string(status));
  return out;
}

}  // namespace

OcrReading ExternalOcr::read(const Image& roi) const {
  const auto png = imaging::encode_png(roi);
  std::string answer;
  if (target_.rfind("http://", 0) == 0 || target_.rfind("https://", 0) == 0) {
    const auto res = http_post(target_, std::string(png.begin(), png.end()), "image/png", {}, timeout_s_);
    if (!res.transport_ok()) throw Error(ErrorCode::upstream, "external OCR: " + res.transport_error);
    if (res.status < 200 || res.status >= 300) {
      throw Error(ErrorCode::upstream, "external OCR answered HTTP " + std::to_string(res.status));
    }
    answer = res.body;
  } else {
    static std::atomic<unsigned> counter{0};
    const auto tmp = std::filesystem::temp_directory_path() /
                     ("lotwatch-ocr-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + ".png");
    imaging::write_file(tmp, png);
    try {
      answer = run_command(target_, tmp);
    } catch (...) {
      std::filesystem::remove(tmp);
      throw;
    }
    std::filesystem::remove(tmp);
  }
  OcrReading reading;
  reading.text = first_line(answer);
  reading.per_char_confidence.assign(reading.text.size(), 1.0);
  return reading;
}

}  // namespace lotwatch::ocr
