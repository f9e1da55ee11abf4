#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "imaging/image.hpp"
#include "synth/glyph_atlas.hpp"

namespace lotwatch::ocr {

struct Segment {
  int col_start = 0;  // inclusive
  int col_end = 0;    // exclusive
  synth::GlyphBitmap bitmap{};
};

struct OcrReading {
  std::string text;
  std::vector<double> per_char_confidence;
};

// Splits a binary ROI at columns with no dark pixel. Glyphs are expected
// dark; the ROI is inverted first when more than half of it is dark.
// Segments narrower than 10% of the median width are dropped. Each kept
// segment is cropped to its vertical ink extent and resampled
// (nearest-neighbor) to the atlas grid.
// Throws Error(unreadable, "no characters") when nothing remains, and
// Error(invalid_argument) when the ROI is not 1-channel {0, 255}.
std::vector<Segment> segment_characters(const Image& binary_roi);

struct GlyphMatch {
  char ch = '?';
  double confidence = 0.0;
};

// Argmax over the atlas of matching cells / total cells. Ties go to the
// lower character code.
GlyphMatch match_glyph(const synth::GlyphBitmap& bitmap, const synth::GlyphAtlas& atlas);

// Gray -> Otsu -> binarize -> segment -> match.
OcrReading recognize_text(const Image& roi, const synth::GlyphAtlas& atlas);

enum class OcrKind { baseline, external };

std::string_view to_string(OcrKind kind);
std::optional<OcrKind> parse_ocr_kind(std::string_view text);

class TextRecognizer {
 public:
  virtual ~TextRecognizer() = default;
  virtual OcrKind kind() const = 0;
  virtual OcrReading read(const Image& roi) const = 0;
};

class BaselineOcr final : public TextRecognizer {
 public:
  explicit BaselineOcr(synth::GlyphAtlas atlas = synth::GlyphAtlas{}) : atlas_(std::move(atlas)) {}
  OcrKind kind() const override { return OcrKind::baseline; }
  OcrReading read(const Image& roi) const override { return recognize_text(roi, atlas_); }

 private:
  synth::GlyphAtlas atlas_;
};

// Adapter for real OCR engines. `target` is either an http(s) URL that
// receives the ROI as a PNG POST body, or a command line that is run with
// the path of a temporary PNG appended. Either way the first line of the
// answer is the reading; every character gets confidence 1.0.
class ExternalOcr final : public TextRecognizer {
 public:
  ExternalOcr(std::string target, double timeout_s) : target_(std::move(target)), timeout_s_(timeout_s) {}
  OcrKind kind() const override { return OcrKind::external; }
  OcrReading read(const Image& roi) const override;

 private:
  std::string target_;
  double timeout_s_;
};

}  // namespace lotwatch::ocr
