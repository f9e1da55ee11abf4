#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace lotwatch::synth {

inline constexpr int kGlyphCols = 16;
inline constexpr int kGlyphRows = 24;
inline constexpr int kGlyphCells = kGlyphCols * kGlyphRows;

// Row-major cells, 1 = ink.
using GlyphBitmap = std::array<std::uint8_t, kGlyphCells>;

// The 36 plate characters in character-code order; index into the atlas.
inline constexpr std::string_view kPlateAlphabet = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";

// Built-in block font shared by the renderer and the template matcher.
//
// Every glyph's ink touches all four edges of its 16x24 cell grid and leaves
// no empty column, so a tight crop of a rendered glyph resamples back to
// exactly its bitmap.
class GlyphAtlas {
 public:
  explicit GlyphAtlas(int cell_size = 3);

  int cell_size() const noexcept { return cell_size_; }

  bool contains(char c) const noexcept;
  // Throws Error(invalid_argument) for characters outside the alphabet.
  const GlyphBitmap& glyph(char c) const;
  const GlyphBitmap& glyph_at(std::size_t index) const { return glyphs_[index]; }
  static constexpr std::size_t size() { return kPlateAlphabet.size(); }

 private:
  int cell_size_;
  std::array<GlyphBitmap, 36> glyphs_{};
};

}  // namespace lotwatch::synth
