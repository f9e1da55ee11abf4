#include "synth/glyph_atlas.hpp"

#include <string>

#include "common/error.hpp"

namespace lotwatch::synth {

namespace {

// 5x7 design grid, expanded to 16x24 cells with uneven block sizes.
constexpr int kDesignCols = 5;
constexpr int kDesignRows = 7;
constexpr std::array<int, kDesignCols> kColWidths = {3, 3, 4, 3, 3};
constexpr std::array<int, kDesignRows> kRowHeights = {3, 3, 4, 4, 4, 3, 3};

struct Design {
  char ch;
  const char* rows[kDesignRows];
};

constexpr Design kDesigns[] = {
    {'0', {".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."}},
    {'1', {"..#..", ".##..", "#.#..", "..#..", "..#..", "..#..", "#####"}},
    {'2', {".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"}},
    {'3', {"#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###."}},
    {'4', {"...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."}},
    {'5', {"#####", "#....", "####.", "....#", "....#", "#...#", ".###."}},
    {'6', {"..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###."}},
    {'7', {"#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."}},
    {'8', {".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."}},
    {'9', {".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##.."}},
    {'A', {".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
    {'B', {"####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."}},
    {'C', {".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."}},
    {'D', {"####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."}},
    {'E', {"#####", "#....", "#....", "####.", "#....", "#....", "#####"}},
    {'F', {"#####", "#....", "#....", "####.", "#....", "#....", "#...."}},
    {'G', {".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"}},
    {'H', {"#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"}},
    {'I', {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "#####"}},
    {'J', {"..###", "...#.", "...#.", "...#.", "#..#.", "#..#.", ".##.."}},
    {'K', {"#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"}},
    {'L', {"#....", "#....", "#....", "#....", "#....", "#....", "#####"}},
    {'M', {"#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"}},
    {'N', {"#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#", "#...#"}},
    {'O', {".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
    {'P', {"####.", "#...#", "#...#", "####.", "#....", "#....", "#...."}},
    {'Q', {".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"}},
    {'R', {"####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"}},
    {'S', {".####", "#....", "#....", ".###.", "....#", "....#", "####."}},
    {'T', {"#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."}},
    {'U', {"#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."}},
    {'V', {"#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."}},
    {'W', {"#...#", "#...#", "#...#", "#.#.#", "#.#.#", "##.##", "#...#"}},
    {'X', {"#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"}},
    {'Y', {"#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."}},
    {'Z', {"#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"}},
};

GlyphBitmap expand(const Design& d) {
  GlyphBitmap bm{};
  int y0 = 0;
  for (int r = 0; r < kDesignRows; ++r) {
    int x0 = 0;
    for (int c = 0; c < kDesignCols; ++c) {
      if (d.rows[r][c] == '#') {
        for (int y = y0; y < y0 + kRowHeights[r]; ++y) {
          for (int x = x0; x < x0 + kColWidths[c]; ++x) bm[y * kGlyphCols + x] = 1;
        }
      }
      x0 += kColWidths[c];
    }
    y0 += kRowHeights[r];
  }
  return bm;
}

}  // namespace

GlyphAtlas::GlyphAtlas(int cell_size) : cell_size_(cell_size) {
  if (cell_size < 1) throw Error(ErrorCode::invalid_argument, "atlas cell size must be >= 1");
  static_assert(std::size(kDesigns) == 36);
  for (const auto& d : kDesigns) {
    glyphs_[kPlateAlphabet.find(d.ch)] = expand(d);
  }
}

bool GlyphAtlas::contains(char c) const noexcept {
  return kPlateAlphabet.find(c) != std::string_view::npos;
}

const GlyphBitmap& GlyphAtlas::glyph(char c) const {
  const auto idx = kPlateAlphabet.find(c);
  if (idx == std::string_view::npos) {
    throw Error(ErrorCode::invalid_argument, std::string("character not in glyph atlas: '") + c + "'");
  }
  return glyphs_[idx];
}

}  // namespace lotwatch::synth
