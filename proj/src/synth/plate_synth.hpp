#pragma once

#include <cstdint>
#include <string_view>

#include "imaging/image.hpp"
#include "recognizer/plate.hpp"
#include "synth/glyph_atlas.hpp"

namespace lotwatch::synth {

struct RenderedPlate {
  Image image;        // RGB, white background, black glyphs
  DetectionBox box;   // exact ink bounding box
};

// Lays glyphs left to right with a one-cell gap and `margin` pixels of
// white around the ink. Dimensions depend only on text length, cell size
// and margin.
RenderedPlate render_plate(const PlateString& plate, const GlyphAtlas& atlas, int margin);

// Same as render_plate for arbitrary text; throws Error(invalid_argument)
// on characters outside the atlas or empty text.
RenderedPlate render_text(std::string_view text, const GlyphAtlas& atlas, int margin);

// Pastes `plate` onto a white canvas with its top-left at (x, y). The
// canvas must fully contain the plate.
RenderedPlate compose_scene(const RenderedPlate& plate, int canvas_width, int canvas_height, int x,
                            int y);

struct DegradeSpec {
  double noise_sigma = 0.0;   // gray levels, >= 0
  double rotation_deg = 0.0;  // |theta| <= 10
  int blur_radius = 0;        // pixels, >= 0
  std::uint64_t seed = 0;

  bool is_identity() const { return noise_sigma == 0.0 && rotation_deg == 0.0 && blur_radius == 0; }
};

// Throws Error(invalid_argument) on out-of-range parameters.
void validate(const DegradeSpec& spec);

// Rotation about the center (bilinear, white fill), then box blur, then
// seeded additive Gaussian noise clamped to [0, 255]. Deterministic in
// (img, spec); an all-zero spec returns the input unchanged.
Image degrade(const Image& img, const DegradeSpec& spec);

}  // namespace lotwatch::synth
