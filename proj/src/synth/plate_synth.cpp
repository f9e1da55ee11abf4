#include "synth/plate_synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace lotwatch::synth {

RenderedPlate render_text(std::string_view text, const GlyphAtlas& atlas, int margin) {
  if (text.empty()) throw Error(ErrorCode::invalid_argument, "cannot render empty plate text");
  if (margin < 0) throw Error(ErrorCode::invalid_argument, "margin must be >= 0");
  for (char c : text) (void)atlas.glyph(c);

  const int cs = atlas.cell_size();
  const int n = static_cast<int>(text.size());
  const int ink_w = (n * kGlyphCols + (n - 1)) * cs;
  const int ink_h = kGlyphRows * cs;
  Image img = Image::filled(ink_w + 2 * margin, ink_h + 2 * margin, 3, 255);

  for (int i = 0; i < n; ++i) {
    const GlyphBitmap& g = atlas.glyph(text[static_cast<std::size_t>(i)]);
    const int gx = margin + i * (kGlyphCols + 1) * cs;
    for (int r = 0; r < kGlyphRows; ++r) {
      for (int c = 0; c < kGlyphCols; ++c) {
        if (!g[static_cast<std::size_t>(r * kGlyphCols + c)]) continue;
        for (int y = margin + r * cs; y < margin + (r + 1) * cs; ++y) {
          for (int x = gx + c * cs; x < gx + (c + 1) * cs; ++x) {
            for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = 0;
          }
        }
      }
    }
  }
  return {std::move(img), DetectionBox{margin, margin, ink_w, ink_h, 1.0}};
}

RenderedPlate render_plate(const PlateString& plate, const GlyphAtlas& atlas, int margin) {
  return render_text(plate.str(), atlas, margin);
}

RenderedPlate compose_scene(const RenderedPlate& plate, int canvas_width, int canvas_height, int x,
                            int y) {
  const Image& src = plate.image;
  if (x < 0 || y < 0 || x + src.width() > canvas_width || y + src.height() > canvas_height) {
    throw Error(ErrorCode::invalid_argument, "plate does not fit on the scene canvas");
  }
  Image canvas = Image::filled(canvas_width, canvas_height, src.channels(), 255);
  for (int yy = 0; yy < src.height(); ++yy) {
    for (int xx = 0; xx < src.width(); ++xx) {
      for (int c = 0; c < src.channels(); ++c) canvas.at(x + xx, y + yy, c) = src.at(xx, yy, c);
    }
  }
  DetectionBox box = plate.box;
  box.x += x;
  box.y += y;
  return {std::move(canvas), box};
}

void validate(const DegradeSpec& spec) {
  if (!(spec.noise_sigma >= 0.0)) throw Error(ErrorCode::invalid_argument, "noise_sigma must be >= 0");
  if (!(std::abs(spec.rotation_deg) <= 10.0)) {
    throw Error(ErrorCode::invalid_argument, "rotation_deg must be within [-10, 10]");
  }
  if (spec.blur_radius < 0) throw Error(ErrorCode::invalid_argument, "blur_radius must be >= 0");
}

namespace {

Image rotate(const Image& src, double degrees) {
  const int w = src.width(), h = src.height(), nc = src.channels();
  Image out(w, h, nc);
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cos_t = std::cos(theta), sin_t = std::sin(theta);
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;

  auto sample = [&](int x, int y, int c) -> double {
    if (x < 0 || y < 0 || x >= w || y >= h) return 255.0;
    return src.at(x, y, c);
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Inverse mapping: rotate the destination point by -theta.
      const double dx = x - cx, dy = y - cy;
      const double sx = cos_t * dx + sin_t * dy + cx;
      const double sy = -sin_t * dx + cos_t * dy + cy;
      const double fx = std::floor(sx), fy = std::floor(sy);
      const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
      const double ax = sx - fx, ay = sy - fy;
      for (int c = 0; c < nc; ++c) {
        const double top = sample(x0, y0, c) * (1 - ax) + sample(x0 + 1, y0, c) * ax;
        const double bottom = sample(x0, y0 + 1, c) * (1 - ax) + sample(x0 + 1, y0 + 1, c) * ax;
        const double v = top * (1 - ay) + bottom * ay;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

// Mean over the (2r+1)^2 window intersected with the image.
Image box_blur(const Image& src, int radius) {
  const int w = src.width(), h = src.height(), nc = src.channels();
  Image out(w, h, nc);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
      const int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
      const int n = (x1 - x0 + 1) * (y1 - y0 + 1);
      for (int c = 0; c < nc; ++c) {
        long sum = 0;
        for (int yy = y0; yy <= y1; ++yy) {
          for (int xx = x0; xx <= x1; ++xx) sum += src.at(xx, yy, c);
        }
        out.at(x, y, c) = static_cast<std::uint8_t>((sum + n / 2) / n);
      }
    }
  }
  return out;
}

void add_noise(Image& img, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  for (auto& v : img.data()) {
    const double noisy = v + sigma * rng.normal();
    v = static_cast<std::uint8_t>(std::clamp(std::lround(noisy), 0L, 255L));
  }
}

}  // namespace

Image degrade(const Image& img, const DegradeSpec& spec) {
  validate(spec);
  Image out = img;
  if (spec.rotation_deg != 0.0) out = rotate(out, spec.rotation_deg);
  if (spec.blur_radius > 0) out = box_blur(out, spec.blur_radius);
  if (spec.noise_sigma > 0.0) add_noise(out, spec.noise_sigma, spec.seed);
  return out;
}

}  // namespace lotwatch::synth
