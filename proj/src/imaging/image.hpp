#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace lotwatch {

// Owned 8-bit raster, row-major, interleaved channels (1 = gray, 3 = RGB).
class Image {
 public:
  Image() = default;
  // Zero-filled raster.
  Image(int width, int height, int channels);
  // Takes ownership of samples; throws Error(invalid_argument) if the length
  // does not equal width * height * channels.
  Image(int width, int height, int channels, std::vector<std::uint8_t> data);

  static Image filled(int width, int height, int channels, std::uint8_t value);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  std::uint8_t at(int x, int y, int c = 0) const noexcept {
    return data_[index(x, y, c)];
  }
  std::uint8_t& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
};

// Axis-aligned plate region in pixel coordinates.
struct DetectionBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  double confidence = 1.0;

  long long area() const noexcept { return static_cast<long long>(w) * h; }
  bool operator==(const DetectionBox&) const = default;
};

struct Histogram256 {
  std::array<std::uint64_t, 256> counts{};
  std::uint64_t total = 0;

  void add(std::uint8_t value, std::uint64_t n = 1) {
    counts[value] += n;
    total += n;
  }
};

namespace imaging {

// Luma conversion round(0.299 R + 0.587 G + 0.114 B) in exact integer
// arithmetic. Rejects 1-channel input.
Image to_grayscale(const Image& rgb);

// Identity on gray input, to_grayscale on RGB.
Image ensure_gray(const Image& img);

Histogram256 histogram(const Image& gray);

// Otsu's threshold: the t maximizing between-class variance with class 0 =
// [0, t] and class 1 = [t+1, 255]. Ties resolve to the smallest t. When every
// t scores zero (a single populated bin) the populated bin is returned.
// Throws Error(invalid_argument) on an empty histogram.
int otsu_threshold(const Histogram256& hist);

// pixel > t -> 255, otherwise 0.
Image binarize(const Image& gray, int threshold);

// Gray + Otsu + binarize in one step.
Image otsu_binarize(const Image& img);

// Intersects the box with the image bounds; nullopt when nothing is left.
std::optional<DetectionBox> clamp_box(const DetectionBox& box, int width, int height);

// Sub-raster under the clamped box. Throws Error(invalid_argument) when the
// clamped box has zero area.
Image crop(const Image& img, const DetectionBox& box);

}  // namespace imaging
}  // namespace lotwatch
