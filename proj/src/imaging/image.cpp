#include "imaging/image.hpp"

#include <algorithm>
#include <string>

#include "common/error.hpp"

namespace lotwatch {

namespace {

void check_shape(int width, int height, int channels) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::invalid_argument, "image dimensions must be positive");
  }
  if (channels != 1 && channels != 3) {
    throw Error(ErrorCode::invalid_argument,
                "image must have 1 or 3 channels, got " + std::to_string(channels));
  }
}

}  // namespace

Image::Image(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  data_.assign(pixel_count() * static_cast<std::size_t>(channels), 0);
}

Image::Image(int width, int height, int channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
  check_shape(width, height, channels);
  if (data_.size() != pixel_count() * static_cast<std::size_t>(channels)) {
    throw Error(ErrorCode::invalid_argument, "sample count does not match image shape");
  }
}

Image Image::filled(int width, int height, int channels, std::uint8_t value) {
  Image img(width, height, channels);
  std::fill(img.data_.begin(), img.data_.end(), value);
  return img;
}

namespace imaging {

Image to_grayscale(const Image& rgb) {
  if (rgb.channels() != 3) {
    throw Error(ErrorCode::invalid_argument, "to_grayscale expects a 3-channel image");
  }
  Image gray(rgb.width(), rgb.height(), 1);
  const auto src = rgb.data();
  auto dst = gray.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const unsigned r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
    const unsigned v = (299 * r + 587 * g + 114 * b + 500) / 1000;
    dst[i] = static_cast<std::uint8_t>(std::min(v, 255U));
  }
  return gray;
}

Image ensure_gray(const Image& img) {
  return img.channels() == 1 ? img : to_grayscale(img);
}

Histogram256 histogram(const Image& gray) {
  if (gray.channels() != 1) {
    throw Error(ErrorCode::invalid_argument, "histogram expects a 1-channel image");
  }
  Histogram256 h;
  for (auto v : gray.data()) ++h.counts[v];
  h.total = gray.pixel_count();
  return h;
}

int otsu_threshold(const Histogram256& hist) {
  if (hist.total == 0) {
    throw Error(ErrorCode::invalid_argument, "otsu_threshold on an empty histogram");
  }
  // sigma_b^2(t) = (S0 * N - S * n0)^2 / (N^2 * n0 * n1); the N^2 factor is
  // common to every t and dropped. The difference is formed exactly in
  // 128-bit integers before the division.
  const auto n_total = static_cast<__int128>(hist.total);
  __int128 s_total = 0;
  for (int v = 0; v < 256; ++v) s_total += static_cast<__int128>(hist.counts[v]) * v;

  __int128 n0 = 0;
  __int128 s0 = 0;
  long double best = 0.0L;
  int best_t = -1;
  for (int t = 0; t < 256; ++t) {
    n0 += hist.counts[t];
    s0 += static_cast<__int128>(hist.counts[t]) * t;
    const __int128 n1 = n_total - n0;
    if (n0 == 0 || n1 == 0) continue;
    const auto diff = static_cast<long double>(s0 * n_total - s_total * n0);
    const long double score =
        diff * diff / (static_cast<long double>(n0) * static_cast<long double>(n1));
    if (score > best) {
      best = score;
      best_t = t;
    }
  }
  if (best_t >= 0) return best_t;
  // Only one populated bin.
  for (int v = 0; v < 256; ++v) {
    if (hist.counts[v] != 0) return v;
  }
  return 0;
}

Image binarize(const Image& gray, int threshold) {
  if (gray.channels() != 1) {
    throw Error(ErrorCode::invalid_argument, "binarize expects a 1-channel image");
  }
  Image out(gray.width(), gray.height(), 1);
  const auto src = gray.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = static_cast<int>(src[i]) > threshold ? 255 : 0;
  }
  return out;
}

Image otsu_binarize(const Image& img) {
  Image gray = ensure_gray(img);
  const int t = otsu_threshold(histogram(gray));
  return binarize(gray, t);
}

std::optional<DetectionBox> clamp_box(const DetectionBox& box, int width, int height) {
  const long long x0 = std::max<long long>(box.x, 0);
  const long long y0 = std::max<long long>(box.y, 0);
  const long long x1 = std::min<long long>(static_cast<long long>(box.x) + box.w, width);
  const long long y1 = std::min<long long>(static_cast<long long>(box.y) + box.h, height);
  if (x1 <= x0 || y1 <= y0) return std::nullopt;
  return DetectionBox{static_cast<int>(x0), static_cast<int>(y0), static_cast<int>(x1 - x0),
                      static_cast<int>(y1 - y0), box.confidence};
}

Image crop(const Image& img, const DetectionBox& box) {
  const auto clamped = clamp_box(box, img.width(), img.height());
  if (!clamped) throw Error(ErrorCode::invalid_argument, "crop box has zero area after clamping");
  const int c = img.channels();
  Image out(clamped->w, clamped->h, c);
  const auto src = img.data();
  auto dst = out.data();
  const auto row_bytes = static_cast<std::size_t>(clamped->w) * static_cast<std::size_t>(c);
  for (int y = 0; y < clamped->h; ++y) {
    const auto src_off = (static_cast<std::size_t>(clamped->y + y) * static_cast<std::size_t>(img.width()) +
                          static_cast<std::size_t>(clamped->x)) * static_cast<std::size_t>(c);
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(src_off), row_bytes,
                dst.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(y) * row_bytes));
  }
  return out;
}

}  // namespace imaging
}  // namespace lotwatch
