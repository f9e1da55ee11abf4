#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "imaging/image.hpp"

namespace lotwatch::imaging {

enum class ImageFormat { png, jpeg, unknown };

ImageFormat sniff_format(std::span<const std::uint8_t> bytes);

// PNG or JPEG, chosen by magic bytes. Gray sources decode to 1 channel,
// everything else to RGB (alpha composited onto white).
// Throws Error(decode) on unrecognized or corrupt input.
Image decode_image(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_png(const Image& img);
std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality = 90);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

Image load_image(const std::filesystem::path& path);
void save_png(const std::filesystem::path& path, const Image& img);

}  // namespace lotwatch::imaging
