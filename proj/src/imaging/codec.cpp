#include "imaging/codec.hpp"

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <cstdio>
#include <jpeglib.h>

#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "common/error.hpp"

namespace lotwatch::imaging {

ImageFormat sniff_format(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t png_magic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), png_magic, 8) == 0) return ImageFormat::png;
  if (bytes.size() >= 3 && bytes[0] == 0xff && bytes[1] == 0xd8 && bytes[2] == 0xff) {
    return ImageFormat::jpeg;
  }
  return ImageFormat::unknown;
}

namespace {

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image pimg;
  std::memset(&pimg, 0, sizeof pimg);
  pimg.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&pimg, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::decode, std::string("png: ") + pimg.message);
  }
  const bool gray = (pimg.format & PNG_FORMAT_FLAG_COLOR) == 0;
  pimg.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const int channels = gray ? 1 : 3;
  const auto w = static_cast<int>(pimg.width);
  const auto h = static_cast<int>(pimg.height);
  if (w <= 0 || h <= 0) {
    png_image_free(&pimg);
    throw Error(ErrorCode::decode, "png: empty image");
  }
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(pimg), 0xff);
  png_color white{255, 255, 255};
  if (!png_image_finish_read(&pimg, &white, buf.data(), 0, nullptr)) {
    std::string msg = pimg.message;
    png_image_free(&pimg);
    throw Error(ErrorCode::decode, "png: " + msg);
  }
  return Image(w, h, channels, std::move(buf));
}

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// No objects with destructors may live between setjmp and the longjmp.
bool decode_jpeg_raw(std::span<const std::uint8_t> bytes, std::vector<std::uint8_t>& out,
                     int& width, int& height, int& channels, std::string& error) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    error = jerr.message;
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = cinfo.jpeg_color_space == JCS_GRAYSCALE ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  channels = cinfo.output_components;
  out.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
             static_cast<std::size_t>(channels));
  const auto stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data() + static_cast<std::size_t>(cinfo.output_scanline) * stride;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

bool encode_jpeg_raw(const Image& img, int quality, unsigned char*& mem, unsigned long& size,
                     std::string& error) {
  jpeg_compress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_compress(&cinfo);
    error = jerr.message;
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &mem, &size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width());
  cinfo.image_height = static_cast<JDIMENSION>(img.height());
  cinfo.input_components = img.channels();
  cinfo.in_color_space = img.channels() == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const auto stride = static_cast<std::size_t>(img.width()) * static_cast<std::size_t>(img.channels());
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPLE*>(img.data().data() + cinfo.next_scanline * stride);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

}  // namespace

Image decode_image(std::span<const std::uint8_t> bytes) {
  switch (sniff_format(bytes)) {
    case ImageFormat::png:
      return decode_png(bytes);
    case ImageFormat::jpeg: {
      std::vector<std::uint8_t> buf;
      int w = 0, h = 0, c = 0;
      std::string error;
      if (!decode_jpeg_raw(bytes, buf, w, h, c, error)) {
        throw Error(ErrorCode::decode, "jpeg: " + error);
      }
      if (w <= 0 || h <= 0 || (c != 1 && c != 3)) throw Error(ErrorCode::decode, "jpeg: unsupported layout");
      return Image(w, h, c, std::move(buf));
    }
    case ImageFormat::unknown:
      break;
  }
  throw Error(ErrorCode::decode, "not a PNG or JPEG image");
}

std::vector<std::uint8_t> encode_png(const Image& img) {
  if (img.empty()) throw Error(ErrorCode::invalid_argument, "cannot encode an empty image");
  png_image pimg;
  std::memset(&pimg, 0, sizeof pimg);
  pimg.version = PNG_IMAGE_VERSION;
  pimg.width = static_cast<png_uint_32>(img.width());
  pimg.height = static_cast<png_uint_32>(img.height());
  pimg.format = img.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&pimg, nullptr, &size, 0, img.data().data(), 0, nullptr)) {
    throw Error(ErrorCode::internal, std::string("png: ") + pimg.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&pimg, out.data(), &size, 0, img.data().data(), 0, nullptr)) {
    throw Error(ErrorCode::internal, std::string("png: ") + pimg.message);
  }
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality) {
  if (img.empty()) throw Error(ErrorCode::invalid_argument, "cannot encode an empty image");
  unsigned char* mem = nullptr;
  unsigned long size = 0;
  std::string error;
  const bool ok = encode_jpeg_raw(img, quality, mem, size, error);
  std::vector<std::uint8_t> out;
  if (ok) out.assign(mem, mem + size);
  std::free(mem);
  if (!ok) throw Error(ErrorCode::internal, "jpeg: " + error);
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw Error(ErrorCode::not_found, "no such file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io, "short write to " + path.string());
}

Image load_image(const std::filesystem::path& path) { return decode_image(read_file(path)); }

void save_png(const std::filesystem::path& path, const Image& img) { write_file(path, encode_png(img)); }

}  // namespace lotwatch::imaging
