#include "evcam/image_io.hpp"

#include <png.h>
// jpeglib.h needs size_t and FILE declared first.
#include <cstddef>
#include <cstdio>
#include <jpeglib.h>

#include <csetjmp>
#include <cstring>

#include "byte_io.hpp"
#include "evcam/error.hpp"

// libpng/libjpeg report errors through longjmp; every object touched after
// setjmp lives in memory, so the clobber heuristics are false positives.
#pragma GCC diagnostic ignored "-Wclobbered"

namespace evcam {

namespace {

bool is_png(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  return b.size() >= 8 && std::memcmp(b.data(), sig, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> b) { return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF; }

Image convert_channels(std::size_t w, std::size_t h, std::size_t have, std::vector<std::uint8_t> px,
                       std::size_t want) {
  if (have == want) return Image::from_u8(w, h, want, px);
  std::vector<std::uint8_t> out(w * h * want);
  if (have == 1 && want == 3) {
    for (std::size_t i = 0; i < w * h; ++i) out[3 * i] = out[3 * i + 1] = out[3 * i + 2] = px[i];
    return Image::from_u8(w, h, 3, out);
  }
  // 3 -> 1 goes through the float luminance path so both decoders agree.
  return luminance(Image::from_u8(w, h, 3, px));
}

struct PngReadSource {
  std::span<const std::uint8_t> data;
  std::size_t pos = 0;
};

void png_read_mem(png_structp png, png_bytep out, png_size_t n) {
  auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
  if (src->pos + n > src->data.size()) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, src->data.data() + src->pos, n);
  src->pos += n;
}

void png_error_throw(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  png_longjmp(png, 1);
}

void png_warning_ignore(png_structp, png_const_charp) {}

Image decode_png(std::span<const std::uint8_t> bytes, std::size_t want) {
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_error_throw, png_warning_ignore);
  if (!png) throw IoError("png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png: out of memory");
  }
  PngReadSource src{bytes, 0};
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 w = 0, h = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("png decode failed: " + error);
  }
  png_set_read_fn(png, &src, png_read_mem);
  png_read_info(png, info);
  w = png_get_image_width(png, info);
  h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const std::size_t have = png_get_channels(png, info);
  pixels.resize(static_cast<std::size_t>(w) * h * have);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = pixels.data() + static_cast<std::size_t>(y) * w * have;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  if (have != 1 && have != 3) throw IoError("png: unsupported channel layout");
  return convert_channels(w, h, have, std::move(pixels), want);
}

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// libjpeg reports corrupt data as warnings (level -1) and keeps decoding with
// filler; a damaged file should fail instead. Trace messages are dropped.
void jpeg_emit_message(j_common_ptr cinfo, int level) {
  if (level < 0) jpeg_error_exit(cinfo);
}

Image decode_jpeg(std::span<const std::uint8_t> bytes, std::size_t want) {
  jpeg_decompress_struct cinfo{};
  JpegError err{};
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  err.mgr.emit_message = jpeg_emit_message;
  std::vector<std::uint8_t> pixels;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw IoError(std::string("jpeg decode failed: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = want == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const std::size_t w = cinfo.output_width, h = cinfo.output_height, have = cinfo.output_components;
  pixels.resize(w * h * have);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * have;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return convert_channels(w, h, have, std::move(pixels), want);
}

void png_write_mem(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

void png_flush_noop(png_structp) {}

}  // namespace

Image decode_image(std::span<const std::uint8_t> bytes, std::size_t channels) {
  if (channels != 1 && channels != 3) throw InvalidInput("decode_image: channels must be 1 or 3");
  if (is_png(bytes)) return decode_png(bytes, channels);
  if (is_jpeg(bytes)) return decode_jpeg(bytes, channels);
  throw IoError("unrecognized image format (expected PNG or JPEG)");
}

Image read_image(const std::string& path, std::size_t channels) {
  const auto bytes = detail::read_file_bytes(path);
  try {
    return decode_image(bytes, channels);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const Image& img) {
  if (img.empty()) throw InvalidInput("cannot encode an empty image");
  const auto samples = img.to_u8();
  std::vector<std::uint8_t> out;
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_error_throw, png_warning_ignore);
  if (!png) throw IoError("png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png: out of memory");
  }
  std::vector<png_const_bytep> rows(img.height());
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png encode failed: " + error);
  }
  png_set_write_fn(png, &out, png_write_mem, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
               img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = img.width() * img.channels();
  for (std::size_t y = 0; y < img.height(); ++y) rows[y] = samples.data() + y * stride;
  png_write_rows(png, const_cast<png_bytepp>(rows.data()), static_cast<png_uint_32>(rows.size()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_png(const std::string& path, const Image& img) { detail::write_file_bytes(path, encode_png(img)); }

}  // namespace evcam
