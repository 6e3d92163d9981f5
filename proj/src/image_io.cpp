#include "ivos/image_io.hpp"

#include <png.h>
#include <jpeglib.h>

#include <array>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

namespace ivos {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error(ErrorCode::io, "cannot open " + path.string());
  return f;
}

// libpng and libjpeg report fatal errors through longjmp. Everything that
// crosses a setjmp boundary below lives in these context structs, owned by
// the caller, so no C++ object is skipped by the jump.
struct PngContext {
  std::string error;
  std::vector<std::uint8_t> pixels;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  bool indexed = false;
};

void png_error_fn(png_structp png, png_const_charp msg) {
  auto* ctx = static_cast<PngContext*>(png_get_error_ptr(png));
  ctx->error = msg;
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

bool read_indexed_png(std::FILE* fp, PngContext* ctx) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, ctx, png_error_fn, png_warning_fn);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  ctx->width = png_get_image_width(png, info);
  ctx->height = png_get_image_height(png, info);
  ctx->indexed = png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE;
  if (!ctx->indexed) {
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
  }
  if (png_get_bit_depth(png, info) < 8) png_set_packing(png);
  png_read_update_info(png, info);
  ctx->pixels.resize(static_cast<std::size_t>(ctx->width) * ctx->height);
  for (png_uint_32 y = 0; y < ctx->height; ++y) {
    png_read_row(png, ctx->pixels.data() + static_cast<std::size_t>(y) * ctx->width, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

struct PngWriteContext {
  std::string error;
  const std::uint8_t* pixels = nullptr;
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 = palette, 3 = rgb
};

void png_write_error_fn(png_structp png, png_const_charp msg) {
  auto* ctx = static_cast<PngWriteContext*>(png_get_error_ptr(png));
  ctx->error = msg;
  png_longjmp(png, 1);
}

// Pascal VOC / DAVIS annotation colour map.
std::array<png_color, 256> annotation_palette() {
  std::array<png_color, 256> pal{};
  for (int i = 0; i < 256; ++i) {
    int r = 0, g = 0, b = 0, c = i;
    for (int j = 0; j < 8; ++j) {
      r |= ((c >> 0) & 1) << (7 - j);
      g |= ((c >> 1) & 1) << (7 - j);
      b |= ((c >> 2) & 1) << (7 - j);
      c >>= 3;
    }
    pal[static_cast<std::size_t>(i)] = {static_cast<png_byte>(r), static_cast<png_byte>(g),
                                        static_cast<png_byte>(b)};
  }
  return pal;
}

bool write_png(std::FILE* fp, PngWriteContext* ctx) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, ctx, png_write_error_fn, png_warning_fn);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  const int color_type = ctx->channels == 1 ? PNG_COLOR_TYPE_PALETTE : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, static_cast<png_uint_32>(ctx->width), static_cast<png_uint_32>(ctx->height), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  static const std::array<png_color, 256> palette = annotation_palette();
  if (ctx->channels == 1) png_set_PLTE(png, info, palette.data(), 256);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(ctx->width) * static_cast<std::size_t>(ctx->channels);
  for (int y = 0; y < ctx->height; ++y) {
    png_write_row(png, ctx->pixels + static_cast<std::size_t>(y) * stride);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

struct JpegReadContext {
  std::vector<std::uint8_t> pixels;
  int width = 0;
  int height = 0;
  JpegErrorManager err{};
};

bool read_jpeg(std::FILE* fp, JpegReadContext* ctx) {
  jpeg_decompress_struct cinfo{};
  cinfo.err = jpeg_std_error(&ctx->err.base);
  ctx->err.base.error_exit = jpeg_error_exit;
  if (setjmp(ctx->err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, fp);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  ctx->width = static_cast<int>(cinfo.output_width);
  ctx->height = static_cast<int>(cinfo.output_height);
  ctx->pixels.resize(static_cast<std::size_t>(ctx->width) * static_cast<std::size_t>(ctx->height) * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = ctx->pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) *
                                            static_cast<std::size_t>(ctx->width) * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

struct JpegWriteContext {
  const std::uint8_t* pixels = nullptr;
  int width = 0;
  int height = 0;
  int quality = 95;
  JpegErrorManager err{};
};

bool write_jpeg(std::FILE* fp, JpegWriteContext* ctx) {
  jpeg_compress_struct cinfo{};
  cinfo.err = jpeg_std_error(&ctx->err.base);
  ctx->err.base.error_exit = jpeg_error_exit;
  if (setjmp(ctx->err.jump)) {
    jpeg_destroy_compress(&cinfo);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, fp);
  cinfo.image_width = static_cast<JDIMENSION>(ctx->width);
  cinfo.image_height = static_cast<JDIMENSION>(ctx->height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, ctx->quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPROW>(ctx->pixels + static_cast<std::size_t>(cinfo.next_scanline) *
                                                       static_cast<std::size_t>(ctx->width) * 3);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

bool has_png_signature(std::FILE* fp) {
  std::array<unsigned char, 8> sig{};
  const std::size_t n = std::fread(sig.data(), 1, sig.size(), fp);
  std::rewind(fp);
  return n == sig.size() && png_sig_cmp(sig.data(), 0, sig.size()) == 0;
}

}  // namespace

LabelMask load_label_mask(const std::filesystem::path& path) {
  FilePtr fp = open_file(path, "rb");
  if (!has_png_signature(fp.get())) throw Error(ErrorCode::format, path.string() + " is not a PNG file");
  PngContext ctx;
  if (!read_indexed_png(fp.get(), &ctx)) {
    throw Error(ErrorCode::io, "cannot decode " + path.string() + ": " + ctx.error);
  }
  if (!ctx.indexed) throw Error(ErrorCode::format, path.string() + " is not an indexed-palette image");
  for (const auto v : ctx.pixels) {
    if (v > kMaxObjectId) {
      throw Error(ErrorCode::format, path.string() + ": label " + std::to_string(v) + " exceeds 254");
    }
  }
  return LabelMask(RasterSize(static_cast<int>(ctx.width), static_cast<int>(ctx.height)), std::move(ctx.pixels));
}

void save_label_mask(const std::filesystem::path& path, const LabelMask& mask) {
  FilePtr fp = open_file(path, "wb");
  PngWriteContext ctx;
  ctx.pixels = mask.labels.data();
  ctx.width = mask.size.width;
  ctx.height = mask.size.height;
  if (!write_png(fp.get(), &ctx)) throw Error(ErrorCode::io, "cannot write " + path.string() + ": " + ctx.error);
}

RgbImage load_rgb(const std::filesystem::path& path) {
  FilePtr fp = open_file(path, "rb");
  if (has_png_signature(fp.get())) {
    // Indexed PNGs are expanded through the annotation palette; others are
    // not needed by this project.
    LabelMask m = load_label_mask(path);
    static const std::array<png_color, 256> pal = annotation_palette();
    RgbImage img{m.size, std::vector<std::uint8_t>(m.size.area() * 3)};
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
      img.rgb[3 * i] = pal[m.labels[i]].red;
      img.rgb[3 * i + 1] = pal[m.labels[i]].green;
      img.rgb[3 * i + 2] = pal[m.labels[i]].blue;
    }
    return img;
  }
  JpegReadContext ctx;
  if (!read_jpeg(fp.get(), &ctx)) {
    throw Error(ErrorCode::io, "cannot decode " + path.string() + ": " + ctx.err.message);
  }
  return RgbImage{RasterSize(ctx.width, ctx.height), std::move(ctx.pixels)};
}

void save_jpeg(const std::filesystem::path& path, const RgbImage& image, int quality) {
  FilePtr fp = open_file(path, "wb");
  JpegWriteContext ctx;
  ctx.pixels = image.rgb.data();
  ctx.width = image.size.width;
  ctx.height = image.size.height;
  ctx.quality = quality;
  if (!write_jpeg(fp.get(), &ctx)) throw Error(ErrorCode::io, "cannot write " + path.string() + ": " + ctx.err.message);
}

}  // namespace ivos
