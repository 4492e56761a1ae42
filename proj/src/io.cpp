#include "tea/io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>

#include "tea/error.hpp"

namespace tea::io {

namespace fs = std::filesystem;

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b.data(), 4);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint32_t checked_u32(std::size_t v) {
  if (v > 0xffffffffu) throw ArgumentError("dimension too large for the tensor format");
  return static_cast<std::uint32_t>(v);
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool has_magic(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  char head[4] = {};
  in.read(head, 4);
  return in.gcount() == 4 && std::memcmp(head, kTensorMagic, 4) == 0;
}

}  // namespace

void write_tensor(const fs::path& path, const Shape& shape, std::span<const double> data) {
  if (data.size() != shape.size()) throw ShapeError("write_tensor: data does not match " + shape.str());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(kTensorMagic, 4);
  put_u32(out, checked_u32(shape.channels));
  put_u32(out, checked_u32(shape.height));
  put_u32(out, checked_u32(shape.width));
  for (double v : data) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  if (!out) throw IoError("write failed for " + path.string());
}

void write_tensor(const fs::path& path, const Image& img) { write_tensor(path, img.shape(), img.data()); }

RawTensor read_tensor(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<unsigned char, 16> head{};
  in.read(reinterpret_cast<char*>(head.data()), head.size());
  if (in.gcount() != static_cast<std::streamsize>(head.size()) ||
      std::memcmp(head.data(), kTensorMagic, 4) != 0) {
    throw UnsupportedFormatError(path.string() + " is not a TEA1 tensor file");
  }
  RawTensor t;
  t.shape = {get_u32(head.data() + 4), get_u32(head.data() + 8), get_u32(head.data() + 12)};
  const std::size_t n = t.shape.size();
  std::vector<unsigned char> body(n * 4);
  in.read(reinterpret_cast<char*>(body.data()), static_cast<std::streamsize>(body.size()));
  if (in.gcount() != static_cast<std::streamsize>(body.size())) {
    throw IoError(path.string() + ": truncated tensor body");
  }
  t.data.resize(n);
  for (std::size_t k = 0; k < n; ++k) t.data[k] = std::bit_cast<float>(get_u32(body.data() + 4 * k));
  return t;
}

Image read_png(const fs::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw UnsupportedFormatError(path.string() + " is not a PNG file");
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng: cannot allocate read struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng: cannot allocate info struct");
  }

  // libpng reports errors by longjmp; nothing with a destructor may live
  // between here and the end of the decode.
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
  volatile bool unsupported = false;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng failed to decode " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);
  if (bit_depth != 8 || (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_RGB)) {
    unsupported = true;
  } else {
    const std::size_t channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
    pixels.resize(static_cast<std::size_t>(width) * height * channels);
    rows.resize(height);
    for (png_uint_32 i = 0; i < height; ++i) rows[i] = pixels.data() + i * width * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);

  if (unsupported) {
    throw UnsupportedFormatError(path.string() + ": only 8-bit gray or RGB PNG is supported (bit depth " +
                                 std::to_string(bit_depth) + ", color type " + std::to_string(color_type) + ")");
  }
  const std::size_t channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const Shape shape{channels, height, width};
  std::vector<double> data(shape.size());
  const std::size_t plane = shape.plane();
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t c = 0; c < channels; ++c) data[c * plane + p] = pixels[p * channels + c] / 255.0;
  }
  return Image(shape, std::move(data));
}

void write_png(const fs::path& path, const Image& img) {
  const Shape& s = img.shape();
  if (s.channels != 1 && s.channels != 3) {
    throw UnsupportedFormatError("PNG export needs 1 or 3 channels, got " + std::to_string(s.channels));
  }
  std::vector<png_byte> pixels(s.size());
  const std::size_t plane = s.plane();
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t c = 0; c < s.channels; ++c) {
      pixels[p * s.channels + c] = static_cast<png_byte>(std::lround(img.data()[c * plane + p] * 255.0));
    }
  }

  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(s.width);
  image.height = static_cast<png_uint_32>(s.height);
  image.format = s.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot write " + path.string() + ": " + msg);
  }
}

Interpolation parse_interpolation(std::string_view s) {
  if (s == "nearest") return Interpolation::kNearest;
  if (s == "bilinear") return Interpolation::kBilinear;
  throw ArgumentError("unknown interpolation '" + std::string(s) + "' (expected nearest|bilinear)");
}

Image resize(const Image& img, std::size_t height, std::size_t width, Interpolation mode) {
  if (height == 0 || width == 0) throw ArgumentError("resize target must be positive");
  const Shape& s = img.shape();
  if (s.height == height && s.width == width) return img;
  Tensor out({s.channels, height, width});
  const double sy = static_cast<double>(s.height) / static_cast<double>(height);
  const double sx = static_cast<double>(s.width) / static_cast<double>(width);
  for (std::size_t c = 0; c < s.channels; ++c) {
    for (std::size_t i = 0; i < height; ++i) {
      for (std::size_t j = 0; j < width; ++j) {
        if (mode == Interpolation::kNearest) {
          const auto si = std::min(s.height - 1, static_cast<std::size_t>(std::floor(i * sy)));
          const auto sj = std::min(s.width - 1, static_cast<std::size_t>(std::floor(j * sx)));
          out(c, i, j) = img(c, si, sj);
        } else {
          // Half-pixel centers, edge-clamped.
          const double fy = std::clamp((i + 0.5) * sy - 0.5, 0.0, static_cast<double>(s.height - 1));
          const double fx = std::clamp((j + 0.5) * sx - 0.5, 0.0, static_cast<double>(s.width - 1));
          const auto y0 = static_cast<std::size_t>(fy);
          const auto x0 = static_cast<std::size_t>(fx);
          const std::size_t y1 = std::min(y0 + 1, s.height - 1);
          const std::size_t x1 = std::min(x0 + 1, s.width - 1);
          const double wy = fy - static_cast<double>(y0);
          const double wx = fx - static_cast<double>(x0);
          out(c, i, j) = (1 - wy) * ((1 - wx) * img(c, y0, x0) + wx * img(c, y0, x1)) +
                         wy * ((1 - wx) * img(c, y1, x0) + wx * img(c, y1, x1));
        }
      }
    }
  }
  return clamp01(std::move(out));
}

Image ingest_image(const fs::path& path, const IngestOptions& opts) {
  if (!fs::exists(path)) throw IoError("no such file: " + path.string());
  Image img;
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (ext == ".png") {
    img = read_png(path);
  } else if (has_magic(path)) {
    RawTensor t = read_tensor(path);
    img = Image(t.shape, std::move(t.data));
  } else {
    throw UnsupportedFormatError(path.string() + ": expected an 8-bit PNG or a TEA1 tensor file");
  }
  if (opts.resize) img = resize(img, opts.resize->first, opts.resize->second, opts.interpolation);
  return img;
}

std::pair<std::size_t, std::size_t> parse_hw(std::string_view s) {
  const auto x = s.find_first_of("xX");
  if (x == std::string_view::npos) throw ArgumentError("expected HxW, got '" + std::string(s) + "'");
  try {
    std::size_t used = 0;
    const std::string hs(s.substr(0, x));
    const std::string ws(s.substr(x + 1));
    const unsigned long h = std::stoul(hs, &used);
    if (used != hs.size()) throw std::invalid_argument(hs);
    const unsigned long w = std::stoul(ws, &used);
    if (used != ws.size()) throw std::invalid_argument(ws);
    if (h == 0 || w == 0) throw std::invalid_argument("zero");
    return {h, w};
  } catch (const std::exception&) {
    throw ArgumentError("expected HxW, got '" + std::string(s) + "'");
  }
}

}  // namespace tea::io
