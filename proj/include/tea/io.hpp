#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tea/image.hpp"

namespace tea::io {

/// Raw tensor file: "TEA1", then C, H, W as little-endian u32, then
/// C*H*W little-endian float32 values, channel-major.
inline constexpr char kTensorMagic[4] = {'T', 'E', 'A', '1'};

struct RawTensor {
  Shape shape;
  std::vector<double> data;
};

/// Values are stored as float32; anything not exactly representable is rounded.
void write_tensor(const std::filesystem::path& path, const Shape& shape, std::span<const double> data);
void write_tensor(const std::filesystem::path& path, const Image& img);
RawTensor read_tensor(const std::filesystem::path& path);

/// 8-bit grayscale or RGB PNG, mapped to [0,1] by v / 255. Other bit
/// depths and color types raise UnsupportedFormatError.
Image read_png(const std::filesystem::path& path);
/// Writes 1- or 3-channel images as 8-bit PNG (round(v * 255)).
void write_png(const std::filesystem::path& path, const Image& img);

enum class Interpolation { kNearest, kBilinear };
Interpolation parse_interpolation(std::string_view s);

Image resize(const Image& img, std::size_t height, std::size_t width, Interpolation mode);

struct IngestOptions {
  std::optional<std::pair<std::size_t, std::size_t>> resize;  ///< (H, W)
  Interpolation interpolation = Interpolation::kBilinear;
};

/// Loads a .png or a raw tensor (any other extension is sniffed for the
/// magic), then resizes when asked.
Image ingest_image(const std::filesystem::path& path, const IngestOptions& opts = {});

/// "224x224" -> (224, 224).
std::pair<std::size_t, std::size_t> parse_hw(std::string_view s);

}  // namespace tea::io
