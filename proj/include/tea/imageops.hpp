#pragma once

// Image-processing primitives used by mask construction, the attack loops
// and the metrics. All functions are pure and reentrant. The row loops are
// OpenMP-parallel; tea/reference.hpp holds the serial versions they are
// tested and benchmarked against.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tea/image.hpp"

namespace tea {

enum class Axis {
  kHorizontal = 0,  ///< derivative along columns (d/dx)
  kVertical = 1,    ///< derivative along rows (d/dy)
};

/// BT.601 luminance weights.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

/// Luminance for 3-channel images, the channel itself for 1-channel ones.
/// Throws UnsupportedFormatError for other channel counts.
ScalarMap grayscale(const Image& img);

/// 3x3 Sobel response with replicate borders. Correlation form, so a
/// rising step gives a positive response. Requires H, W >= 3.
ScalarMap sobel(const ScalarMap& gray, Axis axis);

ScalarMap gradient_magnitude(const ScalarMap& sx, const ScalarMap& sy);

/// sigma = 0.3 * ((b - 1) * 0.5 - 1) + 0.8
double blur_sigma_for(int kernel_size);

/// Normalized 1-D Gaussian taps; sigma defaults to blur_sigma_for(kernel_size).
std::vector<double> gaussian_kernel_1d(int kernel_size, std::optional<double> sigma = {});

/// Separable Gaussian blur with replicate borders. kernel_size must be odd and >= 1.
ScalarMap gaussian_blur(const ScalarMap& map, int kernel_size,
                        std::optional<double> sigma = {});

/// Window means; output is floor((dim - kernel) / stride) + 1 per axis.
ScalarMap avg_pool(const ScalarMap& map, std::size_t kernel, std::size_t stride);

/// size x size map of exp(-r^2 / (2 sigma^2)), r measured from the pixel at
/// ((size-1)/2, (size-1)/2).
ScalarMap gaussian_window(std::size_t size, double sigma);

/// Euclidean norm of a - b. The sum is accumulated in fixed-size blocks
/// whose partials are added in block order, so the result does not depend
/// on the thread count.
double l2_distance(std::span<const double> a, std::span<const double> b);
double l2_distance(const Image& a, const Image& b);

/// Per-pixel sum over channels of |a - b|.
ScalarMap channel_abs_diff(const Image& a, const Image& b);

/// Min-max rescale to [0,1]. A constant map becomes all zeros when the
/// constant is 0 and all ones otherwise.
ScalarMap minmax_normalize(const ScalarMap& map);

}  // namespace tea
