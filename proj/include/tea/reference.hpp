#pragma once

// Serial, unoptimized counterparts of the OpenMP kernels in imageops.hpp
// and metrics.hpp. They exist so tests and the benchmark can compare the
// parallel paths against something obviously correct.

#include <cstddef>
#include <optional>
#include <span>

#include "tea/image.hpp"
#include "tea/imageops.hpp"

namespace tea::reference {

/// Direct 3x3 correlation, clamped indices.
ScalarMap sobel(const ScalarMap& gray, Axis axis);

/// Direct 2-D correlation with the outer product of the 1-D taps.
ScalarMap gaussian_blur(const ScalarMap& map, int kernel_size, std::optional<double> sigma = {});

ScalarMap avg_pool(const ScalarMap& map, std::size_t kernel, std::size_t stride);

double l2_distance(std::span<const double> a, std::span<const double> b);

/// Mean SSIM computed window by window with the 2-D Gaussian weights.
double ssim(const Image& a, const Image& b);

}  // namespace tea::reference
