#include "tea/imageops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tea/error.hpp"

namespace tea {

namespace {

// Below this many output elements the parallel region costs more than it saves.
constexpr std::ptrdiff_t kParallelMin = 1 << 14;

// Block length for the order-stable reductions.
constexpr std::size_t kReduceBlock = 4096;

std::ptrdiff_t clamp_index(std::ptrdiff_t k, std::ptrdiff_t n) {
  return std::clamp<std::ptrdiff_t>(k, 0, n - 1);
}

// Correlates every column with `vtaps` (along i) and then every row with
// `htaps` (along j); both tap vectors have odd length and are centered.
ScalarMap separable(const ScalarMap& in, std::span<const double> vtaps,
                    std::span<const double> htaps) {
  const auto h = static_cast<std::ptrdiff_t>(in.height());
  const auto w = static_cast<std::ptrdiff_t>(in.width());
  const auto vr = static_cast<std::ptrdiff_t>(vtaps.size() / 2);
  const auto hr = static_cast<std::ptrdiff_t>(htaps.size() / 2);
  const bool par = h * w >= kParallelMin;

  ScalarMap tmp(in.height(), in.width());
#pragma omp parallel for if (par) schedule(static)
  for (std::ptrdiff_t i = 0; i < h; ++i) {
    for (std::ptrdiff_t j = 0; j < w; ++j) {
      double acc = 0.0;
      for (std::ptrdiff_t a = -vr; a <= vr; ++a) {
        acc += vtaps[a + vr] * in(clamp_index(i + a, h), j);
      }
      tmp(i, j) = acc;
    }
  }

  ScalarMap out(in.height(), in.width());
#pragma omp parallel for if (par) schedule(static)
  for (std::ptrdiff_t i = 0; i < h; ++i) {
    for (std::ptrdiff_t j = 0; j < w; ++j) {
      double acc = 0.0;
      for (std::ptrdiff_t b = -hr; b <= hr; ++b) {
        acc += htaps[b + hr] * tmp(i, clamp_index(j + b, w));
      }
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace

ScalarMap grayscale(const Image& img) {
  const Shape& s = img.shape();
  if (s.channels == 1) {
    return ScalarMap(s.height, s.width, {img.data().begin(), img.data().end()});
  }
  if (s.channels != 3) {
    throw UnsupportedFormatError("grayscale needs 1 or 3 channels, got " +
                                 std::to_string(s.channels));
  }
  ScalarMap out(s.height, s.width);
  const auto n = static_cast<std::ptrdiff_t>(s.plane());
  auto src = img.data();
  auto dst = out.data();
#pragma omp parallel for if (n >= kParallelMin) schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    dst[k] = kLumaR * src[k] + kLumaG * src[n + k] + kLumaB * src[2 * n + k];
  }
  return out;
}

ScalarMap sobel(const ScalarMap& gray, Axis axis) {
  if (gray.height() < 3 || gray.width() < 3) {
    throw ShapeError("sobel needs a map of at least 3x3, got " + std::to_string(gray.height()) +
                     "x" + std::to_string(gray.width()));
  }
  static constexpr double kSmooth[] = {1.0, 2.0, 1.0};
  static constexpr double kDiff[] = {-1.0, 0.0, 1.0};
  return axis == Axis::kHorizontal ? separable(gray, kSmooth, kDiff)
                                   : separable(gray, kDiff, kSmooth);
}

ScalarMap gradient_magnitude(const ScalarMap& sx, const ScalarMap& sy) {
  if (!sx.same_shape(sy)) throw ShapeError("gradient_magnitude: operand shapes differ");
  ScalarMap out(sx.height(), sx.width());
  const auto n = static_cast<std::ptrdiff_t>(sx.size());
  auto a = sx.data();
  auto b = sy.data();
  auto dst = out.data();
#pragma omp parallel for if (n >= kParallelMin) schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) dst[k] = std::hypot(a[k], b[k]);
  return out;
}

double blur_sigma_for(int kernel_size) { return 0.3 * ((kernel_size - 1) * 0.5 - 1.0) + 0.8; }

std::vector<double> gaussian_kernel_1d(int kernel_size, std::optional<double> sigma) {
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    throw ArgumentError("blur kernel size must be odd and positive, got " +
                        std::to_string(kernel_size));
  }
  const double sd = sigma.value_or(blur_sigma_for(kernel_size));
  if (!(sd > 0.0)) throw ArgumentError("blur sigma must be positive");
  const int r = kernel_size / 2;
  std::vector<double> taps(static_cast<std::size_t>(kernel_size));
  double sum = 0.0;
  for (int k = -r; k <= r; ++k) {
    taps[k + r] = std::exp(-(k * k) / (2.0 * sd * sd));
    sum += taps[k + r];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

ScalarMap gaussian_blur(const ScalarMap& map, int kernel_size, std::optional<double> sigma) {
  const auto taps = gaussian_kernel_1d(kernel_size, sigma);
  if (kernel_size == 1) return map;
  return separable(map, taps, taps);
}

ScalarMap avg_pool(const ScalarMap& map, std::size_t kernel, std::size_t stride) {
  if (kernel == 0 || stride == 0) throw ArgumentError("avg_pool kernel and stride must be >= 1");
  if (kernel > map.height() || kernel > map.width()) {
    throw ShapeError("avg_pool kernel " + std::to_string(kernel) + " larger than map " +
                     std::to_string(map.height()) + "x" + std::to_string(map.width()));
  }
  const std::size_t oh = (map.height() - kernel) / stride + 1;
  const std::size_t ow = (map.width() - kernel) / stride + 1;
  ScalarMap out(oh, ow);
  const double inv = 1.0 / static_cast<double>(kernel * kernel);
  const auto rows = static_cast<std::ptrdiff_t>(oh);
#pragma omp parallel for if (map.size() >= kParallelMin) schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t a = 0; a < kernel; ++a) {
        const std::size_t i = r * stride + a;
        for (std::size_t b = 0; b < kernel; ++b) acc += map(i, c * stride + b);
      }
      out(r, c) = acc * inv;
    }
  }
  return out;
}

ScalarMap gaussian_window(std::size_t size, double sigma) {
  if (size == 0) throw ArgumentError("gaussian_window size must be >= 1");
  if (!(sigma > 0.0)) throw ArgumentError("gaussian_window sigma must be positive");
  ScalarMap out(size, size);
  const double c = (static_cast<double>(size) - 1.0) / 2.0;
  const double denom = 2.0 * sigma * sigma;
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) {
      const double di = static_cast<double>(i) - c;
      const double dj = static_cast<double>(j) - c;
      out(i, j) = std::exp(-(di * di + dj * dj) / denom);
    }
  }
  return out;
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("l2_distance: operand sizes differ");
  const std::size_t n = a.size();
  const std::size_t blocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(blocks, 0.0);
  const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for if (n >= static_cast<std::size_t>(kParallelMin)) schedule(static)
  for (std::ptrdiff_t blk = 0; blk < nb; ++blk) {
    const std::size_t lo = blk * kReduceBlock;
    const std::size_t hi = std::min(n, lo + kReduceBlock);
    double acc = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
      const double d = a[k] - b[k];
      acc += d * d;
    }
    partial[blk] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return std::sqrt(total);
}

double l2_distance(const Image& a, const Image& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("l2_distance: " + a.shape().str() + " vs " + b.shape().str());
  }
  return l2_distance(a.data(), b.data());
}

ScalarMap channel_abs_diff(const Image& a, const Image& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("channel_abs_diff: " + a.shape().str() + " vs " + b.shape().str());
  }
  const Shape& s = a.shape();
  ScalarMap out(s.height, s.width);
  const auto n = static_cast<std::ptrdiff_t>(s.plane());
  auto x = a.data();
  auto y = b.data();
  auto dst = out.data();
#pragma omp parallel for if (static_cast<std::ptrdiff_t>(s.size()) >= kParallelMin) schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t c = 0; c < s.channels; ++c) acc += std::abs(x[c * n + k] - y[c * n + k]);
    dst[k] = acc;
  }
  return out;
}

ScalarMap minmax_normalize(const ScalarMap& map) {
  if (map.size() == 0) return map;
  const auto [lo_it, hi_it] = std::minmax_element(map.data().begin(), map.data().end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (hi == lo) return ScalarMap(map.height(), map.width(), lo == 0.0 ? 0.0 : 1.0);
  ScalarMap out(map.height(), map.width());
  const double inv = 1.0 / (hi - lo);
  auto src = map.data();
  auto dst = out.data();
  for (std::size_t k = 0; k < map.size(); ++k) dst[k] = (src[k] - lo) * inv;
  return out;
}

}  // namespace tea
