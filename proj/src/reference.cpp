#include "tea/reference.hpp"

#include <algorithm>
#include <cmath>

#include "tea/error.hpp"
#include "tea/metrics.hpp"

namespace tea::reference {

namespace {

std::size_t clamp_index(std::ptrdiff_t k, std::size_t n) {
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(n) - 1));
}

ScalarMap correlate(const ScalarMap& in, const std::vector<double>& kernel, std::ptrdiff_t r) {
  const std::ptrdiff_t side = 2 * r + 1;
  ScalarMap out(in.height(), in.width());
  for (std::size_t i = 0; i < in.height(); ++i) {
    for (std::size_t j = 0; j < in.width(); ++j) {
      double acc = 0.0;
      for (std::ptrdiff_t a = -r; a <= r; ++a) {
        for (std::ptrdiff_t b = -r; b <= r; ++b) {
          const double v = in(clamp_index(static_cast<std::ptrdiff_t>(i) + a, in.height()),
                              clamp_index(static_cast<std::ptrdiff_t>(j) + b, in.width()));
          acc += kernel[(a + r) * side + (b + r)] * v;
        }
      }
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace

ScalarMap sobel(const ScalarMap& gray, Axis axis) {
  if (gray.height() < 3 || gray.width() < 3) throw ShapeError("sobel needs a map of at least 3x3");
  static const std::vector<double> kX = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
  static const std::vector<double> kY = {-1, -2, -1, 0, 0, 0, 1, 2, 1};
  return correlate(gray, axis == Axis::kHorizontal ? kX : kY, 1);
}

ScalarMap gaussian_blur(const ScalarMap& map, int kernel_size, std::optional<double> sigma) {
  const auto taps = gaussian_kernel_1d(kernel_size, sigma);
  std::vector<double> kernel(taps.size() * taps.size());
  for (std::size_t a = 0; a < taps.size(); ++a) {
    for (std::size_t b = 0; b < taps.size(); ++b) kernel[a * taps.size() + b] = taps[a] * taps[b];
  }
  return correlate(map, kernel, kernel_size / 2);
}

ScalarMap avg_pool(const ScalarMap& map, std::size_t kernel, std::size_t stride) {
  if (kernel == 0 || stride == 0 || kernel > map.height() || kernel > map.width()) {
    throw ShapeError("avg_pool: bad kernel/stride for map");
  }
  const std::size_t oh = (map.height() - kernel) / stride + 1;
  const std::size_t ow = (map.width() - kernel) / stride + 1;
  ScalarMap out(oh, ow);
  for (std::size_t r = 0; r < oh; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t a = 0; a < kernel; ++a) {
        for (std::size_t b = 0; b < kernel; ++b) acc += map(r * stride + a, c * stride + b);
      }
      out(r, c) = acc / static_cast<double>(kernel * kernel);
    }
  }
  return out;
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("l2_distance: operand sizes differ");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(acc);
}

double ssim(const Image& a, const Image& b) {
  if (a.shape() != b.shape()) throw ShapeError("ssim: operand shapes differ");
  const Shape& s = a.shape();
  const std::size_t win = kSsimWindow;
  if (s.height < win || s.width < win) throw ShapeError("ssim: image smaller than window");
  const auto taps = gaussian_kernel_1d(static_cast<int>(win), kSsimSigma);
  const double c1 = (kSsimK1 * kSsimRange) * (kSsimK1 * kSsimRange);
  const double c2 = (kSsimK2 * kSsimRange) * (kSsimK2 * kSsimRange);

  double total = 0.0;
  for (std::size_t c = 0; c < s.channels; ++c) {
    double channel_sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i + win <= s.height; ++i) {
      for (std::size_t j = 0; j + win <= s.width; ++j) {
        double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
        for (std::size_t u = 0; u < win; ++u) {
          for (std::size_t v = 0; v < win; ++v) {
            const double w = taps[u] * taps[v];
            const double x = a(c, i + u, j + v);
            const double y = b(c, i + u, j + v);
            mx += w * x;
            my += w * y;
            xx += w * x * x;
            yy += w * y * y;
            xy += w * x * y;
          }
        }
        const double vx = xx - mx * mx;
        const double vy = yy - my * my;
        const double cov = xy - mx * my;
        channel_sum += ((2 * mx * my + c1) * (2 * cov + c2)) /
                       ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++count;
      }
    }
    total += channel_sum / static_cast<double>(count);
  }
  return total / static_cast<double>(s.channels);
}

}  // namespace tea::reference
