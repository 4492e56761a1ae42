#include "tea/edgemask.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <string>

#include "tea/error.hpp"
#include "tea/imageops.hpp"

namespace tea {

void EdgeMaskParams::validate() const {
  if (!(0.0 <= low_threshold && low_threshold <= high_threshold && high_threshold <= 255.0)) {
    throw ArgumentError("edge thresholds must satisfy 0 <= T_l <= T_h <= 255");
  }
  if (blur_kernel < 1 || blur_kernel % 2 == 0) {
    throw ArgumentError("blur kernel must be odd and positive, got " + std::to_string(blur_kernel));
  }
  if (!(gamma >= 0.0)) throw ArgumentError("gamma must be non-negative");
  if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
}

std::string_view to_string(MaskVariant v) {
  switch (v) {
    case MaskVariant::kTea: return "tea";
    case MaskVariant::kInv: return "inv";
    case MaskVariant::kHalf: return "half";
  }
  return "?";
}

MaskVariant parse_mask_variant(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "tea") return MaskVariant::kTea;
  if (lower == "inv") return MaskVariant::kInv;
  if (lower == "half") return MaskVariant::kHalf;
  throw ArgumentError("unknown mask variant '" + std::string(s) + "' (expected tea|inv|half)");
}

SoftEdgeMask::SoftEdgeMask(ScalarMap map, EdgeMaskParams params)
    : map_(std::move(map)), params_(params) {
  const double top = ceiling();
  for (double v : map_.data()) {
    if (!(v >= 0.0 && v <= top)) {
      throw ArgumentError("mask value " + std::to_string(v) + " outside [0, " +
                          std::to_string(top) + "]");
    }
  }
}

SoftEdgeMask SoftEdgeMask::zeros(std::size_t height, std::size_t width, EdgeMaskParams params) {
  return SoftEdgeMask(ScalarMap(height, width, 0.0), params);
}

double SoftEdgeMask::ceiling() const { return std::min(params_.gamma, 1.0); }

double SoftEdgeMask::editable_budget() const {
  double acc = 0.0;
  for (double v : map_.data()) acc += 1.0 - v;
  return acc;
}

ScalarMap edge_band(const Image& img, const EdgeMaskParams& params) {
  params.validate();
  const ScalarMap gray = grayscale(img);
  ScalarMap g = gradient_magnitude(sobel(gray, Axis::kHorizontal), sobel(gray, Axis::kVertical));
  const double peak = *std::max_element(g.data().begin(), g.data().end());
  const double scale = 255.0 / (peak + params.epsilon);
  for (double& v : g.data()) {
    const double scaled = v * scale;
    v = (params.low_threshold <= scaled && scaled <= params.high_threshold) ? 255.0 : 0.0;
  }
  return g;
}

SoftEdgeMask create_soft_edge_mask(const Image& img, const EdgeMaskParams& params) {
  const ScalarMap band = edge_band(img, params);
  ScalarMap m = minmax_normalize(gaussian_blur(band, params.blur_kernel));
  for (double& v : m.data()) v = std::clamp(params.gamma * v, 0.0, 1.0);
  return SoftEdgeMask(std::move(m), params);
}

SoftEdgeMask variant_mask(const SoftEdgeMask& mask, MaskVariant kind) {
  switch (kind) {
    case MaskVariant::kTea:
      return mask;
    case MaskVariant::kInv: {
      ScalarMap out = mask.map();
      const double top = mask.ceiling();
      for (double& v : out.data()) v = top - v;
      return SoftEdgeMask(std::move(out), mask.params());
    }
    case MaskVariant::kHalf: {
      const auto data = mask.map().data();
      const double mean =
          data.empty() ? 0.0
                       : std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(data.size());
      return SoftEdgeMask(ScalarMap(mask.height(), mask.width(), std::min(mean, mask.ceiling())),
                          mask.params());
    }
  }
  throw ArgumentError("unknown mask variant");
}

}  // namespace tea
