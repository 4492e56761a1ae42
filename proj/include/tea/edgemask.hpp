#pragma once

#include <string_view>

#include "tea/image.hpp"

namespace tea {

/// Parameters of the soft edge mask.
struct EdgeMaskParams {
  double low_threshold = 50.0;    ///< T_l, on the 0..255 gradient scale
  double high_threshold = 255.0;  ///< T_h
  int blur_kernel = 5;            ///< b, odd
  double gamma = 1.0;             ///< intensity factor applied after normalization
  double epsilon = 1e-8;          ///< guards the division by the gradient maximum

  void validate() const;
};

enum class MaskVariant {
  kTea,   ///< mask as built
  kInv,   ///< edges editable, smooth regions protected
  kHalf,  ///< uniform mask with the same editable budget
};

std::string_view to_string(MaskVariant v);
/// Accepts "tea", "inv", "half" (case-insensitive). Throws ArgumentError otherwise.
MaskVariant parse_mask_variant(std::string_view s);

/// H x W weights in [0, min(gamma, 1)], high near the edges of the image it
/// was built from. Attack updates are scaled by (1 - M) and broadcast over
/// channels.
class SoftEdgeMask {
 public:
  SoftEdgeMask() = default;
  /// Throws ArgumentError if a value falls outside [0, min(gamma, 1)].
  SoftEdgeMask(ScalarMap map, EdgeMaskParams params);

  /// Mask of zeros: every pixel fully editable.
  static SoftEdgeMask zeros(std::size_t height, std::size_t width, EdgeMaskParams params = {});

  [[nodiscard]] const ScalarMap& map() const { return map_; }
  [[nodiscard]] const EdgeMaskParams& params() const { return params_; }
  [[nodiscard]] double ceiling() const;
  [[nodiscard]] std::size_t height() const { return map_.height(); }
  [[nodiscard]] std::size_t width() const { return map_.width(); }
  double operator()(std::size_t i, std::size_t j) const { return map_(i, j); }

  /// Sum over pixels of (1 - M).
  [[nodiscard]] double editable_budget() const;

 private:
  ScalarMap map_;
  EdgeMaskParams params_;
};

/// The 0/255 band mask before blurring: 255 where the gradient magnitude,
/// rescaled to 0..255, lies within [T_l, T_h].
ScalarMap edge_band(const Image& img, const EdgeMaskParams& params);

/// grayscale -> Sobel x/y -> magnitude -> 0..255 rescale -> band threshold
/// -> Gaussian blur -> min-max normalize -> * gamma -> clamp to [0,1].
SoftEdgeMask create_soft_edge_mask(const Image& img, const EdgeMaskParams& params);

/// kTea: unchanged. kInv: ceiling - M. kHalf: constant mean(M), which keeps
/// sum(1 - M) unchanged.
SoftEdgeMask variant_mask(const SoftEdgeMask& mask, MaskVariant kind);

}  // namespace tea
