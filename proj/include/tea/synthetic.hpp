#pragma once

// Desk-scale stand-ins for natural images and classifiers.

#include <cstddef>
#include <vector>

#include "tea/attack.hpp"
#include "tea/edgemask.hpp"
#include "tea/image.hpp"
#include "tea/oracle.hpp"

namespace tea::synthetic {

struct SceneOptions {
  std::size_t min_rects = 3;
  std::size_t max_rects = 6;
  double low = 0.1;      ///< all intensities stay within [low, high]
  double high = 0.9;
  double noise = 0.005;  ///< uniform jitter amplitude
};

/// Smooth two-axis gradient background with a few flat rectangles on top:
/// sparse, well-defined edges.
Image random_scene(const Shape& shape, Rng& rng, const SceneOptions& opts = {});

/// Vertical stripes of period `period` pixels, alternating `low` / `high`.
Image stripes(const Shape& shape, std::size_t period, double low = 0.2, double high = 0.8);

/// Two-class halfspace problem built around a source/target pair.
///
/// The decision boundary is the hyperplane through target + crossing *
/// (source - target) with normal rho ⊙ (source - target), where
/// rho = background_weight + M and M is the target's soft edge mask. The
/// classifier therefore weighs differences on the target's edges more
/// heavily than those in smooth regions. Prototype 0 is the target class,
/// prototype 1 the source class.
struct HalfspaceScenario {
  Image source;
  Image target;
  std::vector<Image> prototypes;
  double crossing = 0.5;
  Label target_label = 0;
  Label source_label = 1;

  [[nodiscard]] PrototypeOracle oracle() const { return PrototypeOracle(prototypes); }
  [[nodiscard]] AttackPair pair() const { return {source, target, source_label, target_label}; }
  /// Analytic membership: ||x - p_target||^2 <= ||x - p_source||^2.
  [[nodiscard]] bool in_target_region(const Image& x) const;
};

inline constexpr double kDefaultBackgroundWeight = 0.25;

HalfspaceScenario make_halfspace_scenario(Image source, Image target, double crossing,
                                          double background_weight = kDefaultBackgroundWeight,
                                          const EdgeMaskParams& edges = {});

/// Random scenes for source and target, then make_halfspace_scenario().
HalfspaceScenario make_halfspace_scenario(const Shape& shape, double crossing, Rng& rng,
                                          double background_weight = kDefaultBackgroundWeight);

/// Same, with the normal equal to (source - target): the plain bisector of
/// two prototypes placed on the segment, blind to edges.
HalfspaceScenario make_segment_scenario(const Shape& shape, double crossing, Rng& rng);

/// K random scenes used as class prototypes, plus samples per class made by
/// blending each prototype with a little of a random scene. Every sample is
/// checked to classify as its own class.
struct PrototypeCorpus {
  std::vector<Image> prototypes;
  std::vector<Image> samples;
  std::vector<Label> labels;
};
PrototypeCorpus make_prototype_corpus(const Shape& shape, std::size_t classes,
                                      std::size_t samples_per_class, Rng& rng);

}  // namespace tea::synthetic
