#include "tea/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tea/error.hpp"

namespace tea::synthetic {

Image random_scene(const Shape& shape, Rng& rng, const SceneOptions& opts) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> level(opts.low, opts.high);
  const double span = opts.high - opts.low;
  Tensor t(shape);

  for (std::size_t c = 0; c < shape.channels; ++c) {
    const double base = level(rng);
    const double gi = (unit(rng) - 0.5) * 0.4 * span;
    const double gj = (unit(rng) - 0.5) * 0.4 * span;
    for (std::size_t i = 0; i < shape.height; ++i) {
      for (std::size_t j = 0; j < shape.width; ++j) {
        t(c, i, j) = base + gi * (static_cast<double>(i) / shape.height - 0.5) +
                     gj * (static_cast<double>(j) / shape.width - 0.5);
      }
    }
  }

  std::uniform_int_distribution<std::size_t> count(opts.min_rects, opts.max_rects);
  const std::size_t rects = count(rng);
  const std::size_t min_side = std::max<std::size_t>(2, shape.height / 8);
  const std::size_t max_side_h = std::max(min_side, shape.height / 2);
  const std::size_t max_side_w = std::max(min_side, shape.width / 2);
  for (std::size_t r = 0; r < rects; ++r) {
    const std::size_t h = std::uniform_int_distribution<std::size_t>(min_side, max_side_h)(rng);
    const std::size_t w = std::uniform_int_distribution<std::size_t>(min_side, max_side_w)(rng);
    const std::size_t i0 = std::uniform_int_distribution<std::size_t>(0, shape.height - std::min(h, shape.height))(rng);
    const std::size_t j0 = std::uniform_int_distribution<std::size_t>(0, shape.width - std::min(w, shape.width))(rng);
    for (std::size_t c = 0; c < shape.channels; ++c) {
      const double v = level(rng);
      for (std::size_t i = i0; i < std::min(shape.height, i0 + h); ++i) {
        for (std::size_t j = j0; j < std::min(shape.width, j0 + w); ++j) t(c, i, j) = v;
      }
    }
  }

  std::uniform_real_distribution<double> jitter(-opts.noise, opts.noise);
  for (double& v : t.data()) v = std::clamp(v + jitter(rng), opts.low, opts.high);
  return clamp01(std::move(t));
}

Image stripes(const Shape& shape, std::size_t period, double low, double high) {
  if (period == 0) throw ArgumentError("stripe period must be positive");
  Tensor t(shape);
  for (std::size_t c = 0; c < shape.channels; ++c) {
    for (std::size_t i = 0; i < shape.height; ++i) {
      for (std::size_t j = 0; j < shape.width; ++j) t(c, i, j) = (j / period) % 2 == 0 ? low : high;
    }
  }
  return clamp01(std::move(t));
}

bool HalfspaceScenario::in_target_region(const Image& x) const {
  double dt = 0.0;
  double ds = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    dt += (x.data()[k] - prototypes[0].data()[k]) * (x.data()[k] - prototypes[0].data()[k]);
    ds += (x.data()[k] - prototypes[1].data()[k]) * (x.data()[k] - prototypes[1].data()[k]);
  }
  return dt <= ds;
}

namespace {

HalfspaceScenario build(Image source, Image target, double crossing, const std::vector<double>& rho_plane) {
  if (source.shape() != target.shape()) throw ShapeError("scenario images differ in shape");
  if (!(crossing > 0.0 && crossing < 1.0)) throw ArgumentError("crossing must lie in (0,1)");
  const Shape shape = target.shape();
  const std::size_t plane = shape.plane();
  std::vector<double> normal(shape.size());
  std::vector<double> anchor(shape.size());
  double kappa = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < shape.size(); ++k) {
    const double d = source.data()[k] - target.data()[k];
    normal[k] = rho_plane[k % plane] * d;
    anchor[k] = target.data()[k] + crossing * d;
    if (normal[k] != 0.0) {
      kappa = std::min(kappa, std::min(anchor[k], 1.0 - anchor[k]) / std::abs(normal[k]));
    }
  }
  if (!std::isfinite(kappa) || kappa <= 0.0) {
    throw ArgumentError("cannot place prototypes: source equals target or anchor touches the range");
  }
  kappa *= 0.5;

  Tensor pt(shape);
  Tensor ps(shape);
  for (std::size_t k = 0; k < shape.size(); ++k) {
    pt.data()[k] = anchor[k] - kappa * normal[k];
    ps.data()[k] = anchor[k] + kappa * normal[k];
  }
  HalfspaceScenario sc;
  sc.source = std::move(source);
  sc.target = std::move(target);
  sc.prototypes = {clamp01(std::move(pt)), clamp01(std::move(ps))};
  sc.crossing = crossing;
  return sc;
}

}  // namespace

HalfspaceScenario make_halfspace_scenario(Image source, Image target, double crossing,
                                          double background_weight, const EdgeMaskParams& edges) {
  if (!(background_weight >= 0.0)) throw ArgumentError("background weight must be non-negative");
  const SoftEdgeMask mask = create_soft_edge_mask(target, edges);
  std::vector<double> rho(mask.map().data().begin(), mask.map().data().end());
  for (double& r : rho) r += background_weight;
  return build(std::move(source), std::move(target), crossing, rho);
}

HalfspaceScenario make_halfspace_scenario(const Shape& shape, double crossing, Rng& rng,
                                          double background_weight) {
  Image source = random_scene(shape, rng);
  Image target = random_scene(shape, rng);
  return make_halfspace_scenario(std::move(source), std::move(target), crossing, background_weight);
}

HalfspaceScenario make_segment_scenario(const Shape& shape, double crossing, Rng& rng) {
  Image source = random_scene(shape, rng);
  Image target = random_scene(shape, rng);
  return build(std::move(source), std::move(target), crossing, std::vector<double>(shape.plane(), 1.0));
}

PrototypeCorpus make_prototype_corpus(const Shape& shape, std::size_t classes,
                                      std::size_t samples_per_class, Rng& rng) {
  if (classes < 2) throw ArgumentError("corpus needs at least two classes");
  PrototypeCorpus corpus;
  for (std::size_t k = 0; k < classes; ++k) corpus.prototypes.push_back(random_scene(shape, rng));
  PrototypeOracle oracle(corpus.prototypes);
  std::uniform_real_distribution<double> blend(0.05, 0.25);

  for (std::size_t k = 0; k < classes; ++k) {
    std::size_t made = 0;
    while (made < samples_per_class) {
      const Image other = random_scene(shape, rng);
      const double a = blend(rng);
      Tensor t(shape);
      for (std::size_t n = 0; n < shape.size(); ++n) {
        t.data()[n] = (1.0 - a) * corpus.prototypes[k].data()[n] + a * other.data()[n];
      }
      Image sample = clamp01(std::move(t));
      if (oracle.classify(sample) != k) continue;
      corpus.samples.push_back(std::move(sample));
      corpus.labels.push_back(static_cast<Label>(k));
      ++made;
    }
  }
  return corpus;
}

}  // namespace tea::synthetic
