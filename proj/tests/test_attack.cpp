#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "tea/attack.hpp"
#include "tea/error.hpp"
#include "tea/imageops.hpp"
#include "tea/synthetic.hpp"

namespace tea {
namespace {

// Remembers every queried image and the label it got.
class Recorder final : public Oracle {
 public:
  explicit Recorder(Oracle& inner) : inner_(inner) {}
  Label classify(const Image& img) override {
    const Label l = inner_.classify(img);
    seen.push_back({img, l});
    return l;
  }
  [[nodiscard]] Shape input_shape() const override { return inner_.input_shape(); }
  [[nodiscard]] std::size_t num_classes() const override { return inner_.num_classes(); }

  std::vector<std::pair<Image, Label>> seen;

 private:
  Oracle& inner_;
};

// Target label for exactly one image, the other label for everything else.
class OnlyThis final : public Oracle {
 public:
  OnlyThis(Image keep, Label target, Label other) : keep_(std::move(keep)), target_(target), other_(other) {}
  Label classify(const Image& img) override {
    check_shape(img);
    return img == keep_ ? target_ : other_;
  }
  [[nodiscard]] Shape input_shape() const override { return keep_.shape(); }
  [[nodiscard]] std::size_t num_classes() const override { return 2; }

 private:
  Image keep_;
  Label target_;
  Label other_;
};

AttackPair flat_pair(const Shape& s, double target_value, double source_value) {
  return {Image::filled(s, source_value), Image::filled(s, target_value), 1, 0};
}

// Config ----------------------------------------------------------------------

TEST(AttackConfig, ResolvesScaledDefaults) {
  const auto small = AttackConfig{}.resolved({3, 32, 32});
  EXPECT_EQ(*small.patch_min, 2u);
  EXPECT_EQ(*small.patch_max, 9u);
  EXPECT_EQ(*small.pool_kernel, 1u);
  EXPECT_EQ(*small.pool_stride, 1u);

  const auto full = AttackConfig{}.resolved({3, 224, 224});
  EXPECT_EQ(*full.patch_min, 16u);
  EXPECT_EQ(*full.patch_max, 64u);
  EXPECT_EQ(*full.pool_kernel, 8u);
  EXPECT_EQ(*full.pool_stride, 8u);
}

TEST(AttackConfig, DefaultConstants) {
  const AttackConfig c;
  EXPECT_EQ(c.patience, 25u);
  EXPECT_EQ(c.growth, 1.1);
  EXPECT_EQ(c.improve_factor, 0.999);
}

TEST(AttackConfig, ValidationRejectsBrokenInvariants) {
  const Shape s{1, 16, 16};
  auto expect_bad = [&](auto mutate) {
    AttackConfig c;
    mutate(c);
    EXPECT_THROW((void)c.resolved(s), ArgumentError);
  };
  expect_bad([](AttackConfig& c) { c.momentum = 1.0; });
  expect_bad([](AttackConfig& c) { c.eta = 0.0; });
  expect_bad([](AttackConfig& c) { c.tolerance = -1.0; });
  expect_bad([](AttackConfig& c) { c.growth = 1.0; });
  expect_bad([](AttackConfig& c) { c.improve_factor = 1.5; });
  expect_bad([](AttackConfig& c) { c.patience = 0; });
  expect_bad([](AttackConfig& c) { c.patch_min = 5, c.patch_max = 4; });
  expect_bad([](AttackConfig& c) { c.patch_max = 17; });
  expect_bad([](AttackConfig& c) { c.top_quantile = 0.0; });
  expect_bad([](AttackConfig& c) { c.mask.low_threshold = 300; });
  EXPECT_THROW(AttackConfig{}.validate(s), ArgumentError);  // unresolved
}

TEST(Stage, RoundTrip) {
  EXPECT_EQ(parse_stage(to_string(Stage::kGlobal)), Stage::kGlobal);
  EXPECT_EQ(parse_stage(to_string(Stage::kPatch)), Stage::kPatch);
  EXPECT_THROW(parse_stage("local"), ArgumentError);
}

// Global stage ----------------------------------------------------------------

TEST(GlobalSearch, AcceptAllShrinksDistanceAndGrowsStep) {
  const Shape s{1, 4, 4};
  const auto pair = flat_pair(s, 0.2, 0.8);
  ConstantOracle yes(s, 2, 0);
  CountedOracle counted(yes, {1000, 0});
  AttackConfig cfg;
  cfg.global_max_queries = 5;
  cfg = cfg.resolved(s);
  AttackState st = AttackState::start(pair.source, pair.target);
  const double s0 = l2_distance(pair.source, pair.target) * cfg.eta;

  global_search(counted, 0, pair.source, pair.target, SoftEdgeMask::zeros(4, 4), cfg, st);
  ASSERT_EQ(st.log.size(), 5u);
  double prev = l2_distance(pair.source, pair.target);
  for (const auto& e : st.log) {
    EXPECT_TRUE(e.accepted);
    EXPECT_LT(e.distance, prev);
    prev = e.distance;
  }
  EXPECT_NEAR(st.step, s0 * std::pow(1.1, 5), 1e-12 * s0);
  EXPECT_EQ(counted.used(), 5u);
}

TEST(GlobalSearch, FirstRejectionStopsAfterOneQuery) {
  const Shape s{3, 8, 8};
  const auto pair = flat_pair(s, 0.2, 0.8);
  ConstantOracle no(s, 2, 1);
  CountedOracle counted(no, {1000, 0});
  const auto cfg = AttackConfig{}.resolved(s);
  AttackState st = AttackState::start(pair.source, pair.target);
  const double d0 = st.distance;
  global_search(counted, 0, pair.source, pair.target, SoftEdgeMask::zeros(8, 8), cfg, st);
  EXPECT_EQ(counted.used(), 1u);
  EXPECT_EQ(st.current, pair.target);
  EXPECT_EQ(st.distance, d0);
  ASSERT_EQ(st.log.size(), 1u);
  EXPECT_FALSE(st.log[0].accepted);
  EXPECT_EQ(st.log[0].stage, Stage::kGlobal);
}

TEST(GlobalSearch, ToleranceAboveInitialStepSkipsTheStage) {
  const Shape s{1, 4, 4};
  const auto pair = flat_pair(s, 0.2, 0.8);
  ConstantOracle yes(s, 2, 0);
  CountedOracle counted(yes, {1000, 0});
  AttackConfig cfg;
  cfg.tolerance = 1.0;
  cfg = cfg.resolved(s);
  AttackState st = AttackState::start(pair.source, pair.target);
  global_search(counted, 0, pair.source, pair.target, SoftEdgeMask::zeros(4, 4), cfg, st);
  EXPECT_EQ(counted.used(), 0u);
}

// Brute force: replay the global recurrence with mu = 0 and a zero mask,
// deciding each candidate by analytic halfspace membership.
std::vector<bool> analytic_decisions(const synthetic::HalfspaceScenario& sc, const AttackConfig& cfg) {
  std::vector<double> x(sc.target.data().begin(), sc.target.data().end());
  std::vector<double> d(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) d[k] = sc.source.data()[k] - x[k];
  auto dist = [&](const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) acc += (y[k] - sc.source.data()[k]) * (y[k] - sc.source.data()[k]);
    return std::sqrt(acc);
  };
  double step = dist(x) * cfg.eta;
  std::vector<bool> out;
  while (out.size() < cfg.global_max_queries && step >= cfg.tolerance) {
    std::vector<double> cand(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) cand[k] = std::clamp(x[k] + step * d[k], 0.0, 1.0);
    if (dist(cand) >= dist(x)) break;
    const bool in = sc.in_target_region(Image(sc.target.shape(), cand));
    out.push_back(in);
    if (!in) break;
    x = cand;
    step *= cfg.growth;
  }
  return out;
}

TEST(GlobalSearch, MatchesAnalyticHalfspaceMembership) {
  for (int pair = 0; pair < 10; ++pair) {
    Rng rng(100 + pair);
    const auto sc = synthetic::make_segment_scenario({3, 16, 16}, 0.3 + 0.04 * pair, rng);
    PrototypeOracle oracle = sc.oracle();
    CountedOracle counted(oracle, {10000, 0});
    AttackConfig cfg;
    cfg.momentum = 0.0;
    cfg = cfg.resolved(sc.source.shape());
    AttackState st = AttackState::start(sc.source, sc.target);
    global_search(counted, sc.target_label, sc.source, sc.target, SoftEdgeMask::zeros(16, 16), cfg, st);

    const auto want = analytic_decisions(sc, cfg);
    ASSERT_EQ(st.log.size(), want.size()) << pair;
    for (std::size_t k = 0; k < want.size(); ++k) EXPECT_EQ(st.log[k].accepted, want[k]) << pair << ":" << k;
  }
}

TEST(GlobalSearch, FullyMaskedPixelsNeverChange) {
  const Shape s{3, 12, 12};
  const auto pair = flat_pair(s, 0.1, 0.9);
  ScalarMap m(12, 12, 0.0);
  for (std::size_t i = 0; i < 12; ++i) m(i, 5) = 1.0;
  const SoftEdgeMask mask(m, {});
  ConstantOracle yes(s, 2, 0);
  CountedOracle counted(yes, {1000, 0});
  AttackConfig cfg;
  cfg.global_max_queries = 20;
  cfg = cfg.resolved(s);
  AttackState st = AttackState::start(pair.source, pair.target);
  global_search(counted, 0, pair.source, pair.target, mask, cfg, st);
  ASSERT_GT(st.global_accepts, 0u);
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < 12; ++i) {
      EXPECT_EQ(st.current(c, i, 5), 0.1);
      EXPECT_NE(st.current(c, i, 4), 0.1);
    }
  }
}

// Patch selection -------------------------------------------------------------

TEST(SelectPatch, OneHotDifferenceKeepsCenterInItsCell) {
  const Shape s{3, 16, 16};
  const Image src = Image::filled(s, 0.5);
  Tensor t = src.to_tensor();
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 8; i < 12; ++i) {
      for (std::size_t j = 4; j < 8; ++j) t(c, i, j) = 0.9;
    }
  }
  const Image adv = clamp01(std::move(t));
  AttackConfig cfg;
  cfg.pool_kernel = 4;
  cfg.top_quantile = 0.01;
  cfg = cfg.resolved(s);
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    const auto p = select_patch(src, adv, cfg, rng);
    EXPECT_GE(p.row, 8u);
    EXPECT_LT(p.row, 12u);
    EXPECT_GE(p.col, 4u);
    EXPECT_LT(p.col, 8u);
  }
}

TEST(SelectPatch, IdenticalImagesSampleEveryCell) {
  const Shape s{1, 16, 16};
  const Image img = Image::filled(s, 0.5);
  AttackConfig cfg;
  cfg.pool_kernel = 4;
  cfg = cfg.resolved(s);
  Rng rng(5);
  std::set<std::pair<std::size_t, std::size_t>> centers;
  for (int k = 0; k < 2000; ++k) {
    const auto p = select_patch(img, img, cfg, rng);
    centers.insert({p.row, p.col});
  }
  EXPECT_EQ(centers.size(), 16u);
}

TEST(SelectPatch, FixedSize) {
  const Shape s{1, 16, 16};
  std::mt19937_64 g(1);
  const Image a = testing::random_image(s, g);
  const Image b = testing::random_image(s, g);
  AttackConfig cfg;
  cfg.patch_min = 7;
  cfg.patch_max = 7;
  cfg = cfg.resolved(s);
  Rng rng(7);
  for (int k = 0; k < 50; ++k) EXPECT_EQ(select_patch(a, b, cfg, rng).size, 7u);
}

TEST(SelectPatch, CentersComeFromTopQuantile) {
  const Shape s{1, 20, 20};
  std::mt19937_64 g(2);
  const Image a = testing::random_image(s, g);
  const Image b = testing::random_image(s, g);
  AttackConfig cfg;
  cfg.pool_kernel = 2;
  cfg.top_quantile = 0.1;
  cfg = cfg.resolved(s);
  const auto pooled = avg_pool(channel_abs_diff(a, b), 2, 2);
  std::vector<double> sorted(pooled.data().begin(), pooled.data().end());
  std::sort(sorted.rbegin(), sorted.rend());
  const double cutoff = sorted[9];  // ceil(0.1 * 100) = 10 eligible cells
  Rng rng(9);
  for (int k = 0; k < 200; ++k) {
    const auto p = select_patch(a, b, cfg, rng);
    EXPECT_GE(pooled(p.row / 2, p.col / 2), cutoff);
  }
}

TEST(PatchRect, ClipsToImage) {
  const Shape s{1, 10, 10};
  const auto inner = patch_rect({5, 5, 4}, s);
  EXPECT_EQ(inner.row0, 3u);
  EXPECT_EQ(inner.row1, 8u);
  const auto corner = patch_rect({0, 9, 6}, s);
  EXPECT_EQ(corner.row0, 0u);
  EXPECT_EQ(corner.row1, 4u);
  EXPECT_EQ(corner.col0, 6u);
  EXPECT_EQ(corner.col1, 10u);
}

TEST(PatchWeight, BorderOfEvenPatchIsExpMinusNineEighths) {
  for (std::size_t p : {2u, 4u, 16u, 64u}) {
    const double sigma = static_cast<double>(p) / 3.0;
    const auto w = gaussian_window(p + 1, sigma);
    EXPECT_NEAR(w(p / 2, 0), std::exp(-9.0 / 8.0), 1e-15);
    EXPECT_NEAR(w(p / 2, 0), 0.3247, 1e-4);
  }
}

// Patch stage -----------------------------------------------------------------

TEST(PatchSearch, AlwaysRejectingSpendsExactlyPatience) {
  const Shape s{3, 16, 16};
  const auto pair = flat_pair(s, 0.2, 0.8);
  ConstantOracle no(s, 2, 1);
  CountedOracle counted(no, {1000, 0});
  const auto cfg = AttackConfig{}.resolved(s);
  AttackState st = AttackState::start(pair.source, pair.target);
  Rng rng(1);
  const auto stop = patch_search(counted, 0, pair.source, SoftEdgeMask::zeros(16, 16), cfg, rng, st);
  EXPECT_EQ(stop, PatchStop::kPatience);
  EXPECT_EQ(counted.used(), 25u);
  EXPECT_EQ(st.current, pair.target);
  for (const auto& e : st.log) {
    EXPECT_FALSE(e.accepted);
    EXPECT_EQ(e.stage, Stage::kPatch);
  }
}

TEST(PatchSearch, NoProgressCandidateCostsNoQuery) {
  const Shape s{1, 16, 16};
  const auto pair = flat_pair(s, 0.2, 0.8);
  ConstantOracle yes(s, 2, 0);
  CountedOracle counted(yes, {1000, 0});
  AttackConfig cfg;
  cfg.max_idle_patches = 10;
  cfg = cfg.resolved(s);
  const SoftEdgeMask frozen(ScalarMap(16, 16, 1.0), {});
  AttackState st = AttackState::start(pair.source, pair.target);
  Rng rng(2);
  const auto stop = patch_search(counted, 0, pair.source, frozen, cfg, rng, st);
  EXPECT_EQ(stop, PatchStop::kStalled);
  EXPECT_EQ(counted.used(), 0u);
  EXPECT_EQ(st.patches_tried, 10u);
  EXPECT_EQ(st.skipped_candidates, 10u);
}

TEST(PatchSearch, StopsWhenCurrentReachesSource) {
  const Shape s{1, 8, 8};
  const Image src = Image::filled(s, 0.4);
  ConstantOracle yes(s, 2, 0);
  CountedOracle counted(yes, {1000, 0});
  const auto cfg = AttackConfig{}.resolved(s);
  AttackState st = AttackState::start(src, src);
  Rng rng(3);
  EXPECT_EQ(patch_search(counted, 0, src, SoftEdgeMask::zeros(8, 8), cfg, rng, st), PatchStop::kConverged);
  EXPECT_EQ(counted.used(), 0u);
}

TEST(PatchSearch, UpdatesStayInsideOnePatch) {
  Rng rng(41);
  const auto sc = synthetic::make_halfspace_scenario({3, 32, 32}, 0.5, rng);
  PrototypeOracle base = sc.oracle();
  Recorder rec(base);
  CountedOracle counted(rec, {400, 0});
  const auto cfg = AttackConfig{}.resolved(sc.source.shape());
  const auto mask = create_soft_edge_mask(sc.target, cfg.mask);
  AttackState st = AttackState::start(sc.source, sc.target);
  Rng patch_rng(1);
  try {
    patch_search(counted, sc.target_label, sc.source, mask, cfg, patch_rng, st);
  } catch (const BudgetExhausted&) {
  }
  ASSERT_FALSE(rec.seen.empty());
  const std::size_t extent = 2 * (*cfg.patch_max / 2) + 1;
  Image current = sc.target;
  for (const auto& [img, label] : rec.seen) {
    std::size_t r0 = 99, r1 = 0, c0 = 99, c1 = 0;
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < 32; ++i) {
        for (std::size_t j = 0; j < 32; ++j) {
          if (img(c, i, j) != current(c, i, j)) {
            r0 = std::min(r0, i), r1 = std::max(r1, i), c0 = std::min(c0, j), c1 = std::max(c1, j);
          }
        }
      }
    }
    if (r0 <= r1) {
      EXPECT_LE(r1 - r0 + 1, extent);
      EXPECT_LE(c1 - c0 + 1, extent);
    }
    if (label == sc.target_label) current = img;
  }
}

// Full attack -----------------------------------------------------------------

TEST(RunTea, ZeroBudgetReturnsTarget) {
  Rng rng(1);
  const auto sc = synthetic::make_halfspace_scenario({3, 16, 16}, 0.5, rng);
  PrototypeOracle o = sc.oracle();
  const auto r = run_tea(o, sc.pair(), AttackConfig{}, MaskVariant::kTea, 0);
  EXPECT_EQ(r.adversarial, sc.target);
  EXPECT_EQ(r.queries_used, 0u);
  EXPECT_EQ(r.turning_point, 0u);
  EXPECT_TRUE(r.exhausted);
  EXPECT_EQ(r.final_distance, r.initial_distance);
}

TEST(RunTea, SharedLabelsArePreconditionErrors) {
  const Shape s{1, 4, 4};
  AttackPair p = flat_pair(s, 0.2, 0.8);
  p.source_label = p.target_label;
  ConstantOracle o(s, 2, 0);
  EXPECT_THROW(run_tea(o, p, AttackConfig{}, MaskVariant::kTea, 10), PreconditionError);
  EXPECT_THROW(label_pair(o, Image::filled(s, 0.1), Image::filled(s, 0.9)), PreconditionError);
}

TEST(RunTea, LabelPairChecksExpectations) {
  Rng rng(2);
  const auto sc = synthetic::make_halfspace_scenario({3, 16, 16}, 0.5, rng);
  PrototypeOracle o = sc.oracle();
  const auto p = label_pair(o, sc.source, sc.target);
  EXPECT_EQ(p.source_label, sc.source_label);
  EXPECT_EQ(p.target_label, sc.target_label);
  EXPECT_THROW(label_pair(o, sc.source, sc.target, Label{0}), PreconditionError);
  EXPECT_THROW(label_pair(o, sc.source, sc.target, std::nullopt, Label{1}), PreconditionError);
}

TEST(RunTea, ShapeMismatch) {
  AttackPair p{Image::filled({1, 4, 4}, 0.1), Image::filled({1, 5, 5}, 0.2), 1, 0};
  ConstantOracle o({1, 4, 4}, 2, 0);
  EXPECT_THROW(run_tea(o, p, AttackConfig{}, MaskVariant::kTea, 10), ShapeError);
}

TEST(RunTea, OnlyTargetAcceptedCostsOneGlobalPlusPatience) {
  const Shape s{3, 16, 16};
  const auto pair = flat_pair(s, 0.2, 0.8);
  OnlyThis oracle(pair.target, 0, 1);
  const auto r = run_tea(oracle, pair, AttackConfig{}, MaskVariant::kTea, 1000);
  EXPECT_EQ(r.global_queries, 1u);
  EXPECT_EQ(r.patch_queries, 25u);
  EXPECT_EQ(r.queries_used, 26u);
  EXPECT_EQ(r.adversarial, pair.target);
  EXPECT_EQ(r.patch_stop, PatchStop::kPatience);
}

TEST(RunTea, BudgetExhaustionIsANormalFinish) {
  Rng rng(3);
  const auto sc = synthetic::make_halfspace_scenario({3, 32, 32}, 0.5, rng);
  PrototypeOracle o = sc.oracle();
  const auto r = run_tea(o, sc.pair(), AttackConfig{}, MaskVariant::kTea, 10);
  EXPECT_TRUE(r.exhausted);
  EXPECT_EQ(r.queries_used, 10u);
  EXPECT_EQ(r.turning_point, 10u);
  EXPECT_FALSE(r.patch_stop.has_value());
}

TEST(RunTea, FixedSeedIsBitIdentical) {
  Rng rng(4);
  const auto sc = synthetic::make_halfspace_scenario({3, 32, 32}, 0.5, rng);
  AttackConfig cfg;
  cfg.seed = 99;
  PrototypeOracle o = sc.oracle();
  const auto first = run_tea(o, sc.pair(), cfg, MaskVariant::kTea, 300);
  for (int k = 0; k < 4; ++k) {
    PrototypeOracle again = sc.oracle();
    const auto r = run_tea(again, sc.pair(), cfg, MaskVariant::kTea, 300);
    EXPECT_EQ(r.log, first.log);
    EXPECT_EQ(r.adversarial, first.adversarial);
  }
}

// Property: over seeds, variants and budgets, every accepted query really
// is in the target region, distances only go down, the log accounts for
// every query, and the tracked distance matches the image.
TEST(RunTea, InvariantsHoldAcrossSeeds) {
  for (int seed = 0; seed < 12; ++seed) {
    Rng rng(500 + seed);
    const auto sc = synthetic::make_halfspace_scenario({3, 24, 24}, 0.35 + 0.025 * seed, rng);
    PrototypeOracle base = sc.oracle();
    Recorder rec(base);
    AttackConfig cfg;
    cfg.seed = seed;
    const auto variant = static_cast<MaskVariant>(seed % 3);
    const std::size_t budget = 50 + 40 * seed;
    const auto r = run_tea(rec, sc.pair(), cfg, variant, budget);

    ASSERT_EQ(r.log.size(), r.queries_used);
    ASSERT_EQ(rec.seen.size(), r.queries_used);
    EXPECT_LE(r.queries_used, budget);
    double prev = r.initial_distance;
    for (std::size_t k = 0; k < r.log.size(); ++k) {
      EXPECT_EQ(r.log[k].query, k + 1);
      const bool in = sc.in_target_region(rec.seen[k].first);
      EXPECT_EQ(r.log[k].accepted, in);
      if (r.log[k].accepted) {
        EXPECT_LE(r.log[k].distance, prev);
        prev = r.log[k].distance;
      }
    }
    EXPECT_LE(r.final_distance, r.initial_distance);
    EXPECT_NEAR(r.final_distance, l2_distance(r.adversarial, sc.source), 1e-9);
    EXPECT_TRUE(sc.in_target_region(r.adversarial));
    EXPECT_EQ(r.turning_point, r.log.empty() ? 0 : r.log.back().query);
  }
}

TEST(RunTea, EdgePixelsAreUntouchedByTea) {
  Rng rng(8);
  const auto sc = synthetic::make_halfspace_scenario({3, 32, 32}, 0.5, rng);
  PrototypeOracle o = sc.oracle();
  const AttackConfig cfg;
  const auto mask = create_soft_edge_mask(sc.target, cfg.mask);
  const auto r = run_tea(o, sc.pair(), cfg, MaskVariant::kTea, 400);
  std::size_t pinned = 0;
  for (std::size_t i = 0; i < 32; ++i) {
    for (std::size_t j = 0; j < 32; ++j) {
      if (mask(i, j) != 1.0) continue;
      ++pinned;
      for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(r.adversarial(c, i, j), sc.target(c, i, j));
    }
  }
  EXPECT_GT(pinned, 0u);
}

}  // namespace
}  // namespace tea
