// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <unistd.h>
#include <vector>

#include "oracles.hpp"
#include "tea/attack.hpp"
#include "tea/edgemask.hpp"
#include "tea/error.hpp"
#include "tea/harness.hpp"
#include "tea/imageops.hpp"
#include "tea/metrics.hpp"
#include "tea/synthetic.hpp"

namespace {

using namespace tea;
namespace fs = std::filesystem;

constexpr double kConvTol = 1e-9;
constexpr double kConvSeconds = 5.0;
constexpr std::size_t kConvMaps = 120;
constexpr double kInvolutionTol = 1e-12;
constexpr double kBudgetTol = 1e-6;
constexpr std::size_t kPairs = 50;
constexpr std::size_t kBudget = 500;
constexpr double kCrossLow = 0.3;
constexpr double kCrossHigh = 0.7;
constexpr double kReductionMargin = 10.0;  // percentage points below 100 * crossing
constexpr double kSuccessShare = 0.9;
constexpr double kAblationSlack = 1.0;  // percentage points
constexpr std::size_t kHalfspacePairs = 20;
constexpr double kSsimSelfTol = 1e-12;
constexpr double kSsimRefTol = 1e-6;
constexpr std::size_t kSeeds = 5;

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

class Recorder final : public Oracle {
 public:
  explicit Recorder(Oracle& inner) : inner_(inner) {}
  Label classify(const Image& img) override {
    seen.push_back(img);
    return inner_.classify(img);
  }
  [[nodiscard]] Shape input_shape() const override { return inner_.input_shape(); }
  [[nodiscard]] std::size_t num_classes() const override { return inner_.num_classes(); }

  std::vector<Image> seen;

 private:
  Oracle& inner_;
};

class OnlyThis final : public Oracle {
 public:
  OnlyThis(Image keep, Label target, Label other) : keep_(std::move(keep)), target_(target), other_(other) {}
  Label classify(const Image& img) override { return img == keep_ ? target_ : other_; }
  [[nodiscard]] Shape input_shape() const override { return keep_.shape(); }
  [[nodiscard]] std::size_t num_classes() const override { return 2; }

 private:
  Image keep_;
  Label target_;
  Label other_;
};

void convolution_equivalence() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> dim(3, 16);
  double worst = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t n = 0; n < kConvMaps; ++n) {
    const auto m = testing::random_map(dim(rng), dim(rng), rng);
    worst = std::max(worst, testing::max_abs_diff(sobel(m, Axis::kHorizontal), testing::dense_correlate(m, testing::kSobelX)));
    worst = std::max(worst, testing::max_abs_diff(sobel(m, Axis::kVertical), testing::dense_correlate(m, testing::kSobelY)));
    for (int b : {3, 5, 7}) {
      worst = std::max(worst, testing::max_abs_diff(gaussian_blur(m, b), testing::dense_correlate(m, testing::gaussian_2d(b))));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report("convolution_equivalence", worst <= kConvTol && secs < kConvSeconds,
         fmt("%zu maps, max |diff| %.3g (tol %.0e), %.3f s (limit %.0f s)", kConvMaps, worst, kConvTol, secs,
             kConvSeconds));
}

void mask_contract() {
  const Image step = testing::vertical_step({3, 32, 32});
  bool ranked = true;
  bool bounded = true;
  double inv_err = 0.0;
  double budget_err = 0.0;
  for (double gamma : {0.5, 1.0, 2.0}) {
    EdgeMaskParams p;
    p.gamma = gamma;
    const auto m = create_soft_edge_mask(step, p);
    for (std::size_t i = 0; i < 32; ++i) ranked = ranked && m(i, 16) > m(i, 26) && m(i, 15) > m(i, 5);
    for (double v : m.map().data()) bounded = bounded && v >= 0.0 && v <= std::min(gamma, 1.0);
    const auto twice = variant_mask(variant_mask(m, MaskVariant::kInv), MaskVariant::kInv);
    inv_err = std::max(inv_err, testing::max_abs_diff(twice.map(), m.map()));
    budget_err = std::max(budget_err,
                          std::abs(variant_mask(m, MaskVariant::kHalf).editable_budget() - m.editable_budget()));
  }
  report("mask_contract", ranked && bounded && inv_err <= kInvolutionTol && budget_err <= kBudgetTol,
         fmt("step > step+-10 on every row: %s; range ok: %s; INV(INV) err %.3g (tol %.0e); HALF budget err %.3g "
             "(tol %.0e)",
             ranked ? "yes" : "no", bounded ? "yes" : "no", inv_err, kInvolutionTol, budget_err, kBudgetTol));
}

struct SuiteRun {
  double crossing = 0.0;
  double reduction[3] = {0, 0, 0};  // by MaskVariant
};

// The 50-pair halfspace suite. TEA runs are recorded and replayed for the
// safety, monotonicity and accounting checks.
std::vector<SuiteRun> halfspace_suite() {
  std::vector<SuiteRun> runs;
  std::size_t violations = 0;
  std::size_t accounting_errors = 0;
  std::size_t queries = 0;
  for (std::size_t seed = 0; seed < kPairs; ++seed) {
    Rng rng(seed);
    SuiteRun run;
    run.crossing = std::uniform_real_distribution<double>(kCrossLow, kCrossHigh)(rng);
    const auto sc = synthetic::make_halfspace_scenario({3, 32, 32}, run.crossing, rng);
    AttackConfig cfg;
    cfg.seed = seed;
    for (MaskVariant v : {MaskVariant::kTea, MaskVariant::kInv, MaskVariant::kHalf}) {
      PrototypeOracle base = sc.oracle();
      Recorder rec(base);
      const auto r = run_tea(rec, sc.pair(), cfg, v, kBudget);
      run.reduction[static_cast<int>(v)] = pct_reduction(r.initial_distance, r.final_distance);
      if (v != MaskVariant::kTea) continue;

      queries += r.queries_used;
      accounting_errors += r.log.size() != r.queries_used || rec.seen.size() != r.queries_used;
      PrototypeOracle replay = sc.oracle();
      double prev = r.initial_distance;
      for (std::size_t k = 0; k < std::min(r.log.size(), rec.seen.size()); ++k) {
        if (!r.log[k].accepted) continue;
        const bool target = replay.classify(rec.seen[k]) == sc.target_label && sc.in_target_region(rec.seen[k]);
        violations += !target || r.log[k].distance > prev;
        prev = r.log[k].distance;
      }
      violations += replay.classify(r.adversarial) != sc.target_label;
    }
    runs.push_back(run);
  }
  report("attack_safety_monotonicity", violations == 0,
         fmt("%zu runs, %zu queries replayed, %zu violations", kPairs, queries, violations));

  // Accounting: every suite run, an explicit budget+1 call, and patience.
  Rng rng(7);
  const auto sc = synthetic::make_halfspace_scenario({3, 32, 32}, 0.5, rng);
  PrototypeOracle inner = sc.oracle();
  Recorder rec(inner);
  CountedOracle counted(rec, {kBudget, 0});
  for (std::size_t k = 0; k < kBudget; ++k) counted.classify(sc.target);
  bool raised = false;
  try {
    counted.classify(sc.target);
  } catch (const BudgetExhausted&) {
    raised = true;
  }
  const bool budget_ok = raised && rec.seen.size() == kBudget && counted.used() == kBudget;

  const Shape s{3, 32, 32};
  const AttackPair flat{Image::filled(s, 0.8), Image::filled(s, 0.2), 1, 0};
  OnlyThis only(flat.target, 0, 1);
  const auto r = run_tea(only, flat, AttackConfig{}, MaskVariant::kTea, 1000);
  const bool patience_ok = r.patch_queries == 25 && r.patch_stop == PatchStop::kPatience;
  report("query_accounting", accounting_errors == 0 && budget_ok && patience_ok,
         fmt("log/used/invocation mismatches %zu; call %zu raises: %s; always-rejecting patch stage spent %zu "
             "queries",
             accounting_errors, kBudget + 1, budget_ok ? "yes" : "no", r.patch_queries));
  return runs;
}

// Replays the global recurrence with mu = 0 and a zero mask, deciding each
// candidate by analytic membership.
std::vector<bool> analytic_decisions(const synthetic::HalfspaceScenario& sc, const AttackConfig& cfg) {
  std::vector<double> x(sc.target.data().begin(), sc.target.data().end());
  std::vector<double> d(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) d[k] = sc.source.data()[k] - x[k];
  auto dist = [&](const std::vector<double>& y) {
    long double acc = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) acc += (y[k] - sc.source.data()[k]) * (y[k] - sc.source.data()[k]);
    return static_cast<double>(std::sqrt(acc));
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

// Run at the default eta, where the first global step usually overshoots,
// and at an eta that moves 5% of the segment per step, so whole accept/reject
// sequences get compared.
void halfspace_equivalence() {
  std::size_t mismatches = 0;
  std::size_t decisions[2] = {0, 0};
  for (int short_steps = 0; short_steps < 2; ++short_steps) {
    for (std::size_t pair = 0; pair < kHalfspacePairs; ++pair) {
      Rng rng(1000 + pair);
      const double crossing = std::uniform_real_distribution<double>(kCrossLow, kCrossHigh)(rng);
      const auto sc = synthetic::make_halfspace_scenario({3, 32, 32}, crossing, rng);
      PrototypeOracle oracle = sc.oracle();
      CountedOracle counted(oracle, {10000, 0});
      AttackConfig cfg;
      cfg.momentum = 0.0;
      if (short_steps) {
        const double d = l2_distance(sc.source, sc.target);
        cfg.eta = 0.05 / (d * d);
      }
      cfg = cfg.resolved(sc.source.shape());
      AttackState st = AttackState::start(sc.source, sc.target);
      global_search(counted, sc.target_label, sc.source, sc.target, SoftEdgeMask::zeros(32, 32), cfg, st);
      const auto want = analytic_decisions(sc, cfg);
      decisions[short_steps] += want.size();
      if (st.log.size() != want.size()) {
        ++mismatches;
        continue;
      }
      for (std::size_t k = 0; k < want.size(); ++k) mismatches += st.log[k].accepted != want[k];
    }
  }
  report("halfspace_equivalence", mismatches == 0,
         fmt("%zu pairs, %zu decisions at default eta + %zu at 5%%-of-segment steps, %zu mismatches",
             kHalfspacePairs, decisions[0], decisions[1], mismatches));
}

void effectiveness_and_ablation(const std::vector<SuiteRun>& runs) {
  std::size_t hits = 0;
  double mean[3] = {0, 0, 0};
  for (const auto& r : runs) {
    hits += r.reduction[0] >= 100.0 * r.crossing - kReductionMargin;
    for (int v = 0; v < 3; ++v) mean[v] += r.reduction[v] / static_cast<double>(runs.size());
  }
  const double share = static_cast<double>(hits) / static_cast<double>(runs.size());
  report("effectiveness", share >= kSuccessShare,
         fmt("%zu/%zu pairs reach (crossing - 0.1) * 100%% reduction in %zu queries (need %.0f%%)", hits,
             runs.size(), kBudget, 100.0 * kSuccessShare));
  const double tea = mean[0], inv = mean[1], half = mean[2];
  report("ablation_ordering", tea + kAblationSlack >= half && half + kAblationSlack >= inv,
         fmt("mean reduction TEA %.2f%% >= HALF %.2f%% >= INV %.2f%% (slack %.0f pp)", tea, half, inv,
             kAblationSlack));
}

PairRecord curve_record(std::vector<CurvePoint> pts) {
  PairRecord r;
  r.initial_distance = pts.front().distance;
  r.final_distance = pts.back().distance;
  r.curve = DistanceCurve(std::move(pts));
  return r;
}

void metrics_suite() {
  const double triangle = auc(DistanceCurve({{0, 10}, {100, 0}}), 100);

  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t asr_violations = 0;
  for (int set = 0; set < 20; ++set) {
    std::vector<PairRecord> recs;
    for (int k = 0; k < 15; ++k) {
      std::vector<CurvePoint> pts{{0, 10.0}};
      double d = 10.0;
      for (std::size_t q = 1; q <= 40; ++q) {
        if (u(rng) < 0.3) {
          d *= u(rng);
          pts.push_back({q * 5, d});
        }
      }
      recs.push_back(curve_record(pts));
    }
    for (double a = 0; a <= 95; a += 5) {
      for (std::size_t q = 0; q <= 200; q += 10) {
        asr_violations += asr(recs, a, q) > asr(recs, a, q + 10);
        asr_violations += asr(recs, a, q) < asr(recs, a + 5, q);
      }
    }
  }

  double self_err = 0.0;
  double ref_err = 0.0;
  for (int k = 0; k < 5; ++k) {
    const Image a = testing::random_image({3, 32, 32}, rng);
    std::vector<double> noisy(a.data().begin(), a.data().end());
    for (double& v : noisy) v = std::clamp(v + 0.2 * (u(rng) - 0.5), 0.0, 1.0);
    const Image b(a.shape(), std::move(noisy));
    self_err = std::max(self_err, std::abs(ssim(a, a) - 1.0));
    ref_err = std::max(ref_err, std::abs(ssim(a, b) - testing::ssim_oracle(a, b)));
  }

  std::size_t split_violations = 0;
  for (std::size_t n = 2; n <= 41; ++n) {
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    const auto split = median_split(v);
    const auto lo = split.low.size(), hi = split.high.size();
    split_violations += lo + hi != n || (lo > hi ? lo - hi : hi - lo) > 1;
  }

  report("metrics_suite",
         triangle == 500.0 && asr_violations == 0 && self_err <= kSsimSelfTol && ref_err <= kSsimRefTol &&
             split_violations == 0,
         fmt("triangle auc %.17g; asr violations %zu; ssim self err %.3g (tol %.0e), reference err %.3g (tol "
             "%.0e); median-split violations %zu",
             triangle, asr_violations, self_err, kSsimSelfTol, ref_err, kSsimRefTol, split_violations));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void determinism() {
  const fs::path root = fs::temp_directory_path() / ("tea_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root / "data");
  Rng rng(11);
  harness::PairManifest manifest;
  for (int k = 0; k < 4; ++k) {
    const std::string id = "pair" + std::to_string(k);
    io::write_tensor(root / "data" / (id + "_s.tea"), synthetic::random_scene({3, 32, 32}, rng));
    io::write_tensor(root / "data" / (id + "_t.tea"), synthetic::random_scene({3, 32, 32}, rng));
    manifest.push_back({id, root / "data" / (id + "_s.tea"), root / "data" / (id + "_t.tea"), {}, {}});
  }
  harness::RunSpec spec;
  spec.manifest = manifest;
  spec.budget = 300;
  spec.seeds = {3};
  spec.out_dir = root / "a";
  harness::run_experiment(spec);
  spec.out_dir = root / "b";
  harness::run_experiment(spec);
  std::size_t files = 0;
  std::size_t differing = 0;
  for (const auto& e : fs::directory_iterator(root / "a" / "queries")) {
    ++files;
    differing += slurp(e.path()) != slurp(root / "b" / "queries" / e.path().filename());
  }

  spec.seeds.clear();
  for (std::size_t s = 0; s < kSeeds; ++s) spec.seeds.push_back(s);
  spec.out_dir.clear();
  const auto res = harness::run_experiment(spec);
  std::vector<double> per_seed;
  for (std::uint64_t s : spec.seeds) {
    std::vector<double> finals;
    for (const auto& r : res.records) {
      if (r.seed == s) finals.push_back(r.final_distance);
    }
    per_seed.push_back(mean_std(finals).mean);
  }
  const auto ms = mean_std(per_seed);
  fs::remove_all(root);
  report("determinism", files == manifest.size() && differing == 0 && std::isfinite(ms.std),
         fmt("%zu query CSVs, %zu differ across two runs; final l2 over %zu seeds %.4f +- %.4f", files, differing,
             kSeeds, ms.mean, ms.std));
}

}  // namespace

int main() {
  try {
    convolution_equivalence();
    mask_contract();
    const auto runs = halfspace_suite();
    halfspace_equivalence();
    effectiveness_and_ablation(runs);
    metrics_suite();
    determinism();
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
