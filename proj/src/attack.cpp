#include "tea/attack.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tea/imageops.hpp"

namespace tea {

namespace {

constexpr std::ptrdiff_t kParallelMin = 1 << 14;

std::size_t scaled(double base, const Shape& shape) {
  const double v = std::round(base * static_cast<double>(shape.height) / 224.0);
  return static_cast<std::size_t>(std::max(1.0, v));
}

// current + step * (velocity ⊙ (1 - M)), the mask broadcast over channels.
Tensor global_candidate(const Image& current, const Tensor& velocity, const SoftEdgeMask& mask,
                        double step) {
  const Shape& s = current.shape();
  Tensor out(s);
  const auto plane = static_cast<std::ptrdiff_t>(s.plane());
  auto x = current.data();
  auto v = velocity.data();
  auto m = mask.map().data();
  auto dst = out.data();
  const auto n = static_cast<std::ptrdiff_t>(s.size());
#pragma omp parallel for if (n >= kParallelMin) schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    dst[k] = x[k] + step * (v[k] * (1.0 - m[k % plane]));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

AttackConfig AttackConfig::resolved(const Shape& shape) const {
  AttackConfig out = *this;
  const std::size_t side = std::min(shape.height, shape.width);
  if (!out.patch_min) out.patch_min = std::min(scaled(16.0, shape), side);
  if (!out.patch_max) out.patch_max = std::min(std::max(*out.patch_min, scaled(64.0, shape)), side);
  if (!out.pool_kernel) out.pool_kernel = std::min(scaled(8.0, shape), side);
  if (!out.pool_stride) out.pool_stride = out.pool_kernel;
  out.validate(shape);
  return out;
}

void AttackConfig::validate(const Shape& shape) const {
  mask.validate();
  if (!(eta > 0.0)) throw ArgumentError("eta must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ArgumentError("momentum must lie in [0,1)");
  if (!(tolerance >= 0.0)) throw ArgumentError("tolerance must be non-negative");
  if (!(growth > 1.0)) throw ArgumentError("growth must exceed 1");
  if (!(improve_factor > 0.0 && improve_factor <= 1.0)) {
    throw ArgumentError("improve_factor must lie in (0,1]");
  }
  if (!(top_quantile > 0.0 && top_quantile <= 1.0)) {
    throw ArgumentError("top_quantile must lie in (0,1]");
  }
  if (patience < 1) throw ArgumentError("patience must be >= 1");
  if (max_inner < 1) throw ArgumentError("max_inner must be >= 1");
  if (max_idle_patches < 1) throw ArgumentError("max_idle_patches must be >= 1");
  const std::size_t side = std::min(shape.height, shape.width);
  if (!patch_min || !patch_max || !pool_kernel || !pool_stride) {
    throw ArgumentError("attack config not resolved for " + shape.str());
  }
  if (!(1 <= *patch_min && *patch_min <= *patch_max && *patch_max <= side)) {
    throw ArgumentError("patch sizes must satisfy 1 <= p_min <= p_max <= min(H,W)");
  }
  if (*pool_kernel < 1 || *pool_kernel > side || *pool_stride < 1) {
    throw ArgumentError("pool kernel must lie in [1, min(H,W)] and stride be >= 1");
  }
}

std::string_view to_string(Stage s) { return s == Stage::kGlobal ? "global" : "patch"; }

Stage parse_stage(std::string_view s) {
  if (s == "global") return Stage::kGlobal;
  if (s == "patch") return Stage::kPatch;
  throw ArgumentError("unknown stage '" + std::string(s) + "'");
}

AttackState AttackState::start(const Image& source, const Image& target) {
  AttackState st;
  st.current = target;
  st.velocity = Tensor(target.shape(), 0.0);
  st.distance = l2_distance(source, target);
  return st;
}

// ---------------------------------------------------------------------------
// Global edge-informed search

void global_search(CountedOracle& oracle, Label target, const Image& source, const Image& start,
                   const SoftEdgeMask& mask, const AttackConfig& cfg, AttackState& state) {
  if (source.shape() != start.shape()) throw ShapeError("global_search: source/target shapes differ");
  if (mask.height() != start.shape().height || mask.width() != start.shape().width) {
    throw ShapeError("global_search: mask does not match image");
  }

  // The direction is fixed at entry; only the momentum and step evolve.
  Tensor direction(start.shape());
  {
    auto d = direction.data();
    auto xs = source.data();
    auto xt = start.data();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = xs[k] - xt[k];
  }
  state.velocity = Tensor(start.shape(), 0.0);
  state.step = l2_distance(source, start) * cfg.eta;

  std::size_t qc = 0;
  while (qc < cfg.global_max_queries && state.step >= cfg.tolerance) {
    {
      auto v = state.velocity.data();
      auto d = direction.data();
      for (std::size_t k = 0; k < v.size(); ++k) {
        v[k] = cfg.momentum * v[k] + (1.0 - cfg.momentum) * d[k];
      }
    }
    Image next = clamp01(global_candidate(state.current, state.velocity, mask, state.step));
    const double next_distance = l2_distance(source, next);
    if (next_distance >= state.distance) break;

    ++qc;
    const Label label = oracle.classify(next);
    ++state.global_queries;
    if (label == target) {
      state.current = std::move(next);
      state.distance = next_distance;
      state.step *= cfg.growth;
      ++state.global_accepts;
      state.log.push_back({oracle.used(), true, state.distance, Stage::kGlobal});
    } else {
      state.log.push_back({oracle.used(), false, state.distance, Stage::kGlobal});
      break;
    }
  }
}

// ---------------------------------------------------------------------------
// Patch selection

PatchRect patch_rect(const PatchChoice& p, const Shape& shape) {
  const std::size_t half = p.size / 2;
  return {p.row > half ? p.row - half : 0, std::min(shape.height, p.row + half + 1),
          p.col > half ? p.col - half : 0, std::min(shape.width, p.col + half + 1)};
}

PatchChoice select_patch(const Image& source, const Image& current, const AttackConfig& cfg,
                         Rng& rng) {
  const std::size_t kernel = cfg.pool_kernel.value();
  const std::size_t stride = cfg.pool_stride.value();
  const ScalarMap pooled = avg_pool(channel_abs_diff(source, current), kernel, stride);

  std::vector<std::size_t> cells(pooled.size());
  std::iota(cells.begin(), cells.end(), std::size_t{0});
  const auto values = pooled.data();
  const bool any = std::any_of(values.begin(), values.end(), [](double v) { return v > 0.0; });
  std::size_t eligible = cells.size();
  if (any) {
    std::stable_sort(cells.begin(), cells.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    const auto want = static_cast<std::size_t>(std::ceil(cfg.top_quantile * static_cast<double>(cells.size())));
    eligible = std::clamp<std::size_t>(want, 1, cells.size());
  }

  std::uniform_int_distribution<std::size_t> pick(0, eligible - 1);
  const std::size_t cell = cells[pick(rng)];
  std::uniform_int_distribution<std::size_t> size(cfg.patch_min.value(), cfg.patch_max.value());

  PatchChoice choice;
  choice.row = (cell / pooled.width()) * stride + kernel / 2;
  choice.col = (cell % pooled.width()) * stride + kernel / 2;
  choice.size = size(rng);
  return choice;
}

// ---------------------------------------------------------------------------
// Patch-based edge-informed search

PatchStop patch_search(CountedOracle& oracle, Label target, const Image& source,
                       const SoftEdgeMask& mask, const AttackConfig& cfg, Rng& rng,
                       AttackState& state) {
  const Shape shape = source.shape();
  if (state.current.shape() != shape) throw ShapeError("patch_search: state/source shapes differ");
  const std::size_t channels = shape.channels;
  std::size_t idle = 0;

  while (state.n_break < cfg.patience) {
    if (state.distance == 0.0) return PatchStop::kConverged;
    if (idle >= cfg.max_idle_patches) return PatchStop::kStalled;

    const PatchChoice choice = select_patch(source, state.current, cfg, rng);
    const PatchRect r = patch_rect(choice, shape);
    const std::size_t ph = r.row1 - r.row0;
    const std::size_t pw = r.col1 - r.col0;
    const std::size_t area = ph * pw;
    ++state.patches_tried;

    // Per-pixel factor G ⊙ (1 - M) over the patch, and the patch contents.
    const double sigma = static_cast<double>(choice.size) / 3.0;
    std::vector<double> weight(area);
    for (std::size_t i = 0; i < ph; ++i) {
      for (std::size_t j = 0; j < pw; ++j) {
        const double di = static_cast<double>(r.row0 + i) - static_cast<double>(choice.row);
        const double dj = static_cast<double>(r.col0 + j) - static_cast<double>(choice.col);
        const double g = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
        weight[i * pw + j] = g * (1.0 - mask(r.row0 + i, r.col0 + j));
      }
    }
    std::vector<double> patch(channels * area);
    std::vector<double> src_patch(channels * area);
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t i = 0; i < ph; ++i) {
        for (std::size_t j = 0; j < pw; ++j) {
          patch[(c * ph + i) * pw + j] = state.current(c, r.row0 + i, r.col0 + j);
          src_patch[(c * ph + i) * pw + j] = source(c, r.row0 + i, r.col0 + j);
        }
      }
    }
    std::vector<double> velocity(channels * area, 0.0);
    std::vector<double> proposal(channels * area);
    state.distance = l2_distance(source, state.current);

    bool queried = false;
    for (std::size_t it = 0; it < cfg.max_inner; ++it) {
      const double step = cfg.eta * state.distance;
      for (std::size_t k = 0; k < patch.size(); ++k) {
        const double local = src_patch[k] - patch[k];
        velocity[k] = cfg.momentum * velocity[k] + (1.0 - cfg.momentum) * local;
        proposal[k] = std::clamp(patch[k] + step * velocity[k] * weight[k % area], 0.0, 1.0);
      }

      Tensor spliced = state.current.to_tensor();
      for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t i = 0; i < ph; ++i) {
          for (std::size_t j = 0; j < pw; ++j) {
            spliced(c, r.row0 + i, r.col0 + j) = proposal[(c * ph + i) * pw + j];
          }
        }
      }
      Image candidate = clamp01(std::move(spliced));
      const double candidate_distance = l2_distance(source, candidate);
      if (candidate_distance >= cfg.improve_factor * state.distance) {
        ++state.skipped_candidates;
        break;
      }

      queried = true;
      const Label label = oracle.classify(candidate);
      ++state.patch_queries;
      if (label == target) {
        patch = proposal;
        state.current = std::move(candidate);
        state.distance = candidate_distance;
        state.n_break = 0;
        ++state.patch_accepts;
        state.log.push_back({oracle.used(), true, state.distance, Stage::kPatch});
      } else {
        ++state.n_break;
        state.log.push_back({oracle.used(), false, state.distance, Stage::kPatch});
        break;
      }
    }
    idle = queried ? 0 : idle + 1;
  }
  return PatchStop::kPatience;
}

// ---------------------------------------------------------------------------
// Driver

AttackPair label_pair(Oracle& oracle, Image source, Image target, std::optional<Label> expected_source,
                      std::optional<Label> expected_target) {
  AttackPair pair;
  pair.source_label = oracle.classify(source);
  pair.target_label = oracle.classify(target);
  if (expected_source && *expected_source != pair.source_label) {
    throw PreconditionError("source classified as " + std::to_string(pair.source_label) +
                            ", expected " + std::to_string(*expected_source));
  }
  if (expected_target && *expected_target != pair.target_label) {
    throw PreconditionError("target classified as " + std::to_string(pair.target_label) +
                            ", expected " + std::to_string(*expected_target));
  }
  if (pair.source_label == pair.target_label) {
    throw PreconditionError("source and target share label " + std::to_string(pair.source_label));
  }
  pair.source = std::move(source);
  pair.target = std::move(target);
  return pair;
}

namespace {

AttackResult finish(const AttackState& st, const CountedOracle& counted, double initial) {
  AttackResult res;
  res.adversarial = st.current;
  res.queries_used = counted.used();
  res.turning_point = st.log.empty() ? 0 : st.log.back().query;
  res.log = st.log;
  res.initial_distance = initial;
  res.final_distance = st.distance;
  res.global_queries = st.global_queries;
  res.global_accepts = st.global_accepts;
  res.patch_queries = st.patch_queries;
  res.patch_accepts = st.patch_accepts;
  res.patches_tried = st.patches_tried;
  res.skipped_candidates = st.skipped_candidates;
  return res;
}

}  // namespace

AttackResult run_tea(Oracle& oracle, const AttackPair& pair, const AttackConfig& cfg,
                     MaskVariant variant, std::size_t budget) {
  if (pair.source_label == pair.target_label) {
    throw PreconditionError("source and target share label " + std::to_string(pair.source_label));
  }
  if (pair.source.shape() != pair.target.shape()) {
    throw ShapeError("source " + pair.source.shape().str() + " and target " +
                     pair.target.shape().str() + " differ in shape");
  }
  const AttackConfig rc = cfg.resolved(pair.target.shape());
  const SoftEdgeMask mask = variant_mask(create_soft_edge_mask(pair.target, rc.mask), variant);

  CountedOracle counted(oracle, {budget, 0});
  Rng rng(rc.seed);
  AttackState state = AttackState::start(pair.source, pair.target);
  const double initial = state.distance;

  bool exhausted = false;
  std::optional<PatchStop> stop;
  try {
    global_search(counted, pair.target_label, pair.source, pair.target, mask, rc, state);
    stop = patch_search(counted, pair.target_label, pair.source, mask, rc, rng, state);
  } catch (const BudgetExhausted&) {
    exhausted = true;
  } catch (const TransportError& e) {
    throw AttackAborted(e.what(), finish(state, counted, initial));
  } catch (const ProtocolError& e) {
    throw AttackAborted(e.what(), finish(state, counted, initial));
  }

  AttackResult res = finish(state, counted, initial);
  res.exhausted = exhausted;
  res.patch_stop = stop;
  return res;
}

}  // namespace tea
