#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "tea/edgemask.hpp"
#include "tea/error.hpp"
#include "tea/image.hpp"
#include "tea/oracle.hpp"

namespace tea {

using Rng = std::mt19937_64;

/// Every tunable of the two-stage attack. Patch and pooling sizes left
/// unset are derived from the image height by resolved().
struct AttackConfig {
  EdgeMaskParams mask;

  double eta = 0.05;                   ///< initial step factor
  double momentum = 0.9;               ///< mu, in [0,1)
  double tolerance = 1e-4;             ///< tau, global stage stops once the step is below it
  std::size_t global_max_queries = 200;  ///< qc_max

  std::optional<std::size_t> patch_min;  ///< default 16 * H / 224
  std::optional<std::size_t> patch_max;  ///< default 64 * H / 224
  std::size_t max_inner = 10;            ///< N_max
  std::size_t patience = 25;             ///< consecutive rejected queries that end the patch stage
  double growth = 1.1;                   ///< global step multiplier after an accepted query
  double improve_factor = 0.999;         ///< candidate must reach d_new < improve_factor * d_base

  std::optional<std::size_t> pool_kernel;  ///< default max(1, round(H / 28))
  std::optional<std::size_t> pool_stride;  ///< defaults to the pool kernel
  double top_quantile = 0.1;               ///< fraction of pooled cells eligible as patch centers

  /// Consecutive patches that issue no query before the patch stage gives up.
  std::size_t max_idle_patches = 1000;

  std::uint64_t seed = 0;

  /// Copy with every optional filled in for `shape`; throws ArgumentError
  /// if any invariant fails.
  [[nodiscard]] AttackConfig resolved(const Shape& shape) const;
  void validate(const Shape& shape) const;
};

enum class Stage { kGlobal, kPatch };
std::string_view to_string(Stage s);
Stage parse_stage(std::string_view s);

struct QueryEntry {
  std::size_t query;  ///< 1-based oracle call index
  bool accepted;      ///< candidate kept the target label
  double distance;    ///< l2 distance to the source after this query
  Stage stage;

  friend bool operator==(const QueryEntry&, const QueryEntry&) = default;
};

using QueryLog = std::vector<QueryEntry>;

/// Mutable state shared by both stages.
struct AttackState {
  Image current;       ///< always classified as the target label
  Tensor velocity;     ///< global-stage momentum
  double step = 0.0;   ///< global-stage step size s
  double distance = 0.0;  ///< l2 distance of `current` to the source (d_base)
  std::size_t n_break = 0;
  QueryLog log;

  std::size_t global_queries = 0;
  std::size_t global_accepts = 0;
  std::size_t patch_queries = 0;
  std::size_t patch_accepts = 0;
  std::size_t patches_tried = 0;
  std::size_t skipped_candidates = 0;  ///< candidates dropped by the improvement check

  static AttackState start(const Image& source, const Image& target);
};

/// Momentum interpolation from the target toward the source over the
/// editable (1 - M) part of the image. Stops on the first rejected query,
/// after global_max_queries, when the step drops below the tolerance, or,
/// without querying, when a candidate would not reduce the distance.
///
/// BudgetExhausted from the oracle propagates; `state` then holds the last
/// accepted point.
void global_search(CountedOracle& oracle, Label target, const Image& source, const Image& start,
                   const SoftEdgeMask& mask, const AttackConfig& cfg, AttackState& state);

struct PatchChoice {
  std::size_t row;   ///< center
  std::size_t col;
  std::size_t size;  ///< sampled p; the patch spans |i - row| <= p/2, |j - col| <= p/2

  friend bool operator==(const PatchChoice&, const PatchChoice&) = default;
};

/// Rectangle of a patch clipped to the image, half-open.
struct PatchRect {
  std::size_t row0, row1, col0, col1;
};
PatchRect patch_rect(const PatchChoice& p, const Shape& shape);

/// Picks a patch center among the pooled cells with the largest channel-summed
/// |source - current| (top top_quantile fraction; all cells when the images
/// agree) and a size uniform in [patch_min, patch_max]. `cfg` must be resolved.
PatchChoice select_patch(const Image& source, const Image& current, const AttackConfig& cfg, Rng& rng);

enum class PatchStop {
  kPatience,   ///< `patience` consecutive rejected queries
  kConverged,  ///< current equals the source
  kStalled,    ///< max_idle_patches patches in a row produced no query
};

/// Gaussian-windowed local interpolation on randomly chosen high-difference
/// patches. A candidate whose distance is not below improve_factor * d_base
/// ends the patch without a query; a rejected query ends the patch and
/// counts toward patience; an accepted one resets it.
///
/// BudgetExhausted propagates with `state` holding the best point so far.
PatchStop patch_search(CountedOracle& oracle, Label target, const Image& source,
                       const SoftEdgeMask& mask, const AttackConfig& cfg, Rng& rng,
                       AttackState& state);

struct AttackPair {
  Image source;
  Image target;
  Label source_label = 0;
  Label target_label = 0;
};

/// Classifies both images (outside any budget) and checks they differ.
/// Throws PreconditionError when they share a label or disagree with the
/// expected labels.
AttackPair label_pair(Oracle& oracle, Image source, Image target,
                      std::optional<Label> expected_source = {},
                      std::optional<Label> expected_target = {});

struct AttackResult {
  Image adversarial;
  std::size_t turning_point = 0;  ///< index of the last query issued
  std::size_t queries_used = 0;
  QueryLog log;
  double initial_distance = 0.0;
  double final_distance = 0.0;
  bool exhausted = false;  ///< stopped because the budget ran out
  std::optional<PatchStop> patch_stop;

  std::size_t global_queries = 0;
  std::size_t global_accepts = 0;
  std::size_t patch_queries = 0;
  std::size_t patch_accepts = 0;
  std::size_t patches_tried = 0;
  std::size_t skipped_candidates = 0;
};

/// Raised when the oracle fails mid-run (transport or protocol error).
/// Carries everything done up to the failure.
class AttackAborted : public Error {
 public:
  AttackAborted(const std::string& what, AttackResult partial)
      : Error(what), partial_(std::move(partial)) {}
  [[nodiscard]] const AttackResult& partial() const { return partial_; }

 private:
  AttackResult partial_;
};

/// Full attack: mask from the target, variant transform, global stage,
/// patch stage, all under one budget. Running out of budget is a normal
/// finish (result.exhausted).
AttackResult run_tea(Oracle& oracle, const AttackPair& pair, const AttackConfig& cfg,
                     MaskVariant variant, std::size_t budget);

}  // namespace tea
