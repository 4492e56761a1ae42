#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tea/attack.hpp"
#include "tea/edgemask.hpp"
#include "tea/image.hpp"

namespace tea {

// SSIM uses the Gaussian-window constants of Wang et al. (2004).
inline constexpr std::size_t kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;
inline constexpr double kSsimRange = 1.0;

/// Threshold on the normalized gradient used for edge density.
inline constexpr double kEdgeDensityThreshold = 0.2;

struct CurvePoint {
  std::size_t query;
  double distance;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// Distance to the source against queries spent. Between samples the
/// last value carries forward, and past the final sample it stays flat.
class DistanceCurve {
 public:
  DistanceCurve() = default;
  /// Throws ArgumentError unless queries strictly increase and distances are >= 0.
  explicit DistanceCurve(std::vector<CurvePoint> samples);

  /// (0, initial) followed by one sample per logged query.
  static DistanceCurve from_log(double initial, const QueryLog& log);

  /// Carry-forward value; throws ArgumentError for q before the first sample.
  [[nodiscard]] double value_at(std::size_t q) const;
  [[nodiscard]] const std::vector<CurvePoint>& samples() const { return samples_; }
  [[nodiscard]] bool empty() const { return samples_.empty(); }

  friend bool operator==(const DistanceCurve&, const DistanceCurve&) = default;

 private:
  std::vector<CurvePoint> samples_;
};

/// One attacked (pair, seed, variant).
struct PairRecord {
  std::string pair_id;
  std::uint64_t seed = 0;
  MaskVariant variant = MaskVariant::kTea;
  double initial_distance = 0.0;
  double final_distance = 0.0;
  DistanceCurve curve;
  std::size_t turning_point = 0;
  std::size_t queries_used = 0;
  double ssim_to_source = 0.0;
  double edge_density_source = 0.0;
  double edge_density_target = 0.0;
};

/// 100 * (d0 - d) / d0. Throws ArgumentError when d0 <= 0.
double pct_reduction(double d0, double d);

/// Fraction of records whose reduction at `query` is at least `alpha` percent.
double asr(std::span<const PairRecord> records, double alpha, std::size_t query);

/// Trapezoidal area under the curve over [0, up_to]; samples are joined
/// linearly and the last one is held flat beyond the end.
double auc(const DistanceCurve& curve, std::size_t up_to);

/// Per grid query, the median of the records' carry-forward distances.
DistanceCurve median_curve(std::span<const PairRecord> records, std::span<const std::size_t> grid);

/// Mean local SSIM over valid 11x11 windows, averaged over channels.
double ssim(const Image& a, const Image& b);

/// Fraction of pixels whose min-max normalized Sobel magnitude exceeds `threshold`.
double edge_density(const Image& img, double threshold = kEdgeDensityThreshold);

double median(std::vector<double> values);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation (n - 1); 0 for one value
};
MeanStd mean_std(std::span<const double> values);

/// Values <= the median go low, the rest high.
struct MedianSplit {
  double threshold = 0.0;
  std::vector<std::size_t> low;
  std::vector<std::size_t> high;
};
MedianSplit median_split(std::span<const double> values);

enum class StratifyKey { kSsimDecile, kDensityRegime };

struct RecordGroup {
  std::string name;
  std::vector<std::size_t> members;  ///< indices into the record list
};

/// kSsimDecile: ten equal-size bins by ascending SSIM (needs >= 10 records).
/// kDensityRegime: {sparse,dense} source x {sparse,dense} target, split at
/// the median over all source and target densities; always four groups.
std::vector<RecordGroup> stratify(std::span<const PairRecord> records, StratifyKey key);

}  // namespace tea
