#include "tea/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tea/error.hpp"
#include "tea/imageops.hpp"

namespace tea {

DistanceCurve::DistanceCurve(std::vector<CurvePoint> samples) : samples_(std::move(samples)) {
  for (std::size_t k = 0; k < samples_.size(); ++k) {
    if (!(samples_[k].distance >= 0.0)) throw ArgumentError("curve distances must be >= 0");
    if (k > 0 && samples_[k].query <= samples_[k - 1].query) {
      throw ArgumentError("curve queries must strictly increase");
    }
  }
}

DistanceCurve DistanceCurve::from_log(double initial, const QueryLog& log) {
  std::vector<CurvePoint> pts;
  pts.reserve(log.size() + 1);
  pts.push_back({0, initial});
  for (const QueryEntry& e : log) pts.push_back({e.query, e.distance});
  return DistanceCurve(std::move(pts));
}

double DistanceCurve::value_at(std::size_t q) const {
  if (samples_.empty() || q < samples_.front().query) {
    throw ArgumentError("query " + std::to_string(q) + " precedes the curve");
  }
  auto it = std::upper_bound(samples_.begin(), samples_.end(), q,
                             [](std::size_t v, const CurvePoint& p) { return v < p.query; });
  return std::prev(it)->distance;
}

double pct_reduction(double d0, double d) {
  if (!(d0 > 0.0)) throw ArgumentError("pct_reduction needs a positive initial distance");
  return 100.0 * (d0 - d) / d0;
}

double asr(std::span<const PairRecord> records, double alpha, std::size_t query) {
  if (records.empty()) throw ArgumentError("asr over an empty record set");
  if (!(alpha >= 0.0 && alpha <= 100.0)) throw ArgumentError("alpha must lie in [0,100]");
  std::size_t hits = 0;
  for (const PairRecord& r : records) {
    if (pct_reduction(r.initial_distance, r.curve.value_at(query)) >= alpha) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double auc(const DistanceCurve& curve, std::size_t up_to) {
  const auto& s = curve.samples();
  if (s.empty()) throw ArgumentError("auc of an empty curve");
  if (up_to < s.front().query) throw ArgumentError("auc upper limit precedes the curve");
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < s.size() && s[k].query < up_to; ++k) {
    const double q0 = static_cast<double>(s[k].query);
    const double q1 = static_cast<double>(s[k + 1].query);
    const double d0 = s[k].distance;
    const double d1 = s[k + 1].distance;
    if (s[k + 1].query <= up_to) {
      area += 0.5 * (d0 + d1) * (q1 - q0);
    } else {
      const double end = static_cast<double>(up_to);
      const double d_end = d0 + (d1 - d0) * (end - q0) / (q1 - q0);
      area += 0.5 * (d0 + d_end) * (end - q0);
    }
  }
  if (s.back().query < up_to) {
    area += s.back().distance * static_cast<double>(up_to - s.back().query);
  }
  return area;
}

double median(std::vector<double> values) {
  if (values.empty()) throw ArgumentError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

DistanceCurve median_curve(std::span<const PairRecord> records, std::span<const std::size_t> grid) {
  if (records.empty()) throw ArgumentError("median_curve over an empty record set");
  std::vector<CurvePoint> pts;
  pts.reserve(grid.size());
  std::vector<double> column(records.size());
  for (std::size_t q : grid) {
    for (std::size_t k = 0; k < records.size(); ++k) column[k] = records[k].curve.value_at(q);
    pts.push_back({q, median(column)});
  }
  return DistanceCurve(std::move(pts));
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("mean_std of an empty set");
  MeanStd out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

// ---------------------------------------------------------------------------
// SSIM

namespace {

// Valid-mode horizontal then vertical Gaussian correlation of one channel
// plane. Returns an (H - win + 1) x (W - win + 1) map.
std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t h, std::size_t w,
                                 const std::vector<double>& taps) {
  const std::size_t win = taps.size();
  const std::size_t ow = w - win + 1;
  const std::size_t oh = h - win + 1;
  std::vector<double> tmp(h * ow);
  const auto rows = static_cast<std::ptrdiff_t>(h);
#pragma omp parallel for if (h * w >= (1u << 14)) schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (std::size_t v = 0; v < win; ++v) acc += taps[v] * plane[i * w + j + v];
      tmp[i * ow + j] = acc;
    }
  }
  std::vector<double> out(oh * ow);
  const auto orows = static_cast<std::ptrdiff_t>(oh);
#pragma omp parallel for if (h * w >= (1u << 14)) schedule(static)
  for (std::ptrdiff_t i = 0; i < orows; ++i) {
    for (std::size_t j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (std::size_t u = 0; u < win; ++u) acc += taps[u] * tmp[(i + u) * ow + j];
      out[i * ow + j] = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("ssim: " + a.shape().str() + " vs " + b.shape().str());
  }
  const Shape& s = a.shape();
  if (s.height < kSsimWindow || s.width < kSsimWindow) {
    throw ShapeError("ssim needs images of at least 11x11, got " + s.str());
  }
  const auto taps = gaussian_kernel_1d(static_cast<int>(kSsimWindow), kSsimSigma);
  const double c1 = (kSsimK1 * kSsimRange) * (kSsimK1 * kSsimRange);
  const double c2 = (kSsimK2 * kSsimRange) * (kSsimK2 * kSsimRange);
  const std::size_t plane = s.plane();

  double total = 0.0;
  for (std::size_t c = 0; c < s.channels; ++c) {
    std::vector<double> x(a.data().begin() + c * plane, a.data().begin() + (c + 1) * plane);
    std::vector<double> y(b.data().begin() + c * plane, b.data().begin() + (c + 1) * plane);
    std::vector<double> xx(plane), yy(plane), xy(plane);
    for (std::size_t k = 0; k < plane; ++k) {
      xx[k] = x[k] * x[k];
      yy[k] = y[k] * y[k];
      xy[k] = x[k] * y[k];
    }
    const auto mx = filter_valid(x, s.height, s.width, taps);
    const auto my = filter_valid(y, s.height, s.width, taps);
    const auto fxx = filter_valid(xx, s.height, s.width, taps);
    const auto fyy = filter_valid(yy, s.height, s.width, taps);
    const auto fxy = filter_valid(xy, s.height, s.width, taps);

    double sum = 0.0;
    for (std::size_t k = 0; k < mx.size(); ++k) {
      const double vx = fxx[k] - mx[k] * mx[k];
      const double vy = fyy[k] - my[k] * my[k];
      const double cov = fxy[k] - mx[k] * my[k];
      sum += ((2 * mx[k] * my[k] + c1) * (2 * cov + c2)) /
             ((mx[k] * mx[k] + my[k] * my[k] + c1) * (vx + vy + c2));
    }
    total += sum / static_cast<double>(mx.size());
  }
  return total / static_cast<double>(s.channels);
}

double edge_density(const Image& img, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ArgumentError("threshold must lie in [0,1]");
  const ScalarMap gray = grayscale(img);
  const ScalarMap g = gradient_magnitude(sobel(gray, Axis::kHorizontal), sobel(gray, Axis::kVertical));
  const ScalarMap norm = minmax_normalize(g);
  const auto vals = norm.data();
  const auto above = std::count_if(vals.begin(), vals.end(), [&](double v) { return v > threshold; });
  return static_cast<double>(above) / static_cast<double>(vals.size());
}

// ---------------------------------------------------------------------------
// Stratification

MedianSplit median_split(std::span<const double> values) {
  MedianSplit out;
  out.threshold = median({values.begin(), values.end()});
  for (std::size_t k = 0; k < values.size(); ++k) {
    (values[k] <= out.threshold ? out.low : out.high).push_back(k);
  }
  return out;
}

std::vector<RecordGroup> stratify(std::span<const PairRecord> records, StratifyKey key) {
  if (key == StratifyKey::kSsimDecile) {
    if (records.size() < 10) {
      throw ArgumentError("SSIM deciles need at least 10 records, got " + std::to_string(records.size()));
    }
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
      return records[l].ssim_to_source < records[r].ssim_to_source;
    });
    std::vector<RecordGroup> bins(10);
    const std::size_t n = records.size();
    for (std::size_t b = 0; b < 10; ++b) {
      bins[b].name = "decile_" + std::to_string(b + 1);
      for (std::size_t k = b * n / 10; k < (b + 1) * n / 10; ++k) bins[b].members.push_back(order[k]);
    }
    return bins;
  }

  if (records.empty()) throw ArgumentError("density regimes need at least one record");
  std::vector<double> densities;
  densities.reserve(2 * records.size());
  for (const PairRecord& r : records) {
    densities.push_back(r.edge_density_source);
    densities.push_back(r.edge_density_target);
  }
  const double cut = median(densities);
  std::vector<RecordGroup> groups = {
      {"sparse_source/sparse_target", {}},
      {"sparse_source/dense_target", {}},
      {"dense_source/sparse_target", {}},
      {"dense_source/dense_target", {}},
  };
  for (std::size_t k = 0; k < records.size(); ++k) {
    const bool dense_src = records[k].edge_density_source > cut;
    const bool dense_tgt = records[k].edge_density_target > cut;
    groups[(dense_src ? 2 : 0) + (dense_tgt ? 1 : 0)].members.push_back(k);
  }
  return groups;
}

}  // namespace tea
