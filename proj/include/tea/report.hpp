#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "tea/metrics.hpp"

namespace tea::report {

struct ReportOptions {
  std::vector<std::size_t> grid;     ///< query checkpoints; empty: 100, 200, ... up to budget
  std::size_t budget = 1000;         ///< fixed budget for the reduction CDF and ablation table
  std::vector<double> alphas{50.0, 75.0};
};

/// Grid 100, 200, ... up to `budget` (and `budget` itself if not a multiple).
std::vector<std::size_t> default_grid(std::size_t budget);

/// Writes the summary tables into `dir` and returns the files written:
///   median_l2.csv        median distance per grid query, one column per variant
///   asr.csv              ASR at each alpha per grid query
///   auc.csv              AUC up to the turning point per record
///   reduction_cdf.csv    fraction of pairs reaching >= r% reduction at the budget
///   ablation.csv         one row per metric, one column per variant
///   seed_stats.csv       mean final distance per seed, then mean and std over seeds
///   ssim_deciles.csv     reduction by SSIM decile (needs >= 10 records per variant)
///   density_regimes.csv  reduction by source/target edge-density regime
/// Output depends only on the records, so persisted runs regenerate the
/// same bytes. Throws ArgumentError for an empty record set.
std::vector<std::filesystem::path> write_report(std::span<const PairRecord> records,
                                                const ReportOptions& opts,
                                                const std::filesystem::path& dir);

}  // namespace tea::report
