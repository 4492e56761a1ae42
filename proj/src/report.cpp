#include "tea/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>

#include "tea/error.hpp"

namespace tea::report {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using ByVariant = std::map<MaskVariant, std::vector<PairRecord>>;

ByVariant group_by_variant(std::span<const PairRecord> records) {
  ByVariant out;
  for (const auto& r : records) out[r.variant].push_back(r);
  return out;
}

double reduction_at(const PairRecord& r, std::size_t q) {
  return pct_reduction(r.initial_distance, r.curve.value_at(q));
}

class CsvFile {
 public:
  CsvFile(const fs::path& path, std::vector<fs::path>& written) : path_(path), out_(path, std::ios::trunc) {
    if (!out_) throw IoError("cannot write " + path.string());
    written.push_back(path);
  }
  ~CsvFile() = default;

  template <typename... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cells, first = false), ...);
    out_ << '\n';
  }
  std::ofstream& stream() { return out_; }

 private:
  fs::path path_;
  std::ofstream out_;
};

void header_with_variants(std::ofstream& out, std::initializer_list<const char*> lead, const ByVariant& by) {
  bool first = true;
  for (const char* h : lead) {
    out << (first ? "" : ",") << h;
    first = false;
  }
  for (const auto& [v, _] : by) out << ',' << to_string(v);
  out << '\n';
}

}  // namespace

std::vector<std::size_t> default_grid(std::size_t budget) {
  std::vector<std::size_t> grid;
  for (std::size_t q = 100; q <= budget; q += 100) grid.push_back(q);
  if (grid.empty() || grid.back() != budget) grid.push_back(budget);
  return grid;
}

std::vector<fs::path> write_report(std::span<const PairRecord> records, const ReportOptions& opts,
                                   const fs::path& dir) {
  if (records.empty()) throw ArgumentError("report: no records");
  fs::create_directories(dir);
  const std::vector<std::size_t> grid = opts.grid.empty() ? default_grid(opts.budget) : opts.grid;
  const ByVariant by = group_by_variant(records);
  std::vector<fs::path> written;

  {
    CsvFile f(dir / "median_l2.csv", written);
    header_with_variants(f.stream(), {"query"}, by);
    for (std::size_t q : grid) {
      f.stream() << q;
      for (const auto& [v, recs] : by) {
        std::vector<double> vals;
        for (const auto& r : recs) vals.push_back(r.curve.value_at(q));
        f.stream() << ',' << num(median(std::move(vals)));
      }
      f.stream() << '\n';
    }
  }

  {
    CsvFile f(dir / "asr.csv", written);
    header_with_variants(f.stream(), {"query", "alpha"}, by);
    for (double alpha : opts.alphas) {
      for (std::size_t q : grid) {
        f.stream() << q << ',' << num(alpha);
        for (const auto& [v, recs] : by) f.stream() << ',' << num(asr(recs, alpha, q));
        f.stream() << '\n';
      }
    }
  }

  {
    CsvFile f(dir / "auc.csv", written);
    f.row("pair_id", "seed", "variant", "turning_point", "auc");
    for (const auto& r : records) {
      f.row(r.pair_id, r.seed, to_string(r.variant), r.turning_point, num(auc(r.curve, r.turning_point)));
    }
  }

  {
    CsvFile f(dir / "reduction_cdf.csv", written);
    header_with_variants(f.stream(), {"reduction_pct"}, by);
    for (int pct = 0; pct <= 100; ++pct) {
      f.stream() << pct;
      for (const auto& [v, recs] : by) {
        const auto hits = std::count_if(recs.begin(), recs.end(),
                                        [&](const PairRecord& r) { return reduction_at(r, opts.budget) >= pct; });
        f.stream() << ',' << num(static_cast<double>(hits) / static_cast<double>(recs.size()));
      }
      f.stream() << '\n';
    }
  }

  {
    CsvFile f(dir / "ablation.csv", written);
    header_with_variants(f.stream(), {"metric"}, by);
    auto metric_row = [&](const std::string& name, auto&& per_variant) {
      f.stream() << name;
      for (const auto& [v, recs] : by) f.stream() << ',' << num(per_variant(recs));
      f.stream() << '\n';
    };
    auto med = [&](auto&& field) {
      return [field](const std::vector<PairRecord>& recs) {
        std::vector<double> vals;
        for (const auto& r : recs) vals.push_back(field(r));
        return median(std::move(vals));
      };
    };
    metric_row("median_l2_at_budget", med([&](const PairRecord& r) { return r.curve.value_at(opts.budget); }));
    metric_row("median_reduction_pct", med([&](const PairRecord& r) { return reduction_at(r, opts.budget); }));
    for (double alpha : opts.alphas) {
      metric_row("asr_" + num(alpha), [&](const std::vector<PairRecord>& recs) { return asr(recs, alpha, opts.budget); });
    }
    metric_row("median_auc", med([](const PairRecord& r) { return auc(r.curve, r.turning_point); }));
    metric_row("median_ssim", med([](const PairRecord& r) { return r.ssim_to_source; }));
  }

  {
    CsvFile f(dir / "seed_stats.csv", written);
    f.row("variant", "statistic", "final_distance");
    for (const auto& [v, recs] : by) {
      std::map<std::uint64_t, std::vector<double>> per_seed;
      for (const auto& r : recs) per_seed[r.seed].push_back(r.final_distance);
      std::vector<double> means;
      for (const auto& [seed, vals] : per_seed) {
        const double m = mean_std(vals).mean;
        means.push_back(m);
        f.row(to_string(v), "seed_" + std::to_string(seed), num(m));
      }
      const MeanStd ms = mean_std(means);
      f.row(to_string(v), "mean", num(ms.mean));
      f.row(to_string(v), "std", num(ms.std));
    }
  }

  auto stratified = [&](const char* name, StratifyKey key) {
    CsvFile f(dir / name, written);
    f.row("variant", "group", "count", "median_ssim", "median_reduction_pct");
    for (const auto& [v, recs] : by) {
      if (key == StratifyKey::kSsimDecile && recs.size() < 10) continue;
      for (const RecordGroup& g : stratify(recs, key)) {
        std::vector<double> ssims;
        std::vector<double> reds;
        for (std::size_t k : g.members) {
          ssims.push_back(recs[k].ssim_to_source);
          reds.push_back(reduction_at(recs[k], opts.budget));
        }
        if (g.members.empty()) {
          f.row(to_string(v), g.name, 0, "", "");
        } else {
          f.row(to_string(v), g.name, g.members.size(), num(median(ssims)), num(median(reds)));
        }
      }
    }
  };
  stratified("ssim_deciles.csv", StratifyKey::kSsimDecile);
  stratified("density_regimes.csv", StratifyKey::kDensityRegime);

  return written;
}

}  // namespace tea::report
