// Command-line front-end: mask, attack, bench, ablate, report, synth.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tea/edgemask.hpp"
#include "tea/error.hpp"
#include "tea/harness.hpp"
#include "tea/io.hpp"
#include "tea/report.hpp"
#include "tea/synthetic.hpp"

namespace fs = std::filesystem;
using namespace tea;

namespace {

struct CommonFlags {
  std::string config;
  std::string manifest;
  std::string oracle;
  std::string variant;
  std::optional<std::size_t> budget;
  std::string seeds;
  std::optional<std::size_t> workers;
  std::string out;
  std::string grid;
  std::string resize;
  std::string interp;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool batch) {
  cmd->add_option("--config", f.config, "JSON settings file (flags override it)");
  cmd->add_option("--oracle", f.oracle, "prototype | linear | remote:URL");
  cmd->add_option("--variant", f.variant, "tea | inv | half");
  cmd->add_option("--budget", f.budget, "query budget per run");
  cmd->add_option("--seeds", f.seeds, "comma-separated seeds");
  cmd->add_option("--out", f.out, "output directory (TEA_OUT overrides)");
  cmd->add_option("--resize", f.resize, "resize inputs to HxW");
  cmd->add_option("--interp", f.interp, "nearest | bilinear (with --resize)");
  if (batch) {
    cmd->add_option("--manifest", f.manifest, "pair manifest CSV");
    cmd->add_option("--workers", f.workers, "concurrent attack runs");
    cmd->add_option("--grid", f.grid, "comma-separated query checkpoints for the report");
  }
}

/// Defaults, then the config file, then flags, then TEA_OUT.
struct Resolved {
  harness::Settings settings;
  harness::RunSpec run;
  std::vector<std::size_t> grid;
};

Resolved resolve(const CommonFlags& f) {
  Resolved r;
  harness::Settings& s = r.settings;
  if (!f.config.empty()) s = harness::load_settings(f.config);
  if (!f.manifest.empty()) s.manifest = fs::path(f.manifest);
  if (!f.oracle.empty()) s.oracle = harness::parse_oracle_flag(f.oracle);
  if (!f.variant.empty()) s.variant = parse_mask_variant(f.variant);
  if (f.budget) s.budget = *f.budget;
  if (!f.seeds.empty()) s.seeds = harness::parse_seed_list(f.seeds);
  if (f.workers) s.workers = *f.workers;
  if (!f.out.empty()) s.out = fs::path(f.out);
  if (!f.grid.empty()) s.grid = harness::parse_grid(f.grid);
  if (!f.resize.empty()) s.resize = io::parse_hw(f.resize);
  if (!f.interp.empty()) s.interpolation = io::parse_interpolation(f.interp);
  if (const char* env = std::getenv("TEA_OUT"); env && *env) s.out = fs::path(env);

  harness::RunSpec& run = r.run;
  if (s.oracle) run.oracle = *s.oracle;
  run.attack = s.attack;
  if (s.variant) run.variants = {*s.variant};
  if (s.budget) run.budget = *s.budget;
  if (s.seeds) run.seeds = *s.seeds;
  if (s.workers) run.workers = *s.workers;
  if (s.out) run.out_dir = *s.out;
  run.ingest.resize = s.resize;
  if (s.interpolation) run.ingest.interpolation = *s.interpolation;
  if (s.grid) r.grid = *s.grid;
  return r;
}

void print_outcome(const harness::ExperimentResult& res) {
  for (const PairRecord& rec : res.records) {
    std::cout << rec.pair_id << " variant=" << to_string(rec.variant) << " seed=" << rec.seed
              << " l2 " << rec.initial_distance << " -> " << rec.final_distance << " ("
              << pct_reduction(rec.initial_distance, rec.final_distance) << "% reduction)"
              << " queries=" << rec.queries_used << " turning_point=" << rec.turning_point << '\n';
  }
  for (const auto& sk : res.skipped) std::cerr << "skipped " << sk.pair_id << ": " << sk.reason << '\n';
  std::cout << res.records.size() << " runs, " << res.skipped.size() << " skipped, " << res.total_queries
            << " queries\n";
}

int run_batch(Resolved r, bool ablate) {
  if (!r.settings.manifest) throw ArgumentError("--manifest is required");
  r.run.manifest = harness::read_manifest(*r.settings.manifest);
  if (ablate) r.run.variants = {MaskVariant::kTea, MaskVariant::kInv, MaskVariant::kHalf};
  const auto res = harness::run_experiment(r.run);
  print_outcome(res);
  if (!r.run.out_dir.empty() && !res.records.empty()) {
    report::ReportOptions opts;
    opts.grid = r.grid;
    opts.budget = r.run.budget;
    for (const auto& p : report::write_report(res.records, opts, r.run.out_dir / "report")) {
      std::cout << "wrote " << p.string() << '\n';
    }
  }
  return res.records.empty() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge-informed targeted hard-label attack engine"};
  app.require_subcommand(1);

  CommonFlags f;

  auto* mask = app.add_subcommand("mask", "write the soft edge mask of an image");
  std::string mask_image;
  std::string mask_out;
  mask->add_option("image", mask_image, "input PNG or tensor file")->required();
  mask->add_option("output", mask_out, "output file (.png, otherwise a tensor file)")->required();
  mask->add_option("--config", f.config, "JSON settings file");
  mask->add_option("--variant", f.variant, "tea | inv | half");
  mask->add_option("--resize", f.resize, "resize input to HxW");
  mask->add_option("--interp", f.interp, "nearest | bilinear");

  auto* attack = app.add_subcommand("attack", "attack a single source/target pair");
  std::string source;
  std::string target;
  attack->add_option("--source", source, "image to imitate")->required();
  attack->add_option("--target", target, "image carrying the target label")->required();
  add_common(attack, f, false);

  auto* bench = app.add_subcommand("bench", "attack every pair in a manifest");
  add_common(bench, f, true);

  auto* ablate = app.add_subcommand("ablate", "run TEA, INV and HALF masks over a manifest");
  add_common(ablate, f, true);

  auto* rep = app.add_subcommand("report", "rebuild report tables from a persisted run");
  std::string run_dir;
  std::size_t rep_budget = 1000;
  rep->add_option("run_dir", run_dir, "directory holding summary.json")->required();
  rep->add_option("--budget", rep_budget, "budget for the reduction CDF and ablation tables");
  rep->add_option("--grid", f.grid, "comma-separated query checkpoints");
  rep->add_option("--out", f.out, "where to write the tables (default RUN_DIR/report)");

  auto* synth = app.add_subcommand("synth", "generate random scene pairs and a manifest");
  std::string synth_dir;
  std::size_t synth_pairs = 10;
  std::uint64_t synth_seed = 0;
  std::string synth_shape = "32x32";
  std::size_t synth_channels = 3;
  synth->add_option("dir", synth_dir, "output directory")->required();
  synth->add_option("--pairs", synth_pairs, "number of pairs");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--size", synth_shape, "HxW");
  synth->add_option("--channels", synth_channels, "1 or 3");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (mask->parsed()) {
      const Resolved r = resolve(f);
      const Image img = io::ingest_image(mask_image, r.run.ingest);
      SoftEdgeMask m = create_soft_edge_mask(img, r.run.attack.mask);
      if (r.settings.variant) m = variant_mask(m, *r.settings.variant);
      const Shape shape{1, m.height(), m.width()};
      if (fs::path(mask_out).extension() == ".png") {
        io::write_png(mask_out, Image(shape, std::vector<double>(m.map().data().begin(), m.map().data().end())));
      } else {
        io::write_tensor(mask_out, shape, m.map().data());
      }
      std::cout << "editable budget " << m.editable_budget() << " of " << shape.plane() << " pixels\n";
      return 0;
    }
    if (attack->parsed()) {
      Resolved r = resolve(f);
      r.run.manifest = {{"pair", fs::path(source), fs::path(target), std::nullopt, std::nullopt}};
      const auto res = harness::run_experiment(r.run);
      print_outcome(res);
      return res.records.empty() ? 1 : 0;
    }
    if (bench->parsed()) return run_batch(resolve(f), false);
    if (ablate->parsed()) return run_batch(resolve(f), true);
    if (rep->parsed()) {
      const auto records = harness::load_records(run_dir);
      report::ReportOptions opts;
      opts.budget = rep_budget;
      if (!f.grid.empty()) opts.grid = harness::parse_grid(f.grid);
      fs::path dest = f.out.empty() ? fs::path(run_dir) / "report" : fs::path(f.out);
      if (const char* env = std::getenv("TEA_OUT"); env && *env) dest = env;
      for (const auto& p : report::write_report(records, opts, dest)) std::cout << "wrote " << p.string() << '\n';
      return 0;
    }
    if (synth->parsed()) {
      const auto [h, w] = io::parse_hw(synth_shape);
      const Shape shape{synth_channels, h, w};
      fs::create_directories(synth_dir);
      Rng rng(synth_seed);
      harness::PairManifest manifest;
      for (std::size_t k = 0; k < synth_pairs; ++k) {
        const std::string id = "pair" + std::to_string(k);
        const fs::path src = id + "_source.tea";
        const fs::path tgt = id + "_target.tea";
        io::write_tensor(fs::path(synth_dir) / src, synthetic::random_scene(shape, rng));
        io::write_tensor(fs::path(synth_dir) / tgt, synthetic::random_scene(shape, rng));
        manifest.push_back({id, src, tgt, std::nullopt, std::nullopt});
      }
      harness::write_manifest(fs::path(synth_dir) / "manifest.csv", manifest);
      std::cout << "wrote " << synth_pairs << " pairs to " << synth_dir << '\n';
      return 0;
    }
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
