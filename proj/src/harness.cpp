#include "tea/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tea/error.hpp"
#include "tea/remote_oracle.hpp"

namespace tea::harness {

using nlohmann::json;

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  for (auto& s : out) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    while (!s.empty() && s.front() == ' ') s.erase(s.begin());
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

fs::path resolve(const fs::path& base_dir, const fs::path& p) {
  return p.is_absolute() ? p : base_dir / p;
}

std::optional<Label> parse_label_cell(const std::string& cell, const std::string& what) {
  if (cell.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return static_cast<Label>(v);
  } catch (const std::exception&) {
    throw ArgumentError("manifest: bad " + what + " label '" + cell + "'");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Manifest

PairManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const fs::path base = path.parent_path();
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError("manifest " + path.string() + " is empty");
  const auto header = split(line, ',');
  if (header.size() < 3 || header[0] != "pair_id" || header[1] != "source" || header[2] != "target") {
    throw ArgumentError("manifest header must start with pair_id,source,target");
  }

  PairManifest out;
  std::set<std::string> seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    const auto cells = split(line, ',');
    if (cells.size() < 3) {
      throw ArgumentError("manifest line " + std::to_string(lineno) + ": expected at least 3 fields");
    }
    ManifestEntry e;
    e.pair_id = cells[0];
    if (e.pair_id.empty() || e.pair_id.find_first_of("/\\") != std::string::npos) {
      throw ArgumentError("manifest line " + std::to_string(lineno) + ": bad pair_id '" + e.pair_id + "'");
    }
    if (!seen.insert(e.pair_id).second) throw ArgumentError("manifest: duplicate pair_id '" + e.pair_id + "'");
    e.source = resolve(base, cells[1]);
    e.target = resolve(base, cells[2]);
    if (cells.size() > 3) e.source_label = parse_label_cell(cells[3], "source");
    if (cells.size() > 4) e.target_label = parse_label_cell(cells[4], "target");
    out.push_back(std::move(e));
  }
  return out;
}

void write_manifest(const fs::path& path, const PairManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << "pair_id,source,target,source_label,target_label\n";
  for (const auto& e : manifest) {
    out << e.pair_id << ',' << e.source.generic_string() << ',' << e.target.generic_string() << ',';
    if (e.source_label) out << *e.source_label;
    out << ',';
    if (e.target_label) out << *e.target_label;
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Oracles

OracleSpec parse_oracle_flag(std::string_view flag) {
  OracleSpec spec;
  if (flag == "prototype") {
    spec.kind = OracleSpec::Kind::kPrototype;
  } else if (flag == "linear") {
    spec.kind = OracleSpec::Kind::kLinear;
  } else if (flag.starts_with("remote:")) {
    spec.kind = OracleSpec::Kind::kRemote;
    spec.endpoint = std::string(flag.substr(7));
    if (spec.endpoint.empty()) throw ArgumentError("--oracle remote: needs a URL");
  } else {
    throw ArgumentError("unknown oracle '" + std::string(flag) + "' (expected prototype|linear|remote:URL)");
  }
  return spec;
}

OracleFactory::OracleFactory(const OracleSpec& spec, const PairManifest& manifest,
                             const io::IngestOptions& ingest)
    : spec_(spec) {
  switch (spec_.kind) {
    case OracleSpec::Kind::kPrototype: {
      std::vector<fs::path> paths = spec_.prototypes;
      if (paths.empty()) {
        std::set<std::string> seen;
        for (const auto& e : manifest) {
          for (const auto& p : {e.source, e.target}) {
            if (seen.insert(fs::weakly_canonical(p).string()).second) paths.push_back(p);
          }
        }
      }
      std::vector<Image> protos;
      for (const auto& p : paths) protos.push_back(io::ingest_image(p, ingest));
      shared_ = std::make_shared<PrototypeOracle>(std::move(protos));
      break;
    }
    case OracleSpec::Kind::kLinear: {
      if (!spec_.weights.empty()) {
        io::RawTensor w = io::read_tensor(spec_.weights);
        const std::size_t k = w.shape.channels;
        const std::size_t n = w.shape.height * w.shape.width;
        if (manifest.empty()) throw ArgumentError("linear oracle needs a manifest to infer the image shape");
        const Shape shape = io::ingest_image(manifest.front().source, ingest).shape();
        if (n != shape.size()) {
          throw ShapeError("linear weights have rows of " + std::to_string(n) + ", images have " +
                           std::to_string(shape.size()) + " elements");
        }
        std::vector<std::vector<double>> rows(k);
        for (std::size_t c = 0; c < k; ++c) rows[c].assign(w.data.begin() + c * n, w.data.begin() + (c + 1) * n);
        std::vector<double> biases = spec_.biases.empty() ? std::vector<double>(k, 0.0) : spec_.biases;
        shared_ = std::make_shared<LinearOracle>(shape, std::move(rows), std::move(biases));
      } else {
        if (manifest.empty()) throw ArgumentError("linear oracle needs a manifest to infer the image shape");
        if (spec_.classes < 2) throw ArgumentError("random linear oracle needs classes >= 2");
        const Shape shape = io::ingest_image(manifest.front().source, ingest).shape();
        std::mt19937_64 rng(spec_.seed);
        std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(shape.size())));
        std::vector<std::vector<double>> rows(spec_.classes, std::vector<double>(shape.size()));
        for (auto& r : rows) {
          for (double& v : r) v = gauss(rng);
        }
        shared_ = std::make_shared<LinearOracle>(shape, std::move(rows), std::vector<double>(spec_.classes, 0.0));
      }
      break;
    }
    case OracleSpec::Kind::kRemote:
      break;
  }
}

std::shared_ptr<Oracle> OracleFactory::acquire() const {
  if (shared_) return shared_;
  return std::make_shared<RemoteOracle>(spec_.endpoint);
}

// ---------------------------------------------------------------------------
// Batch runner

void RunSpec::validate() const {
  if (seeds.empty()) throw ArgumentError("at least one seed is required");
  if (variants.empty()) throw ArgumentError("at least one variant is required");
  if (workers == 0) throw ArgumentError("workers must be >= 1");
}

std::string query_csv_name(const std::string& pair_id, MaskVariant variant, std::uint64_t seed) {
  return pair_id + "__" + std::string(to_string(variant)) + "__s" + std::to_string(seed) + ".csv";
}

PairRecord make_record(const std::string& pair_id, std::uint64_t seed, MaskVariant variant,
                       const AttackPair& pair, const AttackResult& result) {
  PairRecord r;
  r.pair_id = pair_id;
  r.seed = seed;
  r.variant = variant;
  r.initial_distance = result.initial_distance;
  r.final_distance = result.final_distance;
  r.curve = DistanceCurve::from_log(result.initial_distance, result.log);
  r.turning_point = result.turning_point;
  r.queries_used = result.queries_used;
  r.ssim_to_source = ssim(result.adversarial, pair.source);
  r.edge_density_source = edge_density(pair.source);
  r.edge_density_target = edge_density(pair.target);
  return r;
}

ExperimentResult run_experiment(const RunSpec& spec) {
  spec.validate();
  ExperimentResult out;

  if (!spec.out_dir.empty()) {
    fs::create_directories(spec.out_dir / "queries");
    fs::create_directories(spec.out_dir / "adversarial");
  }

  const OracleFactory factory(spec.oracle, spec.manifest, spec.ingest);

  // Load and label every pair up front; failures skip the pair.
  struct Ready {
    const ManifestEntry* entry;
    AttackPair pair;
  };
  std::vector<Ready> ready;
  for (const auto& e : spec.manifest) {
    try {
      Image src = io::ingest_image(e.source, spec.ingest);
      Image tgt = io::ingest_image(e.target, spec.ingest);
      auto oracle = factory.acquire();
      ready.push_back({&e, label_pair(*oracle, std::move(src), std::move(tgt), e.source_label, e.target_label)});
    } catch (const std::exception& ex) {
      out.skipped.push_back({e.pair_id, ex.what()});
    }
  }

  struct Job {
    std::size_t pair;
    MaskVariant variant;
    std::uint64_t seed;
    bool writes_files;  // false for repeats of an earlier (pair, variant, seed)
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < ready.size(); ++p) {
    std::set<std::pair<MaskVariant, std::uint64_t>> seen;
    for (MaskVariant v : spec.variants) {
      for (std::uint64_t s : spec.seeds) jobs.push_back({p, v, s, seen.insert({v, s}).second});
    }
  }

  std::vector<std::optional<PairRecord>> slots(jobs.size());
  std::vector<std::string> errors(jobs.size());
  const auto njobs = static_cast<std::ptrdiff_t>(jobs.size());

#pragma omp parallel for schedule(dynamic) num_threads(static_cast<int>(spec.workers))
  for (std::ptrdiff_t k = 0; k < njobs; ++k) {
    const Job& job = jobs[k];
    const Ready& r = ready[job.pair];
    try {
      auto oracle = factory.acquire();
      AttackConfig cfg = spec.attack;
      cfg.seed = job.seed;
      const AttackResult res = run_tea(*oracle, r.pair, cfg, job.variant, spec.budget);
      slots[k] = make_record(r.entry->pair_id, job.seed, job.variant, r.pair, res);
      if (!spec.out_dir.empty() && job.writes_files) {
        const std::string name = query_csv_name(r.entry->pair_id, job.variant, job.seed);
        write_query_csv(spec.out_dir / "queries" / name, r.entry->pair_id, job.seed, res.log);
        io::write_tensor(spec.out_dir / "adversarial" / fs::path(name).replace_extension(".tea"), res.adversarial);
      }
    } catch (const AttackAborted& ex) {
      errors[k] = std::string("aborted after ") + std::to_string(ex.partial().queries_used) +
                  " queries: " + ex.what();
    } catch (const std::exception& ex) {
      errors[k] = ex.what();
    }
  }

  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const std::string& id = ready[jobs[k].pair].entry->pair_id;
    if (slots[k]) {
      out.total_queries += slots[k]->queries_used;
      out.records.push_back(std::move(*slots[k]));
    } else {
      out.skipped.push_back({id + "__" + std::string(to_string(jobs[k].variant)) + "__s" +
                                 std::to_string(jobs[k].seed),
                             errors[k]});
    }
  }

  if (!spec.out_dir.empty()) {
    write_summary(spec.out_dir, out.records);
    write_skipped(spec.out_dir, out.skipped);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

void write_query_csv(const fs::path& path, const std::string& pair_id, std::uint64_t seed, const QueryLog& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "pair_id,seed,query,stage,accepted,distance\n";
  for (const QueryEntry& e : log) {
    out << pair_id << ',' << seed << ',' << e.query << ',' << to_string(e.stage) << ','
        << (e.accepted ? 1 : 0) << ',' << fmt_double(e.distance) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

QueryLog read_query_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("pair_id,seed,query,stage,accepted,distance", 0) != 0) {
    throw ArgumentError(path.string() + ": unexpected query CSV header");
  }
  QueryLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 6) throw ArgumentError(path.string() + ": malformed row '" + line + "'");
    try {
      log.push_back({std::stoul(cells[2]), cells[4] == "1", std::stod(cells[5]), parse_stage(cells[3])});
    } catch (const std::invalid_argument&) {
      throw ArgumentError(path.string() + ": malformed row '" + line + "'");
    }
  }
  return log;
}

void write_summary(const fs::path& out_dir, std::span<const PairRecord> records) {
  json arr = json::array();
  for (const PairRecord& r : records) {
    arr.push_back({
        {"pair_id", r.pair_id},
        {"seed", r.seed},
        {"variant", std::string(to_string(r.variant))},
        {"initial_distance", r.initial_distance},
        {"final_distance", r.final_distance},
        {"turning_point", r.turning_point},
        {"queries_used", r.queries_used},
        {"auc", auc(r.curve, r.turning_point)},
        {"ssim", r.ssim_to_source},
        {"edge_density_source", r.edge_density_source},
        {"edge_density_target", r.edge_density_target},
        {"query_log", "queries/" + query_csv_name(r.pair_id, r.variant, r.seed)},
    });
  }
  std::ofstream out(out_dir / "summary.json", std::ios::trunc);
  if (!out) throw IoError("cannot write " + (out_dir / "summary.json").string());
  out << arr.dump(2) << '\n';
}

void write_skipped(const fs::path& out_dir, std::span<const SkippedPair> skipped) {
  json arr = json::array();
  for (const auto& s : skipped) arr.push_back({{"pair_id", s.pair_id}, {"reason", s.reason}});
  std::ofstream out(out_dir / "skipped.json", std::ios::trunc);
  if (!out) throw IoError("cannot write " + (out_dir / "skipped.json").string());
  out << arr.dump(2) << '\n';
}

std::vector<PairRecord> load_records(const fs::path& out_dir) {
  std::ifstream in(out_dir / "summary.json");
  if (!in) throw IoError("cannot open " + (out_dir / "summary.json").string());
  json arr;
  try {
    arr = json::parse(in);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("summary.json: ") + e.what());
  }
  std::vector<PairRecord> out;
  for (const json& j : arr) {
    PairRecord r;
    r.pair_id = j.at("pair_id").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.variant = parse_mask_variant(j.value("variant", "tea"));
    r.initial_distance = j.at("initial_distance").get<double>();
    r.final_distance = j.at("final_distance").get<double>();
    r.turning_point = j.at("turning_point").get<std::size_t>();
    r.queries_used = j.at("queries_used").get<std::size_t>();
    r.ssim_to_source = j.at("ssim").get<double>();
    r.edge_density_source = j.at("edge_density_source").get<double>();
    r.edge_density_target = j.at("edge_density_target").get<double>();
    const fs::path log_path = out_dir / j.at("query_log").get<std::string>();
    r.curve = DistanceCurve::from_log(r.initial_distance, read_query_csv(log_path));
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Settings

void apply_attack_json(const std::string& json_text, AttackConfig& cfg) {
  const json j = json::parse(json_text);
  if (!j.is_object()) throw ArgumentError("\"attack\" must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "low_threshold") cfg.mask.low_threshold = v.get<double>();
    else if (key == "high_threshold") cfg.mask.high_threshold = v.get<double>();
    else if (key == "blur_kernel") cfg.mask.blur_kernel = v.get<int>();
    else if (key == "gamma") cfg.mask.gamma = v.get<double>();
    else if (key == "epsilon") cfg.mask.epsilon = v.get<double>();
    else if (key == "eta") cfg.eta = v.get<double>();
    else if (key == "momentum") cfg.momentum = v.get<double>();
    else if (key == "tolerance") cfg.tolerance = v.get<double>();
    else if (key == "global_max_queries") cfg.global_max_queries = v.get<std::size_t>();
    else if (key == "patch_min") cfg.patch_min = v.get<std::size_t>();
    else if (key == "patch_max") cfg.patch_max = v.get<std::size_t>();
    else if (key == "max_inner") cfg.max_inner = v.get<std::size_t>();
    else if (key == "patience") cfg.patience = v.get<std::size_t>();
    else if (key == "growth") cfg.growth = v.get<double>();
    else if (key == "improve_factor") cfg.improve_factor = v.get<double>();
    else if (key == "pool_kernel") cfg.pool_kernel = v.get<std::size_t>();
    else if (key == "pool_stride") cfg.pool_stride = v.get<std::size_t>();
    else if (key == "top_quantile") cfg.top_quantile = v.get<double>();
    else if (key == "max_idle_patches") cfg.max_idle_patches = v.get<std::size_t>();
    else throw ArgumentError("unknown attack setting '" + key + "'");
  }
}

Settings load_settings(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ArgumentError("config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ArgumentError("config must be a JSON object");
  const fs::path base = path.parent_path();
  Settings s;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "manifest") {
        s.manifest = resolve(base, v.get<std::string>());
      } else if (key == "attack") {
        apply_attack_json(v.dump(), s.attack);
      } else if (key == "oracle") {
        OracleSpec o;
        const std::string kind = v.at("kind").get<std::string>();
        if (kind == "prototype") {
          o.kind = OracleSpec::Kind::kPrototype;
          for (const auto& p : v.value("prototypes", json::array())) o.prototypes.push_back(resolve(base, p.get<std::string>()));
        } else if (kind == "linear") {
          o.kind = OracleSpec::Kind::kLinear;
          if (v.contains("weights")) o.weights = resolve(base, v.at("weights").get<std::string>());
          o.biases = v.value("biases", std::vector<double>{});
          o.classes = v.value("classes", std::size_t{0});
          o.seed = v.value("seed", std::uint64_t{0});
        } else if (kind == "remote") {
          o.kind = OracleSpec::Kind::kRemote;
          o.endpoint = v.at("endpoint").get<std::string>();
        } else {
          throw ArgumentError("unknown oracle kind '" + kind + "'");
        }
        s.oracle = std::move(o);
      } else if (key == "variant") {
        s.variant = parse_mask_variant(v.get<std::string>());
      } else if (key == "budget") {
        s.budget = v.get<std::size_t>();
      } else if (key == "seeds") {
        s.seeds = v.get<std::vector<std::uint64_t>>();
      } else if (key == "workers") {
        s.workers = v.get<std::size_t>();
      } else if (key == "out") {
        s.out = resolve(base, v.get<std::string>());
      } else if (key == "grid") {
        s.grid = v.get<std::vector<std::size_t>>();
      } else if (key == "resize") {
        s.resize = io::parse_hw(v.get<std::string>());
      } else if (key == "interpolation") {
        s.interpolation = io::parse_interpolation(v.get<std::string>());
      } else {
        throw ArgumentError("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ArgumentError("config " + path.string() + ": " + e.what());
  }
  return s;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view csv) {
  std::vector<std::uint64_t> out;
  for (const auto& cell : split(csv, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ArgumentError("bad seed '" + cell + "'");
    }
  }
  if (out.empty()) throw ArgumentError("empty seed list");
  return out;
}

std::vector<std::size_t> parse_grid(std::string_view csv) {
  std::vector<std::size_t> out;
  for (const auto& cell : split(csv, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoul(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ArgumentError("bad grid point '" + cell + "'");
    }
  }
  if (!std::is_sorted(out.begin(), out.end()) || std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw ArgumentError("grid points must strictly increase");
  }
  return out;
}

}  // namespace tea::harness
