#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tea/attack.hpp"
#include "tea/io.hpp"
#include "tea/metrics.hpp"
#include "tea/oracle.hpp"

namespace tea::harness {

namespace fs = std::filesystem;

struct ManifestEntry {
  std::string pair_id;
  fs::path source;
  fs::path target;
  std::optional<Label> source_label;
  std::optional<Label> target_label;
};
using PairManifest = std::vector<ManifestEntry>;

/// CSV with header `pair_id,source,target[,source_label,target_label]`.
/// Relative paths resolve against the manifest's directory; empty label
/// cells mean "not checked". Duplicate pair ids are rejected.
PairManifest read_manifest(const fs::path& path);
void write_manifest(const fs::path& path, const PairManifest& manifest);

struct OracleSpec {
  enum class Kind { kPrototype, kLinear, kRemote };
  Kind kind = Kind::kPrototype;

  /// kPrototype: class images in label order. Empty means "every distinct
  /// image in the manifest, in order of first appearance".
  std::vector<fs::path> prototypes;

  /// kLinear: either a TEA1 weight file shaped (K, 1, C*H*W) plus biases,
  /// or, with no file, K random rows drawn from `seed`.
  fs::path weights;
  std::vector<double> biases;
  std::size_t classes = 0;
  std::uint64_t seed = 0;

  /// kRemote
  std::string endpoint;
};

/// "prototype", "linear" or "remote:URL".
OracleSpec parse_oracle_flag(std::string_view flag);

/// Hands out oracles to attack runs. Synthetic oracles are built once and
/// shared (they are immutable); every remote acquisition opens its own
/// client.
class OracleFactory {
 public:
  OracleFactory(const OracleSpec& spec, const PairManifest& manifest, const io::IngestOptions& ingest);
  std::shared_ptr<Oracle> acquire() const;

 private:
  OracleSpec spec_;
  std::shared_ptr<Oracle> shared_;
};

struct RunSpec {
  PairManifest manifest;
  OracleSpec oracle;
  AttackConfig attack;
  std::vector<MaskVariant> variants{MaskVariant::kTea};
  std::size_t budget = 1000;
  std::vector<std::uint64_t> seeds{0};
  std::size_t workers = 1;
  fs::path out_dir;  ///< empty: keep everything in memory
  io::IngestOptions ingest;

  void validate() const;
};

struct SkippedPair {
  std::string pair_id;
  std::string reason;
};

struct ExperimentResult {
  std::vector<PairRecord> records;  ///< ordered by (pair, variant, seed)
  std::vector<SkippedPair> skipped;
  std::size_t total_queries = 0;
};

/// Runs every (pair, variant, seed) combination, `workers` at a time. Pairs
/// failing the label preconditions are skipped and listed; any other
/// per-run failure is recorded the same way and never stops the batch.
/// With an output directory, writes per-query CSVs, adversarial tensors,
/// summary.json and skipped.json.
ExperimentResult run_experiment(const RunSpec& spec);

/// Builds the record for one finished run.
PairRecord make_record(const std::string& pair_id, std::uint64_t seed, MaskVariant variant,
                       const AttackPair& pair, const AttackResult& result);

// Persistence -------------------------------------------------------------

std::string query_csv_name(const std::string& pair_id, MaskVariant variant, std::uint64_t seed);
/// Header pair_id,seed,query,stage,accepted,distance.
void write_query_csv(const fs::path& path, const std::string& pair_id, std::uint64_t seed, const QueryLog& log);
QueryLog read_query_csv(const fs::path& path);

void write_summary(const fs::path& out_dir, std::span<const PairRecord> records);
void write_skipped(const fs::path& out_dir, std::span<const SkippedPair> skipped);
/// Rebuilds records from summary.json and the per-query CSVs it points to.
std::vector<PairRecord> load_records(const fs::path& out_dir);

// Configuration file ------------------------------------------------------

/// JSON settings file. Every key is optional; relative paths resolve
/// against the file's directory.
struct Settings {
  std::optional<fs::path> manifest;
  std::optional<OracleSpec> oracle;
  AttackConfig attack;
  std::optional<MaskVariant> variant;
  std::optional<std::size_t> budget;
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<std::size_t> workers;
  std::optional<fs::path> out;
  std::optional<std::vector<std::size_t>> grid;
  std::optional<std::pair<std::size_t, std::size_t>> resize;
  std::optional<io::Interpolation> interpolation;
};

Settings load_settings(const fs::path& path);
/// Applies the "attack" object of a settings file onto `cfg`.
void apply_attack_json(const std::string& json_text, AttackConfig& cfg);

std::vector<std::uint64_t> parse_seed_list(std::string_view csv);
std::vector<std::size_t> parse_grid(std::string_view csv);

}  // namespace tea::harness
