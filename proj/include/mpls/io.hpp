#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mpls/harness.hpp"
#include "mpls/linalg.hpp"

namespace mpls::io {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kResultSchemaVersion = 1;

// ------------------------------------------------------------ matrix files
//
// Header format: one ASCII line "MPLSMAT 1 <rows> <cols> <f64le|text>\n"
// followed by the row-major payload, either rows*cols little-endian IEEE-754
// doubles or whitespace-separated decimal numbers. CSV format: first line
// "rows,cols", then one comma-separated line per row.

enum class MatrixEncoding { binary, text, csv };

struct MatrixFileInfo {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  MatrixEncoding encoding = MatrixEncoding::binary;
};

void write_matrix(const std::filesystem::path& path, const Matrix& m, MatrixEncoding encoding = MatrixEncoding::binary);
Matrix ingest_matrix(const std::filesystem::path& path, MatrixFileInfo* info = nullptr);

// --------------------------------------------------------- configuration

enum class Scale { paper, desk };
std::string to_string(Scale s);
Scale parse_scale(const std::string& s);

using Overrides = std::vector<std::pair<std::string, std::string>>;

struct ExperimentPreset {
  std::string name;
  Scale scale = Scale::desk;
  Overrides overrides;
};

const std::vector<std::string>& preset_names();

// Where a semi-synthetic design comes from: two matrix files, or seeded
// Gaussian surrogate views when no files are given.
struct DesignSource {
  std::string x_path;
  std::string y_path;
  int surrogate_rows = 1000;
  int surrogate_cols_x = 300;
  int surrogate_cols_y = 300;
  std::uint64_t surrogate_seed = 7;
  int target_dims = 200;
  bool random_directions = false;

  bool uses_files() const { return !x_path.empty(); }
  friend bool operator==(const DesignSource&, const DesignSource&) = default;
};

struct PlannedSweep {
  SweepSpec spec;
  std::optional<DesignSource> design;
};

struct RunPlan {
  std::string name;
  std::string preset;  // empty for hand-written configs
  Scale scale = Scale::desk;
  std::vector<PlannedSweep> sweeps;
};

// Builds the plan for a preset, then applies overrides. Unknown presets or
// override keys raise ConfigError.
RunPlan resolve_preset(const ExperimentPreset& preset);

// Applies `key=value` overrides to a resolved plan.
void apply_overrides(RunPlan& plan, const Overrides& overrides);

// Parses a JSON configuration: either {"preset", "scale", "overrides"} or an
// explicit {"name", "sweeps": [...]} document as produced by echo_config.
// Unknown keys are fatal. Designs are described, not loaded; see attach_designs.
RunPlan parse_config(const std::string& text);

// Fully explicit JSON form of a plan; parse_config(echo_config(p)) == p.
std::string echo_config(const RunPlan& plan);

// Loads matrices (or builds surrogates) and computes the fixed design.
std::shared_ptr<const FixedDesign> load_design(const DesignSource& source);

// Loads every sweep's design (each distinct source once), attaches it to the
// base config and sets n_samples, dx and dy from the loaded design.
void attach_designs(RunPlan& plan);

// --------------------------------------------------------------- results

enum class ResultFormat { csv, json };
ResultFormat parse_format(const std::string& s);

struct RunMetadata {
  std::string preset;
  std::string scale;
  std::string version = kVersion;
};

// CSV columns: axis1, axis2, mean_r2x, std_r2x, mean_r2y, std_r2y,
// mean_stability, std_stability, theory_r2x, theory_r2y, theta_crit,
// trials_effective. 12 significant digits; empty cells for absent values.
std::string results_csv(const SweepResult& result);
std::string results_json(const SweepResult& result, const RunMetadata& meta);
SweepResult parse_results_json(const std::string& text);

// Writes to a temporary sibling then renames over `path`.
void emit_results(const SweepResult& result, ResultFormat format, const std::filesystem::path& path,
                  const RunMetadata& meta = {});

void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace mpls::io
