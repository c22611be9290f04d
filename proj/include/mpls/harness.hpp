#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpls/estimators.hpp"
#include "mpls/synth.hpp"

namespace mpls {

// Parameters a sweep axis can drive. `gamma` (MAR strength on both masks)
// extends the basic set so MAR strength can be swept like the others.
enum class AxisParam { theta, theta_over_crit, m_x, m_y, m_joint, rho, n_samples, gamma };

std::string to_string(AxisParam p);
AxisParam parse_axis_param(const std::string& name);

struct Axis {
  AxisParam param = AxisParam::theta_over_crit;
  std::vector<double> values;
};

struct Diagnostics {
  bool split_half = false;
};

struct SweepSpec {
  std::string name = "sweep";
  ModelConfig base;
  Axis axis1;
  std::optional<Axis> axis2;
  int trials = 10;
  EstimatorKind estimator;
  Diagnostics diagnostics;

  void validate() const;
};

struct TrialResult {
  bool ok = true;
  std::string error;
  double r2_x = 0.0;
  double r2_y = 0.0;
  double stability = 0.0;  // NaN unless split_half was requested
  double runtime = 0.0;    // estimator wall-clock, seconds
  int iterations = 0;
  bool converged = true;
  std::uint64_t seed = 0;
};

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
};

// Mean and sample std of the finite entries; NaN mean when none.
Summary summarize(const std::vector<double>& values);

struct PointRecord {
  double axis1 = 0.0;
  double axis2 = 0.0;  // NaN when the sweep has one axis
  double theta = 0.0;  // resolved signal strength
  double rho = 1.0;    // resolved configured retention
  Summary r2_x;
  Summary r2_y;
  Summary stability;
  double theory_r2_x = 0.0;
  double theory_r2_y = 0.0;
  double theta_crit = 0.0;
  int trials = 0;
  int trials_effective = 0;
  bool valid = true;  // at least half of the trials succeeded
  std::uint64_t seeds_digest = 0;
  double mean_runtime = 0.0;
  std::vector<std::string> errors;  // first few failure messages
};

struct SweepResult {
  std::string name;
  AxisParam axis1_param = AxisParam::theta_over_crit;
  std::optional<AxisParam> axis2_param;
  std::vector<PointRecord> points;
  double correlation = 0.0;               // all valid points, NaN if undefined
  double correlation_supercritical = 0.0;  // points with positive theory value only
  double total_runtime = 0.0;
  std::uint64_t seed = 0;
};

// Applies the axis values to the base config. m/rho/n/gamma axes are
// applied before theta_over_crit so the ratio uses the point's own rho.
ModelConfig resolve_point(const SweepSpec& spec, double axis1, std::optional<double> axis2);

// One Monte Carlo trial: pair from derive_seed(config.seed, trial_index),
// estimator, optional split-half diagnostic. Library errors are caught and
// recorded on the result.
TrialResult run_trial(const ModelConfig& config, const EstimatorKind& estimator, const Diagnostics& diagnostics,
                      std::uint64_t trial_index);

// Trial index used by run_sweep for (point, trial).
inline std::uint64_t sweep_trial_index(std::size_t point, std::size_t trial) {
  return (static_cast<std::uint64_t>(point) << 32) | static_cast<std::uint64_t>(trial);
}

// Runs every (point, trial) with up to `threads` workers. Aggregation is in
// (point, trial) order, so the result does not depend on `threads`.
SweepResult run_sweep(const SweepSpec& spec, int threads = 1);

// Pearson correlation of per-point mean r2_x against theory r2_x.
double correlation_with_theory(const SweepResult& result);
double correlation_with_theory(const SweepResult& result, bool supercritical_only);

// Digest over every deterministic field of the result (runtimes excluded).
std::uint64_t result_digest(const SweepResult& result);

// ---------------------------------------------------------------- studies

struct FiniteSizeEntry {
  int n_samples = 0;
  int dx = 0;
  int dy = 0;
  SweepResult sweep;
  double transition_width = 0.0;
};

struct FiniteSizeOptions {
  double alpha_x = 2.5;
  double alpha_y = 2.5;
  double m_x = 0.2;
  double m_y = 0.2;
  std::vector<int> n_list{100, 250, 500, 1000, 2000, 5000};
  double window_low = 0.85;   // theta / theta_crit
  double window_high = 1.15;
  int points = 15;
  int trials = 30;
  std::uint64_t seed = 1;
  EstimatorKind estimator;
};

// Sweep specs used by finite_size_study, one per N, with D = round(N / alpha).
std::vector<SweepSpec> finite_size_specs(const FiniteSizeOptions& options);

std::vector<FiniteSizeEntry> finite_size_study(const FiniteSizeOptions& options, int threads = 1);

// theta distance between the points where the mean r2_x curve first reaches
// 25% and 75% of its maximum over the window (linear interpolation between
// grid points). The sweep's axis1 must be theta or theta_over_crit.
double transition_width(const SweepResult& sweep);

// For a 2-D grid with one theta-type axis and one missingness axis: per
// missingness value, the smallest theta whose mean r2_x exceeds
// `multiple` / D_x. NaN when no grid theta qualifies.
struct BoundaryPoint {
  double missingness = 0.0;
  double theta = 0.0;
};
std::vector<BoundaryPoint> empirical_boundary(const SweepResult& grid, int dx, double multiple = 3.0);

}  // namespace mpls

namespace mpls {

// n evenly spaced values from lo to hi inclusive (n == 1 gives {lo}).
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace mpls
