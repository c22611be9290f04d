#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mpls/harness.hpp"

// Pass/fail evaluation of sweep results against the reference behaviour of
// each experiment. Shared by `mpls run --check` and the acceptance suite.
namespace mpls::checks {

struct Outcome {
  std::string id;
  std::string description;
  bool passed = false;
  std::string detail;
};

bool all_passed(const std::vector<Outcome>& outcomes);

// theta > above * theta_crit: |mean R^2 - theory| < tol for both views;
// theta < below * theta_crit: mean R^2 < tol; correlation > min_corr.
std::vector<Outcome> transition(const SweepResult& sweep, double above = 1.1, double below = 0.9, double tol = 0.05,
                                double min_corr = 0.99);

std::vector<Outcome> phase_diagram(const SweepResult& grid, double min_corr = 0.97);

// Transition width strictly decreasing in N (entries in increasing N).
std::vector<Outcome> sharpening(const std::vector<FiniteSizeEntry>& entries);

// Joint-masking boundary strictly above the single-view boundary for every
// sampled m in [m_low, m_high].
std::vector<Outcome> boundary_order(const SweepResult& single_view, const SweepResult& joint, int dx,
                                    double m_low = 0.2, double m_high = 0.7);

// No-recovery / unstable / stable regimes of the split-half diagnostic.
std::vector<Outcome> split_half_regimes(const SweepResult& sweep);

// At the point closest to theta = at_ratio * theta_crit: no masked estimator
// beats pls_svd_zero by > 2 standard errors and the oracle beats every masked
// estimator by > 2 standard errors. `runs` pairs estimator names with sweeps.
std::vector<Outcome> baselines(const std::vector<std::pair<std::string, SweepResult>>& runs, double at_ratio = 1.5);

// Mean |R_x^2 - theory| over theta > above * theta_crit below `tol` for every
// sweep in `runs` (label, sweep).
std::vector<Outcome> noise_robustness(const std::vector<std::pair<std::string, SweepResult>>& runs,
                                      double above = 1.1, double tol = 0.05);

}  // namespace mpls::checks
