#include "mpls/checks.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mpls::checks {
namespace {

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(4);
  out << x;
  return out.str();
}

double ratio(const PointRecord& p) { return p.theta / p.theta_crit; }

double standard_error(const Summary& s, int n) { return n > 0 ? s.std / std::sqrt(static_cast<double>(n)) : NAN; }

const PointRecord* closest(const SweepResult& sweep, double target_ratio) {
  const PointRecord* best = nullptr;
  double dist = std::numeric_limits<double>::infinity();
  for (const PointRecord& p : sweep.points) {
    const double d = std::abs(ratio(p) - target_ratio);
    if (d < dist) {
      dist = d;
      best = &p;
    }
  }
  return best;
}

}  // namespace

bool all_passed(const std::vector<Outcome>& outcomes) {
  for (const Outcome& o : outcomes) {
    if (!o.passed) return false;
  }
  return !outcomes.empty();
}

std::vector<Outcome> transition(const SweepResult& sweep, double above, double below, double tol, double min_corr) {
  Outcome sup{"supercritical_match", "theta > " + fmt(above) + " theta_crit: |mean R^2 - theory| < " + fmt(tol), true, ""};
  Outcome sub{"subcritical_null", "theta < " + fmt(below) + " theta_crit: mean R^2 < " + fmt(tol), true, ""};
  double worst_sup = 0.0, worst_sub = 0.0;
  int n_sup = 0, n_sub = 0;
  for (const PointRecord& p : sweep.points) {
    const double r = ratio(p);
    if (!p.valid) {
      sup.passed = sub.passed = false;
      continue;
    }
    if (r > above) {
      ++n_sup;
      const double dev = std::max(std::abs(p.r2_x.mean - p.theory_r2_x), std::abs(p.r2_y.mean - p.theory_r2_y));
      worst_sup = std::max(worst_sup, dev);
      if (!(dev < tol)) sup.passed = false;
    } else if (r < below) {
      ++n_sub;
      const double v = std::max(p.r2_x.mean, p.r2_y.mean);
      worst_sub = std::max(worst_sub, v);
      if (!(v < tol)) sub.passed = false;
    }
  }
  if (n_sup == 0) sup.passed = false;
  if (n_sub == 0) sub.passed = false;
  sup.detail = std::to_string(n_sup) + " points, worst deviation " + fmt(worst_sup);
  sub.detail = std::to_string(n_sub) + " points, largest mean R^2 " + fmt(worst_sub);
  Outcome corr{"theory_correlation", "theory-empirics correlation > " + fmt(min_corr), sweep.correlation > min_corr,
               "r = " + fmt(sweep.correlation)};
  return {sup, sub, corr};
}

std::vector<Outcome> phase_diagram(const SweepResult& grid, double min_corr) {
  return {{"grid_correlation", "correlation of mean R_x^2 with theory over the grid > " + fmt(min_corr),
           grid.correlation > min_corr, "r = " + fmt(grid.correlation) + " over " + std::to_string(grid.points.size()) +
                                            " points"}};
}

std::vector<Outcome> sharpening(const std::vector<FiniteSizeEntry>& entries) {
  Outcome o{"width_decreasing", "transition width strictly decreases with N", entries.size() >= 2, ""};
  std::ostringstream detail;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    detail << (i ? ", " : "") << "N=" << entries[i].n_samples << ": " << fmt(entries[i].transition_width);
    if (!std::isfinite(entries[i].transition_width)) o.passed = false;
    if (i > 0 && !(entries[i].transition_width < entries[i - 1].transition_width)) o.passed = false;
  }
  o.detail = detail.str();
  return {o};
}

std::vector<Outcome> boundary_order(const SweepResult& single_view, const SweepResult& joint, int dx, double m_low,
                                    double m_high) {
  const auto single = empirical_boundary(single_view, dx);
  const auto both = empirical_boundary(joint, dx);
  Outcome o{"joint_above_single", "joint-masking boundary above single-view boundary for m in [" + fmt(m_low) + ", " +
                                      fmt(m_high) + "]",
            true, ""};
  std::ostringstream detail;
  int compared = 0;
  for (const BoundaryPoint& s : single) {
    if (s.missingness < m_low - 1e-12 || s.missingness > m_high + 1e-12) continue;
    for (const BoundaryPoint& j : both) {
      if (std::abs(j.missingness - s.missingness) > 1e-12) continue;
      ++compared;
      detail << (compared > 1 ? "; " : "") << "m=" << fmt(s.missingness) << ": single " << fmt(s.theta) << " joint "
             << fmt(j.theta);
      // A joint boundary beyond the grid (NaN) still lies above a finite single-view one.
      const bool above = std::isnan(j.theta) ? std::isfinite(s.theta) : (std::isfinite(s.theta) && j.theta > s.theta);
      if (!above) o.passed = false;
    }
  }
  if (compared == 0) o.passed = false;
  o.detail = detail.str();
  return {o};
}

std::vector<Outcome> split_half_regimes(const SweepResult& sweep) {
  const double root2 = std::sqrt(2.0);
  Outcome none{"no_recovery", "theta < theta_crit: mean stability < 0.3", true, ""};
  Outcome unstable{"unstable_recovery",
                   "some theta in (theta_crit, sqrt2 theta_crit): mean R_x^2 > 0.2 with stability < 0.6", false, ""};
  Outcome stable{"stable_recovery", "theta > 2 theta_crit: mean stability > 0.8", true, ""};
  double worst_none = 0.0, worst_stable = 1.0;
  int n_none = 0, n_stable = 0, n_mid = 0;
  std::ostringstream mid;
  for (const PointRecord& p : sweep.points) {
    const double r = ratio(p);
    if (r < 1.0) {
      ++n_none;
      worst_none = std::max(worst_none, p.stability.mean);
      if (!(p.stability.mean < 0.3)) none.passed = false;
    } else if (r > 1.0 && r < root2) {
      ++n_mid;
      mid << (n_mid > 1 ? "; " : "") << fmt(r) << ": R2=" << fmt(p.r2_x.mean) << " stab=" << fmt(p.stability.mean);
      if (p.r2_x.mean > 0.2 && p.stability.mean < 0.6) unstable.passed = true;
    }
    if (r > 2.0) {
      ++n_stable;
      worst_stable = std::min(worst_stable, p.stability.mean);
      if (!(p.stability.mean > 0.8)) stable.passed = false;
    }
  }
  if (n_none == 0) none.passed = false;
  if (n_stable == 0) stable.passed = false;
  none.detail = std::to_string(n_none) + " points, max stability " + fmt(worst_none);
  unstable.detail = mid.str();
  stable.detail = std::to_string(n_stable) + " points, min stability " + fmt(worst_stable);
  return {none, unstable, stable};
}

std::vector<Outcome> baselines(const std::vector<std::pair<std::string, SweepResult>>& runs, double at_ratio) {
  const PointRecord* reference = nullptr;
  const PointRecord* oracle = nullptr;
  std::vector<std::pair<std::string, const PointRecord*>> masked;
  for (const auto& [name, sweep] : runs) {
    const PointRecord* p = closest(sweep, at_ratio);
    if (p == nullptr) continue;
    if (name == "oracle") {
      oracle = p;
    } else {
      if (name == "pls_svd_zero") reference = p;
      masked.emplace_back(name, p);
    }
  }
  Outcome none_better{"no_estimator_beats_pls", "no masked estimator's mean R_x^2 exceeds pls_svd_zero by > 2 SE",
                      reference != nullptr, ""};
  Outcome oracle_best{"oracle_dominates", "oracle exceeds every masked estimator by > 2 SE", oracle != nullptr, ""};
  std::ostringstream d1, d2;
  for (const auto& [name, p] : masked) {
    if (reference != nullptr && p != reference) {
      const double se = std::hypot(standard_error(p->r2_x, p->trials_effective),
                                   standard_error(reference->r2_x, reference->trials_effective));
      const double diff = p->r2_x.mean - reference->r2_x.mean;
      d1 << name << ": " << fmt(diff) << " (2SE " << fmt(2 * se) << ") ";
      if (!(diff <= 2 * se)) none_better.passed = false;
    }
    if (oracle != nullptr) {
      const double se = std::hypot(standard_error(p->r2_x, p->trials_effective),
                                   standard_error(oracle->r2_x, oracle->trials_effective));
      const double diff = oracle->r2_x.mean - p->r2_x.mean;
      d2 << name << ": " << fmt(diff) << " (2SE " << fmt(2 * se) << ") ";
      if (!(diff > 2 * se)) oracle_best.passed = false;
    }
  }
  if (masked.empty()) none_better.passed = oracle_best.passed = false;
  none_better.detail = d1.str();
  oracle_best.detail = d2.str();
  return {none_better, oracle_best};
}

std::vector<Outcome> noise_robustness(const std::vector<std::pair<std::string, SweepResult>>& runs, double above,
                                      double tol) {
  std::vector<Outcome> out;
  for (const auto& [label, sweep] : runs) {
    double sum = 0.0;
    int n = 0;
    for (const PointRecord& p : sweep.points) {
      if (ratio(p) > above && p.valid) {
        sum += std::abs(p.r2_x.mean - p.theory_r2_x);
        ++n;
      }
    }
    const double mae = n > 0 ? sum / n : NAN;
    out.push_back({"deviation_" + label, label + ": mean |R_x^2 - theory| over theta > " + fmt(above) +
                                            " theta_crit < " + fmt(tol),
                   n > 0 && mae < tol, "MAE " + fmt(mae) + " over " + std::to_string(n) + " points"});
  }
  return out;
}

}  // namespace mpls::checks
