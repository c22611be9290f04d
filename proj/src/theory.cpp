#include "mpls/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mpls/error.hpp"

namespace mpls::theory {
namespace {

void check_ratios(double alpha_x, double alpha_y) {
  if (!(alpha_x > 0.0) || !(alpha_y > 0.0) || !std::isfinite(alpha_x) || !std::isfinite(alpha_y)) {
    throw DomainError("theory: aspect ratios must be positive and finite");
  }
}

void check_rho(double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("theory: rho must lie in (0, 1], got " + std::to_string(rho));
}

void check_unit_interval(double r, const char* name) {
  if (!(r >= 0.0 && r <= 1.0)) throw DomainError(std::string("theory: ") + name + " must lie in [0, 1]");
}

}  // namespace

double critical_threshold(double alpha_x, double alpha_y, double rho) {
  check_ratios(alpha_x, alpha_y);
  check_rho(rho);
  return 1.0 / (std::pow(alpha_x * alpha_y, 0.25) * std::sqrt(rho));
}

double effective_spike(double theta, double rho) {
  if (!(theta >= 0.0)) throw DomainError("theory: theta must be >= 0");
  check_rho(rho);
  return std::sqrt(rho) * theta;
}

std::pair<double, double> asymptotic_overlaps(double alpha_x, double alpha_y, double rho, double theta) {
  check_ratios(alpha_x, alpha_y);
  check_rho(rho);
  if (!(theta >= 0.0)) throw DomainError("theory: theta must be >= 0");
  const double s = rho * theta * theta;
  const double a = alpha_x * s;
  const double b = alpha_y * s;
  const double product = a * b;
  if (!(product > 1.0)) return {0.0, 0.0};
  const double r2x = (product - 1.0) / (b * (a + 1.0));
  const double r2y = (product - 1.0) / (a * (b + 1.0));
  return {std::clamp(r2x, 0.0, 1.0), std::clamp(r2y, 0.0, 1.0)};
}

Prediction predict(double alpha_x, double alpha_y, double rho, double theta) {
  Prediction p;
  p.theta_crit = critical_threshold(alpha_x, alpha_y, rho);
  p.theta_eff = effective_spike(theta, rho);
  std::tie(p.r2_x, p.r2_y) = asymptotic_overlaps(alpha_x, alpha_y, rho, theta);
  const double s = rho * theta * theta;
  p.supercritical = alpha_x * alpha_y * s * s > 1.0;
  return p;
}

std::vector<std::pair<double, double>> phase_boundary(double alpha_x, double alpha_y, const std::vector<double>& rho_grid) {
  std::vector<std::pair<double, double>> out;
  out.reserve(rho_grid.size());
  for (double rho : rho_grid) out.emplace_back(rho, critical_threshold(alpha_x, alpha_y, rho));
  return out;
}

double variational_objective(double r_u, double r_v, double alpha_x, double alpha_y, double theta_eff) {
  check_ratios(alpha_x, alpha_y);
  check_unit_interval(r_u, "r_u");
  check_unit_interval(r_v, "r_v");
  return std::sqrt(1.0 - r_u * r_u) / std::sqrt(alpha_x) + std::sqrt(1.0 - r_v * r_v) / std::sqrt(alpha_y) +
         theta_eff * r_u * r_v;
}

std::pair<double, double> stationarity_residual(double r_u, double r_v, double alpha_x, double alpha_y,
                                                double theta_eff) {
  check_ratios(alpha_x, alpha_y);
  if (!(r_u >= 0.0 && r_u < 1.0) || !(r_v >= 0.0 && r_v < 1.0)) {
    throw DomainError("theory: stationarity is singular at r = 1; r_u, r_v must lie in [0, 1)");
  }
  const double first = theta_eff * r_v - r_u / (std::sqrt(alpha_x) * std::sqrt(1.0 - r_u * r_u));
  const double second = theta_eff * r_u - r_v / (std::sqrt(alpha_y) * std::sqrt(1.0 - r_v * r_v));
  return {first, second};
}

std::pair<double, double> optimal_susceptibilities(double r_u, double r_v, double alpha_x, double alpha_y) {
  check_ratios(alpha_x, alpha_y);
  check_unit_interval(r_u, "r_u");
  check_unit_interval(r_v, "r_v");
  return {std::sqrt((1.0 - r_u * r_u) / alpha_x), std::sqrt((1.0 - r_v * r_v) / alpha_y)};
}

double susceptibility_objective(double chi, double r, double alpha) {
  if (!(chi > 0.0)) throw DomainError("theory: chi must be positive");
  return (1.0 - r * r) / (2.0 * alpha * chi) + 0.5 * chi;
}

VariationalPoint grid_maximize(double alpha_x, double alpha_y, double theta_eff, int points) {
  check_ratios(alpha_x, alpha_y);
  if (points < 2) throw DomainError("theory: grid needs at least two points per axis");
  const double step = 1.0 / (points - 1);
  // Psi separates into f(r_u) + g(r_v) + theta_eff r_u r_v.
  std::vector<double> r(points), fu(points), fv(points);
  for (int i = 0; i < points; ++i) {
    r[i] = i == points - 1 ? 1.0 : i * step;
    const double c = std::sqrt(std::max(0.0, 1.0 - r[i] * r[i]));
    fu[i] = c / std::sqrt(alpha_x);
    fv[i] = c / std::sqrt(alpha_y);
  }
  VariationalPoint best;
  best.psi = -INFINITY;
  for (int i = 0; i < points; ++i) {
    for (int j = 0; j < points; ++j) {
      const double psi = fu[i] + fv[j] + theta_eff * r[i] * r[j];
      if (psi > best.psi) {
        best.psi = psi;
        best.r_u = r[i];
        best.r_v = r[j];
      }
    }
  }
  std::tie(best.chi_u, best.chi_v) = optimal_susceptibilities(best.r_u, best.r_v, alpha_x, alpha_y);
  return best;
}

}  // namespace mpls::theory
