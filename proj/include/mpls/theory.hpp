#pragma once

#include <utility>
#include <vector>

namespace mpls::theory {

// Asymptotic behaviour of the leading PLS-SVD pair of the rescaled masked
// cross-covariance in the proportional limit N, D_x, D_y -> infinity.
struct Prediction {
  double theta_crit = 0.0;
  double theta_eff = 0.0;
  double r2_x = 0.0;
  double r2_y = 0.0;
  bool supercritical = false;
};

// 1 / ((alpha_x alpha_y)^(1/4) sqrt(rho)).
double critical_threshold(double alpha_x, double alpha_y, double rho);

// sqrt(rho) * theta: masking attenuates the spike by the square root of the
// joint retention.
double effective_spike(double theta, double rho);

// Squared overlaps (r_x^2, r_y^2). Zero when alpha_x alpha_y rho^2 theta^4 <= 1
// (equality counts as subcritical), otherwise
//   r_x^2 = (ab - 1) / (b (a + 1)),  r_y^2 = (ab - 1) / (a (b + 1))
// with a = alpha_x rho theta^2, b = alpha_y rho theta^2.
std::pair<double, double> asymptotic_overlaps(double alpha_x, double alpha_y, double rho, double theta);

Prediction predict(double alpha_x, double alpha_y, double rho, double theta);

std::vector<std::pair<double, double>> phase_boundary(double alpha_x, double alpha_y, const std::vector<double>& rho_grid);

// --- zero-temperature variational problem --------------------------------

struct VariationalPoint {
  double r_u = 0.0;
  double r_v = 0.0;
  double chi_u = 0.0;
  double chi_v = 0.0;
  double psi = 0.0;
};

// Psi(r_u, r_v) = sqrt(1 - r_u^2)/sqrt(alpha_x) + sqrt(1 - r_v^2)/sqrt(alpha_y)
//               + theta_eff r_u r_v,   r_u, r_v in [0, 1].
double variational_objective(double r_u, double r_v, double alpha_x, double alpha_y, double theta_eff);

// Residuals of the two stationarity conditions
//   theta_eff r_v = r_u / (sqrt(alpha_x) sqrt(1 - r_u^2))
//   theta_eff r_u = r_v / (sqrt(alpha_y) sqrt(1 - r_v^2)),
// as (lhs - rhs) pairs. Singular at r = 1.
std::pair<double, double> stationarity_residual(double r_u, double r_v, double alpha_x, double alpha_y,
                                                double theta_eff);

// chi* = sqrt((1 - r^2) / alpha) for each view.
std::pair<double, double> optimal_susceptibilities(double r_u, double r_v, double alpha_x, double alpha_y);

// f(chi) = (1 - r^2) / (2 alpha chi) + chi / 2, the per-view susceptibility term.
double susceptibility_objective(double chi, double r, double alpha);

// Exhaustive maximisation of Psi over a points x points grid on [0, 1]^2.
VariationalPoint grid_maximize(double alpha_x, double alpha_y, double theta_eff, int points = 2001);

}  // namespace mpls::theory
