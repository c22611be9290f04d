#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mpls/linalg.hpp"
#include "mpls/synth.hpp"

namespace mpls {

enum class EstimatorTag { pls_svd_zero, mean_impute, em_pls, iterative_svd, oracle };

struct EstimatorKind {
  EstimatorTag tag = EstimatorTag::pls_svd_zero;
  int max_iter = 100;   // em_pls, iterative_svd
  double tol = 1e-6;    // em_pls, iterative_svd
  int rank = 1;         // iterative_svd
  bool estimate_rho = false;  // pls_svd_zero: normalise by the mask density instead of the configured rho

  static EstimatorKind pls_svd_zero() { return {}; }
  static EstimatorKind mean_impute() { return {EstimatorTag::mean_impute}; }
  static EstimatorKind em_pls(int max_iter = 100, double tol = 1e-6) { return {EstimatorTag::em_pls, max_iter, tol}; }
  static EstimatorKind iterative_svd(int rank = 1, int max_iter = 100, double tol = 1e-5) {
    return {EstimatorTag::iterative_svd, max_iter, tol, rank};
  }
  static EstimatorKind oracle() { return {EstimatorTag::oracle}; }

  void validate() const;
  friend bool operator==(const EstimatorKind&, const EstimatorKind&) = default;
};

std::string to_string(EstimatorTag tag);
EstimatorTag parse_estimator(const std::string& name);

struct EstimateResult {
  Vector u_hat;
  Vector v_hat;
  double r2_x = 0.0;
  double r2_y = 0.0;
  double singular_value = 0.0;
  int iterations = 0;
  bool converged = true;
  double runtime = 0.0;  // seconds, estimator call only
  // em_pls / iterative_svd: relative change per outer iteration.
  std::vector<double> changes;
};

// C = X^T Y / (N sqrt(rho)) with rho the configured retention (or the product
// of the two mask densities when estimate_rho is set).
Matrix rescaled_cross_covariance(const MaskedPair& pair, bool estimate_rho = false);

EstimateResult estimate(const MaskedPair& pair, const EstimatorKind& kind);

// ((u_hat . u0)^2, (v_hat . v0)^2).
std::pair<double, double> squared_overlaps(const Vector& u_hat, const Vector& v_hat, const Vector& u0, const Vector& v0);

// Randomly halves the samples, runs missing-as-zero PLS-SVD on each half and
// returns the mean of |corr(u_a, u_b)| and |corr(v_a, v_b)|.
double split_half_stability(const MaskedPair& pair, std::uint64_t seed);

}  // namespace mpls
