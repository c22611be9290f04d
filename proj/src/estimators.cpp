#include "mpls/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "mpls/error.hpp"

namespace mpls {
namespace {

// Observed column means substituted into the missing cells. Columns with no
// observed entry are filled with 0.
Matrix mean_imputed(const Matrix& obs, const Matrix& mask) {
  Matrix out = obs;
  for (Eigen::Index j = 0; j < obs.cols(); ++j) {
    const double count = mask.col(j).sum();
    const double mean = count > 0.0 ? obs.col(j).sum() / count : 0.0;
    for (Eigen::Index i = 0; i < obs.rows(); ++i) {
      if (mask(i, j) == 0.0) out(i, j) = mean;
    }
  }
  return out;
}

bool has_missing(const Matrix& mask) { return (mask.array() == 0.0).any(); }

Matrix orthonormal_columns(const Matrix& a) {
  if (a.cols() == 1) {
    const double norm = a.norm();
    if (norm == 0.0) throw NumericalError("iterative_svd: subspace collapsed to zero");
    return a / norm;
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = Matrix::Identity(a.rows(), a.cols());
  q.applyOnTheLeft(qr.householderQ());
  return q;
}

struct Completion {
  Matrix values;
  int iterations = 0;
  bool converged = true;
  std::vector<double> changes;
};

// Hard-impute: repeatedly replace the missing cells by the rank-`rank`
// approximation of the current completion. The leading subspace is tracked
// by warm-started subspace iteration (two sweeps per outer step).
Completion hard_impute(const Matrix& obs, const Matrix& mask, int rank, int max_iter, double tol) {
  Completion out;
  out.values = mean_imputed(obs, mask);
  if (!has_missing(mask)) return out;
  if (rank > std::min(obs.rows(), obs.cols())) throw DimensionError("iterative_svd: rank exceeds matrix dimensions");

  const Matrix missing = (1.0 - mask.array()).matrix();
  Stream rng(0x1D5Du, "hard-impute-start");
  std::normal_distribution<double> normal;
  Matrix right(obs.cols(), rank);
  for (Eigen::Index i = 0; i < right.size(); ++i) right.data()[i] = normal(rng);
  right = orthonormal_columns(right);

  out.converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    Matrix left;
    for (int sweep = 0; sweep < 2; ++sweep) {
      left = orthonormal_columns(out.values * right);
      right = orthonormal_columns(out.values.transpose() * left);
    }
    const Matrix approx = left * (left.transpose() * out.values);
    const Matrix previous = missing.cwiseProduct(out.values);
    const Matrix filled = missing.cwiseProduct(approx);
    const double scale = std::max(previous.norm(), 1e-300);
    const double change = (filled - previous).norm() / scale;
    out.values = mask.cwiseProduct(obs) + filled;
    out.iterations = it;
    out.changes.push_back(change);
    if (change < tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

void finish(EstimateResult& r, SingularTriple top, const MaskedPair& pair) {
  r.u_hat = std::move(top.left);
  r.v_hat = std::move(top.right);
  r.singular_value = top.value;
  std::tie(r.r2_x, r.r2_y) = squared_overlaps(r.u_hat, r.v_hat, pair.u0, pair.v0);
}

void require_shapes(const MaskedPair& pair) {
  const auto n = pair.x_obs.rows();
  if (pair.y_obs.rows() != n || pair.mask_x.rows() != n || pair.mask_y.rows() != n ||
      pair.mask_x.cols() != pair.x_obs.cols() || pair.mask_y.cols() != pair.y_obs.cols() ||
      pair.u0.size() != pair.x_obs.cols() || pair.v0.size() != pair.y_obs.cols()) {
    throw DimensionError("estimate: masked pair has inconsistent dimensions");
  }
  if (n < 1) throw DimensionError("estimate: masked pair has no samples");
}

}  // namespace

std::string to_string(EstimatorTag tag) {
  switch (tag) {
    case EstimatorTag::pls_svd_zero:
      return "pls_svd_zero";
    case EstimatorTag::mean_impute:
      return "mean_impute";
    case EstimatorTag::em_pls:
      return "em_pls";
    case EstimatorTag::iterative_svd:
      return "iterative_svd";
    case EstimatorTag::oracle:
      return "oracle";
  }
  return "pls_svd_zero";
}

EstimatorTag parse_estimator(const std::string& name) {
  for (auto t : {EstimatorTag::pls_svd_zero, EstimatorTag::mean_impute, EstimatorTag::em_pls,
                 EstimatorTag::iterative_svd, EstimatorTag::oracle}) {
    if (to_string(t) == name) return t;
  }
  throw ConfigError("unknown estimator '" + name + "'");
}

void EstimatorKind::validate() const {
  if (!(tol > 0.0)) throw DomainError("estimator: tol must be > 0");
  if (max_iter < 1) throw DomainError("estimator: max_iter must be >= 1");
  if (rank < 1) throw DomainError("estimator: rank must be >= 1");
}

Matrix rescaled_cross_covariance(const MaskedPair& pair, bool estimate_rho) {
  require_shapes(pair);
  double rho = pair.rho;
  if (estimate_rho) rho = pair.mask_x.mean() * pair.mask_y.mean();
  if (!(rho > 0.0)) throw DomainError("rescaled_cross_covariance: retention rho must be > 0");
  const double scale = 1.0 / (static_cast<double>(pair.n()) * std::sqrt(rho));
  return scale * (pair.x_obs.transpose() * pair.y_obs);
}

std::pair<double, double> squared_overlaps(const Vector& u_hat, const Vector& v_hat, const Vector& u0, const Vector& v0) {
  if (u_hat.size() != u0.size() || v_hat.size() != v0.size()) {
    throw DimensionError("squared_overlaps: length mismatch");
  }
  const double a = u_hat.dot(u0);
  const double b = v_hat.dot(v0);
  return {std::clamp(a * a, 0.0, 1.0), std::clamp(b * b, 0.0, 1.0)};
}

EstimateResult estimate(const MaskedPair& pair, const EstimatorKind& kind) {
  kind.validate();
  require_shapes(pair);
  const auto start = std::chrono::steady_clock::now();
  const double n = static_cast<double>(pair.n());
  EstimateResult result;

  switch (kind.tag) {
    case EstimatorTag::pls_svd_zero: {
      finish(result, top_singular_pair(rescaled_cross_covariance(pair, kind.estimate_rho)), pair);
      break;
    }
    case EstimatorTag::mean_impute: {
      const Matrix x = mean_imputed(pair.x_obs, pair.mask_x);
      const Matrix y = mean_imputed(pair.y_obs, pair.mask_y);
      finish(result, top_singular_pair(x.transpose() * y / n), pair);
      break;
    }
    case EstimatorTag::em_pls: {
      // X's missing cells stay at their column means; Y's missing cells are
      // refilled from the current rank-1 fit theta_hat (X u) v^T, with
      // theta_hat the least-squares spike along (X u, v).
      const Matrix x = mean_imputed(pair.x_obs, pair.mask_x);
      Matrix y = mean_imputed(pair.y_obs, pair.mask_y);
      const Matrix missing_y = (1.0 - pair.mask_y.array()).matrix();
      SingularTriple top;
      double previous = NAN;
      result.converged = false;
      for (int it = 1; it <= kind.max_iter; ++it) {
        top = top_singular_pair(x.transpose() * y / n);
        result.iterations = it;
        if (it > 1) {
          const double change = std::abs(top.value - previous) / top.value;
          result.changes.push_back(change);
          if (change < kind.tol) {
            result.converged = true;
            break;
          }
        }
        previous = top.value;
        const Vector score = x * top.left;
        const double energy = score.squaredNorm();
        if (!(energy > 0.0)) throw NumericalError("em_pls: projected design vanished");
        const double spike = n * top.value / energy;
        y = pair.y_obs + missing_y.cwiseProduct(spike * score * top.right.transpose());
      }
      finish(result, std::move(top), pair);
      break;
    }
    case EstimatorTag::iterative_svd: {
      const Completion cx = hard_impute(pair.x_obs, pair.mask_x, kind.rank, kind.max_iter, kind.tol);
      const Completion cy = hard_impute(pair.y_obs, pair.mask_y, kind.rank, kind.max_iter, kind.tol);
      result.iterations = std::max(cx.iterations, cy.iterations);
      result.converged = cx.converged && cy.converged;
      result.changes = cx.changes.size() >= cy.changes.size() ? cx.changes : cy.changes;
      finish(result, top_singular_pair(cx.values.transpose() * cy.values / n), pair);
      break;
    }
    case EstimatorTag::oracle: {
      if (pair.x_latent.rows() != pair.n() || pair.y_latent.rows() != pair.n()) {
        throw DomainError("estimate: oracle needs the latent complete views on the pair");
      }
      finish(result, top_singular_pair(pair.x_latent.transpose() * pair.y_latent / n), pair);
      break;
    }
  }
  result.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

double split_half_stability(const MaskedPair& pair, std::uint64_t seed) {
  require_shapes(pair);
  const int n = pair.n();
  if (n < 4) throw DimensionError("split_half_stability: need at least 4 samples");
  if (!(pair.rho > 0.0)) throw DomainError("split_half_stability: retention rho must be > 0");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Stream rng(seed, "split-half");
  std::shuffle(order.begin(), order.end(), rng);
  const auto half = static_cast<std::ptrdiff_t>(n / 2);
  const std::vector<int> first(order.begin(), order.begin() + half);
  const std::vector<int> second(order.begin() + half, order.end());

  auto fit = [&](const std::vector<int>& rows) {
    const Matrix x = pair.x_obs(rows, Eigen::all);
    const Matrix y = pair.y_obs(rows, Eigen::all);
    const Matrix c = x.transpose() * y / (static_cast<double>(rows.size()) * std::sqrt(pair.rho));
    if (c.cwiseAbs().maxCoeff() == 0.0) throw NumericalError("split_half_stability: degenerate half (no overlap)");
    return top_singular_pair(c);
  };
  const SingularTriple a = fit(first);
  const SingularTriple b = fit(second);
  const double cu = std::abs(vector_correlation(a.left, b.left));
  const double cv = std::abs(vector_correlation(a.right, b.right));
  return 0.5 * (cu + cv);
}

}  // namespace mpls
