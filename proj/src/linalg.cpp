#include "mpls/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mpls/error.hpp"
#include "mpls/rng.hpp"

namespace mpls {
namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw DomainError(std::string(what) + ": matrix has non-finite entries");
}

Vector seeded_start(Eigen::Index n) {
  Stream rng(0x5EEDu, "power-iteration-start");
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v / v.norm();
}

}  // namespace

void apply_sign_convention(Vector& left, Vector& right) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < left.size(); ++i) {
    const double a = std::abs(left[i]);
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  if (left.size() > 0 && left[best] < 0.0) {
    left = -left;
    right = -right;
  }
}

Matrix whiten(const Matrix& raw) {
  const Eigen::Index n = raw.rows();
  const Eigen::Index d = raw.cols();
  if (d == 0) throw DimensionError("whiten: matrix has no columns");
  if (n < d) {
    std::ostringstream msg;
    msg << "whiten: need rows >= cols, got " << n << "x" << d;
    throw DimensionError(msg.str());
  }
  require_finite(raw, "whiten");

  Eigen::HouseholderQR<Matrix> qr(raw);
  const Matrix& packed = qr.matrixQR();
  const Vector diag = packed.diagonal().head(d);
  const double largest = diag.cwiseAbs().maxCoeff();
  const double smallest = diag.cwiseAbs().minCoeff();
  if (!(smallest > 1e-10 * largest)) {
    std::ostringstream msg;
    msg << "whiten: matrix is numerically rank deficient (estimated condition number "
        << (smallest > 0.0 ? largest / smallest : INFINITY) << ", limit 1e10)";
    throw NumericalError(msg.str());
  }

  Matrix q = Matrix::Identity(n, d);
  q.applyOnTheLeft(qr.householderQ());
  for (Eigen::Index k = 0; k < d; ++k) {
    if (diag[k] < 0.0) q.col(k) = -q.col(k);
  }
  q *= std::sqrt(static_cast<double>(n));
  return q;
}

SingularTriple dense_singular_pair(const Matrix& m) {
  require_finite(m, "dense_singular_pair");
  if (m.size() == 0 || m.cwiseAbs().maxCoeff() == 0.0) {
    throw NumericalError("top_singular_pair: matrix is zero, no leading direction");
  }
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SingularTriple t;
  t.left = svd.matrixU().col(0);
  t.right = svd.matrixV().col(0);
  t.value = svd.singularValues()[0];
  t.iterations = 0;
  apply_sign_convention(t.left, t.right);
  return t;
}

SingularTriple power_singular_pair(const Matrix& m, double tol, int max_iter) {
  if (!(tol > 0.0)) throw DomainError("top_singular_pair: tol must be positive");
  if (max_iter < 1) throw DomainError("top_singular_pair: max_iter must be >= 1");
  require_finite(m, "top_singular_pair");
  if (m.size() == 0 || m.cwiseAbs().maxCoeff() == 0.0) {
    throw NumericalError("top_singular_pair: matrix is zero, no leading direction");
  }

  // Iterate on the shorter side: x lives in the space of dimension
  // min(rows, cols), y = A x in the other one.
  const bool on_right = m.rows() >= m.cols();
  auto apply = [&](const Vector& x) -> Vector {
    return on_right ? Vector(m * x) : Vector(m.transpose() * x);
  };
  auto apply_adjoint = [&](const Vector& y) -> Vector {
    return on_right ? Vector(m.transpose() * y) : Vector(m * y);
  };

  Vector x = seeded_start(on_right ? m.cols() : m.rows());
  Vector y = apply(x);
  double rayleigh = y.squaredNorm();
  double prev_change = NAN;
  double change = NAN;
  int it = 0;
  bool converged = false;
  while (it < max_iter) {
    ++it;
    x = apply_adjoint(y);
    const double norm = x.norm();
    if (norm == 0.0) {
      throw NumericalError("top_singular_pair: start vector annihilated, matrix has no leading direction");
    }
    x /= norm;
    y = apply(x);
    const double next = y.squaredNorm();
    prev_change = change;
    change = std::abs(next - rayleigh);
    rayleigh = next;
    if (change <= tol * next) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "top_singular_pair: no convergence after " << max_iter << " iterations (relative Rayleigh change "
        << change / rayleigh;
    if (std::isfinite(prev_change) && prev_change > 0.0) {
      // Successive changes shrink like (s2/s1)^2 per step.
      msg << ", estimated gap ratio s2/s1 ~ " << std::sqrt(change / prev_change);
    }
    msg << ")";
    throw ConvergenceError(msg.str());
  }

  SingularTriple t;
  t.value = std::sqrt(rayleigh);
  Vector other = y / y.norm();
  if (on_right) {
    t.left = std::move(other);
    t.right = std::move(x);
  } else {
    t.left = std::move(x);
    t.right = std::move(other);
  }
  t.iterations = it;
  apply_sign_convention(t.left, t.right);
  return t;
}

SingularTriple top_singular_pair(const Matrix& m, double tol, int max_iter) {
  if (std::min(m.rows(), m.cols()) <= kDenseCutoff) {
    if (!(tol > 0.0)) throw DomainError("top_singular_pair: tol must be positive");
    return dense_singular_pair(m);
  }
  return power_singular_pair(m, tol, max_iter);
}

Matrix standardize_columns(const Matrix& m) {
  require_finite(m, "standardize_columns");
  if (m.rows() < 2) throw DimensionError("standardize_columns: need at least two rows");
  Matrix out = m.rowwise() - m.colwise().mean();
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double sd = std::sqrt(out.col(j).squaredNorm() / static_cast<double>(out.rows()));
    if (!(sd > 0.0)) {
      throw DomainError("standardize_columns: column " + std::to_string(j) + " has zero variance");
    }
    out.col(j) /= sd;
  }
  return out;
}

Matrix pca_reduce(const Matrix& m, int target_dims) {
  if (target_dims < 1) throw DimensionError("pca_reduce: target_dims must be >= 1");
  if (target_dims > m.cols()) {
    std::ostringstream msg;
    msg << "pca_reduce: target_dims " << target_dims << " exceeds column count " << m.cols();
    throw DimensionError(msg.str());
  }
  require_finite(m, "pca_reduce");
  const Matrix centered = m.rowwise() - m.colwise().mean();
  if (centered.squaredNorm() == 0.0) throw NumericalError("pca_reduce: data has zero variance");

  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  Matrix loadings = svd.matrixV().leftCols(target_dims);
  for (int k = 0; k < target_dims; ++k) {
    Vector col = loadings.col(k);
    Vector unused(0);
    apply_sign_convention(col, unused);
    loadings.col(k) = col;
  }
  return centered * loadings;
}

double vector_correlation(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionError("vector_correlation: length mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw DomainError("vector_correlation: zero vector");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

}  // namespace mpls
