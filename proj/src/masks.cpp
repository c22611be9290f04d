#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mpls/error.hpp"
#include "mpls/synth.hpp"

namespace mpls {
namespace {

// Upper quantile used by the thresholded mechanism.
constexpr double kThresholdQuantile = 0.7;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void standardize_in_place(Eigen::Ref<Vector> s) {
  const double mean = s.mean();
  s.array() -= mean;
  const double sd = std::sqrt(s.squaredNorm() / static_cast<double>(s.size()));
  if (sd > 0.0) {
    s /= sd;
  } else {
    s.setZero();
  }
}

const Matrix& need_view(const MaskContext& ctx, MaskMechanism m, int rows, int cols) {
  if (ctx.view == nullptr) {
    throw DomainError("sample_mask: mechanism '" + to_string(m) + "' needs the latent view as data context");
  }
  if (ctx.view->rows() != rows || ctx.view->cols() != cols) {
    throw DimensionError("sample_mask: data context shape does not match the mask shape");
  }
  return *ctx.view;
}

const Matrix& need_design(const MaskContext& ctx, MaskMechanism m, int rows) {
  if (ctx.design == nullptr) {
    throw DomainError("sample_mask: mechanism '" + to_string(m) + "' needs the latent design as data context");
  }
  if (ctx.design->rows() != rows) {
    throw DimensionError("sample_mask: design rows do not match the mask rows");
  }
  return *ctx.design;
}

Matrix broadcast_rows(const Vector& row_score, int cols) { return row_score.replicate(1, cols); }

}  // namespace

std::string to_string(MaskMechanism m) {
  switch (m) {
    case MaskMechanism::mcar:
      return "mcar";
    case MaskMechanism::signal_dependent:
      return "signal_dependent";
    case MaskMechanism::magnitude_dependent:
      return "magnitude_dependent";
    case MaskMechanism::thresholded:
      return "thresholded";
    case MaskMechanism::correlated:
      return "correlated";
  }
  return "mcar";
}

MaskMechanism parse_mechanism(const std::string& name) {
  for (auto m : {MaskMechanism::mcar, MaskMechanism::signal_dependent, MaskMechanism::magnitude_dependent,
                 MaskMechanism::thresholded, MaskMechanism::correlated}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown mask mechanism '" + name + "'");
}

void MaskSpec::validate() const {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw DomainError("mask: target rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!(strength >= 0.0 && strength <= 1.0)) {
    throw DomainError("mask: MAR strength must lie in [0, 1], got " + std::to_string(strength));
  }
}

Matrix mar_scores(MaskMechanism mechanism, const MaskContext& ctx, int rows, int cols) {
  switch (mechanism) {
    case MaskMechanism::mcar:
      return Matrix::Zero(rows, cols);
    case MaskMechanism::signal_dependent: {
      const Matrix& x = need_design(ctx, mechanism, rows);
      if (ctx.direction == nullptr || ctx.direction->size() != x.cols()) {
        throw DomainError("sample_mask: signal_dependent needs the planted direction u0");
      }
      Vector s = (x * *ctx.direction).cwiseAbs();
      standardize_in_place(s);
      return broadcast_rows(s, cols);
    }
    case MaskMechanism::correlated: {
      const Matrix& x = need_design(ctx, mechanism, rows);
      Vector s = x.cwiseAbs().rowwise().mean();
      standardize_in_place(s);
      return broadcast_rows(s, cols);
    }
    case MaskMechanism::magnitude_dependent: {
      const Matrix& v = need_view(ctx, mechanism, rows, cols);
      Matrix s = v.cwiseAbs();
      standardize_in_place(s.reshaped());
      return s;
    }
    case MaskMechanism::thresholded: {
      const Matrix& v = need_view(ctx, mechanism, rows, cols);
      Matrix s(rows, cols);
      std::vector<double> column;
      const auto k = static_cast<std::size_t>(std::floor(kThresholdQuantile * (rows - 1)));
      for (int j = 0; j < cols; ++j) {
        column.assign(v.col(j).data(), v.col(j).data() + rows);
        std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(k), column.end());
        const double cut = column[k];
        for (int i = 0; i < rows; ++i) s(i, j) = v(i, j) > cut ? 1.0 : 0.0;
      }
      standardize_in_place(s.reshaped());
      return s;
    }
  }
  return Matrix::Zero(rows, cols);
}

double calibrate_intercept(const Matrix& scores, double gamma, double target) {
  if (!(target > 0.0 && target < 1.0)) throw DomainError("calibrate_intercept: target must lie in (0, 1)");
  const double base = std::log(target / (1.0 - target));
  const double spread = gamma * (scores.size() > 0 ? scores.cwiseAbs().maxCoeff() : 0.0);
  double lo = base - spread - 1.0;
  double hi = base + spread + 1.0;
  const auto n = static_cast<double>(scores.size());

  double a = base;
  for (int it = 0; it < 200; ++it) {
    double mean = 0.0;
    double slope = 0.0;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
      const double p = sigmoid(a + gamma * scores.data()[i]);
      mean += p;
      slope += p * (1.0 - p);
    }
    mean /= n;
    slope /= n;
    const double f = mean - target;
    if (std::abs(f) < 1e-14) break;
    if (f > 0.0) {
      hi = a;
    } else {
      lo = a;
    }
    double next = slope > 0.0 ? a - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-15 * std::max(1.0, std::abs(a))) break;
    a = next;
  }
  return a;
}

Matrix sample_mask(const MaskSpec& spec, const MaskContext& ctx, int rows, int cols, Stream rng) {
  spec.validate();
  if (rows < 0 || cols < 0) throw DimensionError("sample_mask: negative dimensions");

  Matrix scores;
  double intercept = 0.0;
  const bool mar = spec.mechanism != MaskMechanism::mcar;
  if (mar) {
    // Validates the context even when gamma = 0.
    scores = mar_scores(spec.mechanism, ctx, rows, cols);
  }
  Matrix mask(rows, cols);
  if (spec.rate == 0.0) {
    mask.setOnes();
    return mask;
  }
  const bool uses_link = mar && spec.strength > 0.0;
  if (uses_link) intercept = calibrate_intercept(scores, spec.strength, spec.rate);

  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    const double p = uses_link ? sigmoid(intercept + spec.strength * scores.data()[i]) : spec.rate;
    mask.data()[i] = uniform(rng) < p ? 0.0 : 1.0;
  }
  return mask;
}

}  // namespace mpls
