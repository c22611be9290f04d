#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "mpls/linalg.hpp"
#include "mpls/rng.hpp"

namespace mpls {

// ---------------------------------------------------------------- noise

enum class NoiseKind { gaussian, student_t, laplace, heteroskedastic };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian;
  double nu = 5.0;    // student_t degrees of freedom, > 2
  double low = 0.5;   // heteroskedastic per-column variance range,
  double high = 1.5;  // (low + high) / 2 == 1

  static NoiseSpec gaussian() { return {}; }
  static NoiseSpec student_t(double nu) { return {NoiseKind::student_t, nu, 0.5, 1.5}; }
  static NoiseSpec laplace() { return {NoiseKind::laplace, 5.0, 0.5, 1.5}; }
  static NoiseSpec heteroskedastic(double low, double high) { return {NoiseKind::heteroskedastic, 5.0, low, high}; }

  void validate() const;
  // "gaussian", "student_t(5)", "laplace", "heteroskedastic(0.5,1.5)".
  std::string label() const;
  static NoiseSpec parse(const std::string& label);
  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

// Unit-variance noise. Heteroskedastic draws one variance per column
// from Uniform[low, high].
Matrix sample_noise(const NoiseSpec& spec, int rows, int cols, Stream rng);

// ---------------------------------------------------------------- masks

enum class MaskMechanism { mcar, signal_dependent, magnitude_dependent, thresholded, correlated };

struct MaskSpec {
  MaskMechanism mechanism = MaskMechanism::mcar;
  double rate = 0.0;      // target marginal missing probability, [0, 1)
  double strength = 0.0;  // MAR strength gamma, [0, 1]; 0 means MCAR

  static MaskSpec mcar(double rate) { return {MaskMechanism::mcar, rate, 0.0}; }
  void validate() const;
  friend bool operator==(const MaskSpec&, const MaskSpec&) = default;
};

std::string to_string(MaskMechanism m);
MaskMechanism parse_mechanism(const std::string& name);

// Data a MAR mechanism may look at. `view` is the latent matrix being
// masked; `design` and `direction` are the latent X and u0 used by the
// row-level mechanisms.
struct MaskContext {
  const Matrix* view = nullptr;
  const Matrix* design = nullptr;
  const Vector* direction = nullptr;
};

// Standardised score behind a MAR mechanism, one entry per matrix cell
// (row-level mechanisms repeat the row score across the row).
Matrix mar_scores(MaskMechanism mechanism, const MaskContext& context, int rows, int cols);

// Intercept a with mean(sigmoid(a + gamma * s)) == target.
double calibrate_intercept(const Matrix& scores, double gamma, double target);

// 1 = retained, 0 = missing. Missing probability is sigmoid(a + gamma * s)
// with a calibrated so the expected marginal rate equals spec.rate.
Matrix sample_mask(const MaskSpec& spec, const MaskContext& context, int rows, int cols, Stream rng);

// ---------------------------------------------------------------- model

// Fixed whitened design plus planted directions, used by the semi-synthetic
// construction. When present on a ModelConfig it replaces the per-trial
// random design.
struct FixedDesign {
  Matrix x_white;  // N x D_x, x_white^T x_white = N I
  Vector u;        // D_x
  Vector v;        // D_y
  int dy = 0;
  bool random_directions = false;  // draw fresh (u0, v0) per trial instead of (u, v)
  std::string source;              // free-form provenance, echoed in run metadata
};

struct ModelConfig {
  int n_samples = 1000;
  int dx = 200;
  int dy = 50;
  double theta = 1.0;
  MaskSpec mask_x;
  MaskSpec mask_y;
  NoiseSpec noise;
  std::uint64_t seed = 1;
  std::shared_ptr<const FixedDesign> design;

  double alpha_x() const { return static_cast<double>(n_samples) / dx; }
  double alpha_y() const { return static_cast<double>(n_samples) / dy; }
  // Configured joint retention (1 - m_x)(1 - m_y).
  double rho() const { return (1.0 - mask_x.rate) * (1.0 - mask_y.rate); }
  void validate() const;
};

struct MaskedPair {
  Matrix x_obs;
  Matrix y_obs;
  Matrix mask_x;
  Matrix mask_y;
  Vector u0;
  Vector v0;
  double rho = 1.0;  // configured joint retention
  // Latent complete views, kept for the oracle estimator.
  Matrix x_latent;
  Matrix y_latent;

  int n() const { return static_cast<int>(x_obs.rows()); }
};

struct Directions {
  Vector u0;
  Vector v0;
};

// Spiked two-view model: X = whiten(Gaussian), Y = theta (X u0) v0^T + Z,
// then masks. Randomness comes from named substreams of config.seed
// ("design", "directions", "noise", "mask_x", "mask_y").
MaskedPair generate_pair(const ModelConfig& config, const std::optional<Directions>& planted = std::nullopt);

// The response/mask half of generate_pair on a given whitened design.
MaskedPair assemble_pair(const Matrix& x_white, const Vector& u0, const Vector& v0, const ModelConfig& config);

// Standardise both views, reduce each to target_dims by PCA, whiten X,
// z-score Y, and take (u_bio, v_bio) as the leading singular pair of
// X_w^T Y_s / N.
FixedDesign semi_synthetic_basis(const Matrix& x_real, const Matrix& y_real, int target_dims);

MaskedPair semi_synthetic_pair(const Matrix& x_real, const Matrix& y_real, int target_dims, double theta,
                               const MaskSpec& mask_x, const MaskSpec& mask_y, std::uint64_t seed);

}  // namespace mpls
