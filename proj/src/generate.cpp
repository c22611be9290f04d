#include <cmath>
#include <random>
#include <sstream>

#include "mpls/error.hpp"
#include "mpls/synth.hpp"

namespace mpls {
namespace {

Vector random_unit(int n, Stream& rng) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v / v.norm();
}

void require_unit(const Vector& v, Eigen::Index expected, const char* name) {
  if (v.size() != expected) {
    std::ostringstream msg;
    msg << "generate_pair: " << name << " has length " << v.size() << ", expected " << expected;
    throw DimensionError(msg.str());
  }
  if (std::abs(v.norm() - 1.0) > 1e-10) {
    throw DomainError(std::string("generate_pair: ") + name + " must be a unit vector");
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (n_samples < 1 || dx < 1 || dy < 1) throw DimensionError("model: dimensions must be positive");
  if (n_samples < dx) {
    std::ostringstream msg;
    msg << "model: whitening needs n_samples >= dx, got N=" << n_samples << " dx=" << dx;
    throw DimensionError(msg.str());
  }
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw DomainError("model: theta must be finite and >= 0");
  mask_x.validate();
  mask_y.validate();
  noise.validate();
  if (design) {
    if (design->x_white.rows() != n_samples || design->x_white.cols() != dx || design->u.size() != dx ||
        design->v.size() != dy || design->dy != dy) {
      throw DimensionError("model: fixed design does not match (n_samples, dx, dy)");
    }
  }
}

MaskedPair assemble_pair(const Matrix& x_white, const Vector& u0, const Vector& v0, const ModelConfig& config) {
  const int n = static_cast<int>(x_white.rows());
  const int dy = static_cast<int>(v0.size());
  require_unit(u0, x_white.cols(), "u0");
  require_unit(v0, dy, "v0");

  MaskedPair pair;
  pair.u0 = u0;
  pair.v0 = v0;
  pair.rho = config.rho();
  pair.x_latent = x_white;

  pair.y_latent = sample_noise(config.noise, n, dy, Stream(config.seed, "noise"));
  if (config.theta != 0.0) {
    const Vector score = config.theta * (x_white * u0);
    pair.y_latent.noalias() += score * v0.transpose();
  }

  const MaskContext ctx_x{&pair.x_latent, &pair.x_latent, &pair.u0};
  const MaskContext ctx_y{&pair.y_latent, &pair.x_latent, &pair.u0};
  pair.mask_x = sample_mask(config.mask_x, ctx_x, n, static_cast<int>(x_white.cols()), Stream(config.seed, "mask_x"));
  pair.mask_y = sample_mask(config.mask_y, ctx_y, n, dy, Stream(config.seed, "mask_y"));
  pair.x_obs = pair.mask_x.cwiseProduct(pair.x_latent);
  pair.y_obs = pair.mask_y.cwiseProduct(pair.y_latent);
  return pair;
}

MaskedPair generate_pair(const ModelConfig& config, const std::optional<Directions>& planted) {
  config.validate();

  Matrix x_white;
  if (config.design) {
    x_white = config.design->x_white;
  } else {
    std::normal_distribution<double> normal;
    Stream rng(config.seed, "design");
    Matrix raw(config.n_samples, config.dx);
    for (Eigen::Index i = 0; i < raw.size(); ++i) raw.data()[i] = normal(rng);
    x_white = whiten(raw);
  }

  if (planted) return assemble_pair(x_white, planted->u0, planted->v0, config);
  if (config.design && !config.design->random_directions) {
    return assemble_pair(x_white, config.design->u, config.design->v, config);
  }
  Stream rng(config.seed, "directions");
  const Vector u0 = random_unit(config.dx, rng);
  const Vector v0 = random_unit(config.dy, rng);
  return assemble_pair(x_white, u0, v0, config);
}

FixedDesign semi_synthetic_basis(const Matrix& x_real, const Matrix& y_real, int target_dims) {
  if (x_real.rows() != y_real.rows()) {
    std::ostringstream msg;
    msg << "semi_synthetic: views have different sample counts (" << x_real.rows() << " vs " << y_real.rows() << ")";
    throw DimensionError(msg.str());
  }
  if (x_real.rows() < target_dims) {
    throw DimensionError("semi_synthetic: need at least target_dims samples");
  }
  const Matrix x_reduced = pca_reduce(standardize_columns(x_real), target_dims);
  const Matrix y_reduced = pca_reduce(standardize_columns(y_real), target_dims);

  FixedDesign basis;
  basis.x_white = whiten(x_reduced);
  const Matrix y_std = standardize_columns(y_reduced);
  const double n = static_cast<double>(x_real.rows());
  const Matrix cross = basis.x_white.transpose() * y_std / n;
  SingularTriple top = top_singular_pair(cross);
  basis.u = std::move(top.left);
  basis.v = std::move(top.right);
  basis.dy = target_dims;
  return basis;
}

MaskedPair semi_synthetic_pair(const Matrix& x_real, const Matrix& y_real, int target_dims, double theta,
                               const MaskSpec& mask_x, const MaskSpec& mask_y, std::uint64_t seed) {
  const FixedDesign basis = semi_synthetic_basis(x_real, y_real, target_dims);
  ModelConfig config;
  config.n_samples = static_cast<int>(x_real.rows());
  config.dx = target_dims;
  config.dy = target_dims;
  config.theta = theta;
  config.mask_x = mask_x;
  config.mask_y = mask_y;
  config.seed = seed;
  config.validate();
  return assemble_pair(basis.x_white, basis.u, basis.v, config);
}

}  // namespace mpls
