// Monte Carlo checks of the closed-form predictions at N = 4000.
#include <doctest.h>

#include "mpls/estimators.hpp"
#include "mpls/harness.hpp"
#include "mpls/theory.hpp"

using namespace mpls;

namespace {

ModelConfig config(int n, int dx, int dy, double m_x, double m_y, double theta, std::uint64_t seed) {
  ModelConfig c;
  c.n_samples = n;
  c.dx = dx;
  c.dy = dy;
  c.mask_x = MaskSpec::mcar(m_x);
  c.mask_y = MaskSpec::mcar(m_y);
  c.theta = theta;
  c.seed = seed;
  return c;
}

struct McMean {
  double r2_x = 0, r2_y = 0, projection = 0;
};

McMean monte_carlo(const ModelConfig& base, int trials) {
  McMean m;
  for (int t = 0; t < trials; ++t) {
    ModelConfig c = base;
    c.seed = derive_seed(base.seed, t);
    const MaskedPair pair = generate_pair(c);
    const Matrix cross = rescaled_cross_covariance(pair);
    const EstimateResult est = estimate(pair, EstimatorKind::pls_svd_zero());
    m.r2_x += est.r2_x / trials;
    m.r2_y += est.r2_y / trials;
    m.projection += pair.u0.dot(cross * pair.v0) / trials;
  }
  return m;
}

}  // namespace

TEST_CASE("fully observed spiked model at alpha = 4 matches 0.75") {
  const McMean m = monte_carlo(config(4000, 1000, 1000, 0, 0, 1.0, 3), 5);
  CHECK(std::abs(m.r2_x - 0.75) < 0.02);
  CHECK(std::abs(m.r2_y - 0.75) < 0.02);
}

TEST_CASE("masked model at experiment-1 ratios and twice the threshold") {
  const double crit = theory::critical_threshold(5, 20, 0.42);
  const McMean m = monte_carlo(config(4000, 800, 200, 0.3, 0.4, 2 * crit, 5), 10);
  MESSAGE("mean r2_x " << m.r2_x << ", mean r2_y " << m.r2_y << ", mean u0'Cv0 " << m.projection);
  // Lemma-style mean of the projected cross-covariance.
  CHECK(std::abs(m.projection - theory::effective_spike(2 * crit, 0.42)) < 0.02);
  CHECK(std::abs(m.r2_y - 15.0 / 18.0) < 0.02);
  CHECK(std::abs(m.r2_x - 15.0 / 24.0) < 0.02);
}

TEST_CASE("effective spike at theta = 1, rho = 0.42") {
  const McMean m = monte_carlo(config(4000, 800, 200, 0.3, 0.4, 1.0, 9), 5);
  CHECK(std::abs(m.projection - 0.6480740698) < 0.02);
}

TEST_CASE("transition location at alpha = 4, rho = 0.25 is near 1") {
  // Bisect on the mean overlap crossing 20 times the null scale 1/D.
  constexpr int kDims = 1000;
  const double level = 20.0 / kDims;
  double lo = 0.7, hi = 1.3;
  for (int step = 0; step < 6; ++step) {
    const double mid = 0.5 * (lo + hi);
    // Same seeds at every step, so the bisected curve is one smooth function of theta.
    const McMean m = monte_carlo(config(4000, kDims, kDims, 0.5, 0.5, mid, 100), 6);
    (m.r2_x > level ? hi : lo) = mid;
  }
  const double located = 0.5 * (lo + hi);
  MESSAGE("empirical transition at theta = " << located);
  CHECK(std::abs(located - 1.0) < 0.05);
}
