#pragma once

// Small generators shared by the unit tests. Every generator is driven by a
// seeded Stream so property cases are reproducible.
#include <random>

#include "mpls/linalg.hpp"
#include "mpls/rng.hpp"

namespace testing {

inline mpls::Matrix gaussian_matrix(int rows, int cols, mpls::Stream rng) {
  std::normal_distribution<double> normal;
  mpls::Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

inline mpls::Vector unit_vector(int n, mpls::Stream rng) {
  mpls::Vector v = gaussian_matrix(n, 1, rng).col(0);
  return v / v.norm();
}

inline int uniform_int(mpls::Stream& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(mpls::Stream& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double max_abs(const mpls::Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing
