#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "mpls/error.hpp"
#include "mpls/linalg.hpp"
#include "support.hpp"

using namespace mpls;
using testing::gaussian_matrix;
using testing::max_abs;

namespace {

// Leading singular triple from the eigendecomposition of the smaller Gram
// matrix. Independent of the SVD routines under test.
struct Reference {
  double value;
  Vector left;
  Vector right;
};

Reference gram_reference(const Matrix& m) {
  if (m.rows() <= m.cols()) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m * m.transpose());
    const Eigen::Index top = m.rows() - 1;
    Vector left = eig.eigenvectors().col(top);
    const double value = std::sqrt(std::max(0.0, eig.eigenvalues()(top)));
    return {value, left, m.transpose() * left / value};
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.transpose() * m);
  const Eigen::Index top = m.cols() - 1;
  Vector right = eig.eigenvectors().col(top);
  const double value = std::sqrt(std::max(0.0, eig.eigenvalues()(top)));
  return {value, m * right / value, right};
}

}  // namespace

TEST_CASE("whiten: identity and orthogonal columns") {
  const Matrix w = whiten(Matrix::Identity(3, 3));
  CHECK(max_abs(w - std::sqrt(3.0) * Matrix::Identity(3, 3)) < 1e-12);

  Matrix raw = Matrix::Zero(4, 2);
  raw(0, 0) = 2.0;
  raw(1, 1) = 5.0;
  const Matrix r = whiten(raw);
  CHECK(r.col(0).norm() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.col(1).norm() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(r.col(0).dot(r.col(1))) < 1e-12);
}

TEST_CASE("whiten: Gram invariant and column space over random shapes") {
  Stream gen(11, "whiten-shapes");
  for (int c = 0; c < 25; ++c) {
    const int cols = testing::uniform_int(gen, 1, 40);
    const int rows = cols + testing::uniform_int(gen, 0, 60);
    const Matrix raw = gaussian_matrix(rows, cols, gen.split("case" + std::to_string(c)));
    const Matrix w = whiten(raw);
    const Matrix gram = w.transpose() * w;
    CHECK(max_abs(gram - rows * Matrix::Identity(cols, cols)) < 1e-8);
    // Same column space: projecting raw onto span(w) leaves it unchanged.
    const Matrix projected = w * (w.transpose() * raw) / rows;
    CHECK(max_abs(projected - raw) < 1e-8 * (1.0 + max_abs(raw)));
    // Idempotent up to rotation.
    const Matrix ww = whiten(w);
    CHECK(max_abs(ww.transpose() * ww - rows * Matrix::Identity(cols, cols)) < 1e-8);
  }
}

TEST_CASE("whiten: seeded 50x10 Gaussian") {
  const Matrix w = whiten(gaussian_matrix(50, 10, Stream(5, "w50")));
  CHECK(max_abs(w.transpose() * w - 50.0 * Matrix::Identity(10, 10)) < 1e-8);
}

TEST_CASE("whiten: errors") {
  CHECK_THROWS_AS(whiten(Matrix::Ones(2, 3)), DimensionError);
  Matrix deficient = gaussian_matrix(10, 3, Stream(1, "d"));
  deficient.col(2) = deficient.col(0) + deficient.col(1);
  try {
    whiten(deficient);
    FAIL("rank-deficient input accepted");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("condition") != std::string::npos);
  }
  Matrix bad = Matrix::Identity(3, 3);
  bad(1, 1) = NAN;
  CHECK_THROWS_AS(whiten(bad), DomainError);
}

TEST_CASE("top_singular_pair: closed-form cases") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  SingularTriple t = top_singular_pair(d);
  CHECK(t.value == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(max_abs(t.left - Vector::Unit(2, 0)) < 1e-12);
  CHECK(max_abs(t.right - Vector::Unit(2, 0)) < 1e-12);

  Stream gen(3, "rank1");
  for (auto [rows, cols] : {std::pair{5, 4}, std::pair{60, 45}}) {
    const Vector u = testing::unit_vector(rows, gen.split("u"));
    const Vector v = testing::unit_vector(cols, gen.split("v"));
    const SingularTriple r = top_singular_pair(2.5 * u * v.transpose());
    CHECK(r.value == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(std::abs(std::abs(r.left.dot(u)) - 1.0) < 1e-10);
    CHECK(std::abs(std::abs(r.right.dot(v)) - 1.0) < 1e-10);
    Eigen::Index arg;
    r.left.cwiseAbs().maxCoeff(&arg);
    CHECK(r.left(arg) > 0.0);
  }
  CHECK_THROWS_AS(top_singular_pair(Matrix::Zero(3, 3)), NumericalError);
  CHECK_THROWS_AS(top_singular_pair(Matrix::Zero(50, 40)), NumericalError);
}

TEST_CASE("top_singular_pair: dense path matches the Gram oracle up to 12x12") {
  Stream gen(17, "svd-corpus");
  for (int c = 0; c < 60; ++c) {
    const int rows = testing::uniform_int(gen, 1, 12);
    const int cols = testing::uniform_int(gen, 1, 12);
    const Matrix m = gaussian_matrix(rows, cols, gen.split("m" + std::to_string(c)));
    const SingularTriple t = top_singular_pair(m);
    const Reference ref = gram_reference(m);
    CHECK(std::abs(t.value - ref.value) < 1e-10 * std::max(1.0, ref.value));
    CHECK(std::abs(t.left.dot(ref.left)) > 1.0 - 1e-10);
    CHECK(std::abs(t.right.dot(ref.right)) > 1.0 - 1e-10);
    CHECK(std::abs(t.left.norm() - 1.0) < 1e-10);
    CHECK(std::abs(t.right.norm() - 1.0) < 1e-10);
  }
}

TEST_CASE("power path agrees with the dense oracle") {
  // Seeded 8x5 through the power solver directly, plus larger planted cases
  // that take the power path inside top_singular_pair.
  const Matrix small = gaussian_matrix(8, 5, Stream(8, "8x5"));
  const SingularTriple p = power_singular_pair(small, 1e-14, 200000);
  const SingularTriple d = dense_singular_pair(small);
  CHECK(std::abs(p.value - d.value) < 1e-10 * d.value);
  CHECK(std::abs(p.left.dot(d.left)) > 1.0 - 1e-10);
  CHECK(std::abs(p.right.dot(d.right)) > 1.0 - 1e-10);

  Stream gen(9, "power-large");
  for (int c = 0; c < 5; ++c) {
    const int rows = testing::uniform_int(gen, 40, 120);
    const int cols = testing::uniform_int(gen, 40, 120);
    Stream cs = gen.split("c" + std::to_string(c));
    const Matrix m = gaussian_matrix(rows, cols, cs.split("noise")) / std::sqrt(double(rows)) +
                     4.0 * testing::unit_vector(rows, cs.split("u")) * testing::unit_vector(cols, cs.split("v")).transpose();
    const SingularTriple t = top_singular_pair(m);
    CHECK(t.iterations > 0);
    const Reference ref = gram_reference(m);
    CHECK(std::abs(t.value - ref.value) < 1e-9 * ref.value);
    CHECK(std::abs(t.left.dot(ref.left)) > 1.0 - 1e-9);
  }
}

TEST_CASE("sign convention is deterministic and bitwise reproducible") {
  Stream gen(21, "sign");
  for (int c = 0; c < 10; ++c) {
    const Matrix m = gaussian_matrix(testing::uniform_int(gen, 2, 80), testing::uniform_int(gen, 2, 80),
                                     gen.split(std::to_string(c)));
    const SingularTriple a = top_singular_pair(m);
    const SingularTriple b = top_singular_pair(m);
    CHECK(a.left == b.left);
    CHECK(a.right == b.right);
    const SingularTriple neg = top_singular_pair(-m);
    // Negating M flips exactly one of the two vectors; the convention pins left.
    CHECK(max_abs(neg.left - a.left) < 1e-8);
    CHECK(max_abs(neg.right + a.right) < 1e-8);
  }
  Vector left(3), right(2);
  left << 0.5, -0.5, 0.1;
  right << 1.0, 2.0;
  apply_sign_convention(left, right);  // tie on |0.5|: lowest index wins
  CHECK(left(0) == 0.5);
  CHECK(right(0) == 1.0);
}

TEST_CASE("pca_reduce") {
  Stream gen(31, "pca");
  SUBCASE("exact 2-D subspace") {
    const Matrix basis = gaussian_matrix(2, 6, gen.split("basis"));
    const Matrix data = gaussian_matrix(40, 2, gen.split("coef")) * basis;
    const Matrix centered = data.rowwise() - data.colwise().mean();
    const Matrix scores = pca_reduce(data, 2);
    // Least-squares reconstruction from the two score columns.
    const Matrix load = scores.colPivHouseholderQr().solve(centered);
    CHECK(max_abs(scores * load - centered) < 1e-10);
  }
  SUBCASE("full dimension preserves total variance") {
    const Matrix data = gaussian_matrix(30, 5, gen.split("full"));
    const Matrix centered = data.rowwise() - data.colwise().mean();
    const Matrix scores = pca_reduce(data, 5);
    CHECK(std::abs(scores.squaredNorm() - centered.squaredNorm()) < 1e-8 * centered.squaredNorm());
  }
  SUBCASE("component variances match a covariance eigendecomposition") {
    Matrix data = gaussian_matrix(100, 10, gen.split("profile"));
    for (int j = 0; j < 10; ++j) data.col(j) *= 10.0 - j;  // planted variance profile
    const Matrix centered = data.rowwise() - data.colwise().mean();
    const Matrix cov = centered.transpose() * centered / 99.0;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    const Matrix scores = pca_reduce(data, 4);
    for (int k = 0; k < 4; ++k) {
      const double var = scores.col(k).squaredNorm() / 99.0;
      CHECK(std::abs(var - eig.eigenvalues()(9 - k)) < 1e-8 * eig.eigenvalues()(9));
      if (k > 0) CHECK(var <= scores.col(k - 1).squaredNorm() / 99.0 + 1e-12);
    }
  }
  CHECK_THROWS_AS(pca_reduce(Matrix::Ones(5, 3), 4), DimensionError);
  CHECK_THROWS_AS(pca_reduce(Matrix::Ones(5, 3), 2), NumericalError);
}

TEST_CASE("vector_correlation") {
  Vector a(2), b(2);
  a << 1.0, 1.0;
  CHECK(vector_correlation(a, a) == doctest::Approx(1.0));
  b << 1.0, -1.0;
  CHECK(vector_correlation(a, b) == doctest::Approx(0.0));
  b << 1.0, 0.0;
  CHECK(vector_correlation(a / std::sqrt(2.0), b) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(vector_correlation(a, Vector::Zero(2)), DomainError);
  CHECK_THROWS(vector_correlation(a, Vector::Ones(3)));
}

TEST_CASE("standardize_columns") {
  const Matrix data = gaussian_matrix(50, 4, Stream(1, "std")) * 3.0 + Matrix::Constant(50, 4, 2.0);
  const Matrix s = standardize_columns(data);
  for (int j = 0; j < 4; ++j) {
    CHECK(std::abs(s.col(j).mean()) < 1e-12);
    CHECK(s.col(j).squaredNorm() / 50.0 == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS(standardize_columns(Matrix::Ones(4, 2)));
}
