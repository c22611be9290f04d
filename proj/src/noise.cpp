#include <cmath>
#include <random>
#include <regex>
#include <sstream>

#include "mpls/error.hpp"
#include "mpls/synth.hpp"

namespace mpls {

void NoiseSpec::validate() const {
  switch (kind) {
    case NoiseKind::gaussian:
    case NoiseKind::laplace:
      return;
    case NoiseKind::student_t:
      if (!(nu > 2.0)) {
        throw DomainError("noise: student_t needs nu > 2 for finite variance, got " + std::to_string(nu));
      }
      return;
    case NoiseKind::heteroskedastic:
      if (!(low > 0.0) || !(high >= low)) {
        throw DomainError("noise: heteroskedastic bounds must satisfy 0 < low <= high");
      }
      if (std::abs(0.5 * (low + high) - 1.0) > 1e-12) {
        throw DomainError("noise: heteroskedastic bounds must average to 1 (unit variance)");
      }
      return;
  }
}

std::string NoiseSpec::label() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind) {
    case NoiseKind::gaussian:
      return "gaussian";
    case NoiseKind::laplace:
      return "laplace";
    case NoiseKind::student_t:
      out << "student_t(" << nu << ")";
      return out.str();
    case NoiseKind::heteroskedastic:
      out << "heteroskedastic(" << low << "," << high << ")";
      return out.str();
  }
  return "gaussian";
}

NoiseSpec NoiseSpec::parse(const std::string& label) {
  static const std::regex student(R"(student_t\(\s*([^)\s]+)\s*\))");
  static const std::regex hetero(R"(heteroskedastic\(\s*([^,\s]+)\s*,\s*([^)\s]+)\s*\))");
  std::smatch m;
  NoiseSpec spec;
  try {
    if (label == "gaussian") {
      spec = gaussian();
    } else if (label == "laplace") {
      spec = laplace();
    } else if (label == "student_t") {
      spec = student_t(5.0);
    } else if (std::regex_match(label, m, student)) {
      spec = student_t(std::stod(m[1]));
    } else if (label == "heteroskedastic") {
      spec = heteroskedastic(0.5, 1.5);
    } else if (std::regex_match(label, m, hetero)) {
      spec = heteroskedastic(std::stod(m[1]), std::stod(m[2]));
    } else {
      throw ConfigError("unknown noise kind '" + label + "'");
    }
  } catch (const std::logic_error&) {
    throw ConfigError("malformed noise spec '" + label + "'");
  }
  spec.validate();
  return spec;
}

Matrix sample_noise(const NoiseSpec& spec, int rows, int cols, Stream rng) {
  spec.validate();
  if (rows < 0 || cols < 0) throw DimensionError("sample_noise: negative dimensions");
  Matrix z(rows, cols);
  switch (spec.kind) {
    case NoiseKind::gaussian: {
      std::normal_distribution<double> normal;
      for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = normal(rng);
      break;
    }
    case NoiseKind::student_t: {
      std::student_t_distribution<double> t(spec.nu);
      const double scale = 1.0 / std::sqrt(spec.nu / (spec.nu - 2.0));
      for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = scale * t(rng);
      break;
    }
    case NoiseKind::laplace: {
      // Difference of two unit exponentials is Laplace(0, 1); variance 2.
      std::exponential_distribution<double> expo(1.0);
      const double scale = 1.0 / std::sqrt(2.0);
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double a = expo(rng);
        const double b = expo(rng);
        z.data()[i] = scale * (a - b);
      }
      break;
    }
    case NoiseKind::heteroskedastic: {
      Stream variance_rng = rng.split("column-variance");
      std::uniform_real_distribution<double> uniform(spec.low, spec.high);
      std::normal_distribution<double> normal;
      for (int j = 0; j < cols; ++j) {
        const double sd = std::sqrt(uniform(variance_rng));
        for (int i = 0; i < rows; ++i) z(i, j) = sd * normal(rng);
      }
      break;
    }
  }
  return z;
}

}  // namespace mpls
