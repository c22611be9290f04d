#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "mpls/error.hpp"
#include "mpls/io.hpp"

namespace mpls::io {
namespace {

constexpr std::string_view kMagic = "MPLSMAT";

double parse_number(std::string_view token, const std::filesystem::path& path) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw IoError(path.string() + ": cannot parse '" + std::string(token) + "' as a number");
  }
  if (!std::isfinite(value)) throw IoError(path.string() + ": non-finite entry '" + std::string(token) + "'");
  return value;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void count_mismatch(const std::filesystem::path& path, Eigen::Index expected, Eigen::Index actual) {
  std::ostringstream msg;
  msg << path.string() << ": header/payload mismatch, expected " << expected << " values, found " << actual;
  throw IoError(msg.str());
}

std::string format_exact(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

}  // namespace

void write_matrix(const std::filesystem::path& path, const Matrix& m, MatrixEncoding encoding) {
  if (!m.allFinite()) throw IoError("write_matrix: matrix has non-finite entries");
  std::string out;
  if (encoding == MatrixEncoding::csv) {
    out += std::to_string(m.rows()) + "," + std::to_string(m.cols()) + "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j > 0) out += ',';
        out += format_exact(m(i, j));
      }
      out += '\n';
    }
  } else {
    out += std::string(kMagic) + " 1 " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + " " +
           (encoding == MatrixEncoding::binary ? "f64le" : "text") + "\n";
    if (encoding == MatrixEncoding::binary) {
      out.reserve(out.size() + static_cast<std::size_t>(m.size()) * 8);
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
          const auto bits = std::bit_cast<std::uint64_t>(m(i, j));
          for (int b = 0; b < 8; ++b) out += static_cast<char>((bits >> (8 * b)) & 0xFFu);
        }
      }
    } else {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
          if (j > 0) out += ' ';
          out += format_exact(m(i, j));
        }
        out += '\n';
      }
    }
  }
  write_file_atomic(path, out);
}

Matrix ingest_matrix(const std::filesystem::path& path, MatrixFileInfo* info) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open matrix file " + path.string());
  std::string first_line;
  if (!std::getline(in, first_line)) throw IoError(path.string() + ": empty file");

  MatrixFileInfo meta;
  Matrix m;
  if (first_line.rfind(kMagic, 0) == 0) {
    std::istringstream header(first_line);
    std::string magic, encoding;
    int version = 0;
    long long rows = -1, cols = -1;
    header >> magic >> version >> rows >> cols >> encoding;
    if (!header || magic != kMagic || version != 1 || rows < 0 || cols < 0) {
      throw IoError(path.string() + ": malformed header '" + trim(first_line) + "'");
    }
    meta.rows = rows;
    meta.cols = cols;
    m.resize(rows, cols);
    const Eigen::Index expected = rows * cols;
    if (encoding == "f64le") {
      meta.encoding = MatrixEncoding::binary;
      const std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      if (payload.size() != static_cast<std::size_t>(expected) * 8) {
        std::ostringstream msg;
        msg << path.string() << ": header/payload mismatch, expected " << expected << " values (" << expected * 8
            << " bytes), found " << payload.size() << " bytes";
        throw IoError(msg.str());
      }
      for (Eigen::Index k = 0; k < expected; ++k) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) {
          bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(payload[static_cast<std::size_t>(k * 8 + b)]))
                  << (8 * b);
        }
        const double v = std::bit_cast<double>(bits);
        if (!std::isfinite(v)) throw IoError(path.string() + ": non-finite entry at index " + std::to_string(k));
        m(k / cols, k % cols) = v;
      }
    } else if (encoding == "text") {
      meta.encoding = MatrixEncoding::text;
      std::string token;
      Eigen::Index k = 0;
      while (in >> token) {
        if (k >= expected) count_mismatch(path, expected, k + 1);
        m(k / cols, k % cols) = parse_number(token, path);
        ++k;
      }
      if (k != expected) count_mismatch(path, expected, k);
    } else {
      throw IoError(path.string() + ": unknown element encoding '" + encoding + "'");
    }
  } else {
    meta.encoding = MatrixEncoding::csv;
    const std::string header = trim(first_line);
    const auto comma = header.find(',');
    if (comma == std::string::npos) throw IoError(path.string() + ": CSV header must be 'rows,cols'");
    long long rows = 0, cols = 0;
    try {
      rows = std::stoll(header.substr(0, comma));
      cols = std::stoll(header.substr(comma + 1));
    } catch (const std::exception&) {
      throw IoError(path.string() + ": CSV header must be 'rows,cols'");
    }
    if (rows < 0 || cols < 0) throw IoError(path.string() + ": negative dimensions in CSV header");
    meta.rows = rows;
    meta.cols = cols;
    m.resize(rows, cols);
    std::string line;
    Eigen::Index k = 0;
    const Eigen::Index expected = rows * cols;
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty()) continue;
      std::size_t pos = 0;
      while (true) {
        const auto next = line.find(',', pos);
        const std::string cell = trim(line.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
        if (k >= expected) count_mismatch(path, expected, k + 1);
        m(k / cols, k % cols) = parse_number(cell, path);
        ++k;
        if (next == std::string::npos) break;
        pos = next + 1;
      }
    }
    if (k != expected) count_mismatch(path, expected, k);
  }
  if (info != nullptr) *info = meta;
  return m;
}

}  // namespace mpls::io
