#include "cpgd/matrix_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace cpgd::io {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

void put_u64_le(std::ostream& os, std::uint64_t v) {
  unsigned char bytes[8];
  for (int b = 0; b < 8; ++b) {
    bytes[b] = static_cast<unsigned char>((v >> (8 * b)) & 0xffu);
  }
  os.write(reinterpret_cast<const char*>(bytes), 8);
}

bool get_u64_le(std::istream& is, std::uint64_t& v) {
  unsigned char bytes[8];
  if (!is.read(reinterpret_cast<char*>(bytes), 8)) {
    return false;
  }
  v = 0;
  for (int b = 0; b < 8; ++b) {
    v |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  }
  return true;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) {
    return false;
  }
  if (text.front() == '+') {
    text.remove_prefix(1);
  }
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

MatrixFormat format_for_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") {
    return MatrixFormat::csv;
  }
  if (ext == ".bin" || ext == ".cpgdmat") {
    return MatrixFormat::binary;
  }
  throw IoError("cannot infer matrix format from extension of " + path.string() +
                " (expected .csv, .bin or .cpgdmat)");
}

Matrix read_csv_matrix(std::istream& is, const std::string& source) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) {
      continue;
    }
    std::size_t count = 0;
    std::size_t pos = 0;
    while (true) {
      const auto comma = body.find(',', pos);
      const auto field = body.substr(pos, comma == std::string_view::npos ? body.npos : comma - pos);
      double v = 0.0;
      if (!parse_double(field, v)) {
        throw IoError(source + ":" + std::to_string(line_no) + ": malformed number '" +
                      std::string(trim(field)) + "'");
      }
      if (!std::isfinite(v)) {
        throw IoError(source + ":" + std::to_string(line_no) + ": non-finite entry");
      }
      values.push_back(v);
      ++count;
      if (comma == std::string_view::npos) {
        break;
      }
      pos = comma + 1;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw IoError(source + ":" + std::to_string(line_no) + ": ragged row with " +
                    std::to_string(count) + " fields, expected " + std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) {
    throw IoError(source + ": no matrix rows");
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * cols + c];
    }
  }
  return m;
}

void write_csv_matrix(std::ostream& os, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) {
        os << ',';
      }
      os << format_double(m(r, c));
    }
    os << '\n';
  }
}

Matrix read_binary_matrix(std::istream& is, const std::string& source) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMatrixMagic, 8) != 0) {
    throw IoError(source + ": bad or missing CPGDMAT1 header");
  }
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  if (!get_u64_le(is, rows) || !get_u64_le(is, cols)) {
    throw IoError(source + ": truncated header");
  }
  if (rows == 0 || cols == 0 || rows > (std::uint64_t{1} << 32) || cols > (std::uint64_t{1} << 32)) {
    throw IoError(source + ": implausible dimensions " + std::to_string(rows) + "x" +
                  std::to_string(cols));
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (std::uint64_t c = 0; c < cols; ++c) {
      std::uint64_t bits = 0;
      if (!get_u64_le(is, bits)) {
        throw IoError(source + ": payload shorter than " + std::to_string(rows * cols) +
                      " values");
      }
      const double v = std::bit_cast<double>(bits);
      if (!std::isfinite(v)) {
        throw IoError(source + ": non-finite entry at (" + std::to_string(r) + ", " +
                      std::to_string(c) + ")");
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw IoError(source + ": trailing bytes after payload");
  }
  return m;
}

void write_binary_matrix(std::ostream& os, const Matrix& m) {
  os.write(kMatrixMagic, 8);
  put_u64_le(os, static_cast<std::uint64_t>(m.rows()));
  put_u64_le(os, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      put_u64_le(os, std::bit_cast<std::uint64_t>(m(r, c)));
    }
  }
}

Matrix load_matrix(const std::filesystem::path& path) {
  const auto fmt = format_for_path(path);
  std::ifstream in(path, fmt == MatrixFormat::binary ? std::ios::binary : std::ios::in);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return fmt == MatrixFormat::binary ? read_binary_matrix(in, path.string())
                                     : read_csv_matrix(in, path.string());
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  if (!m.allFinite()) {
    throw IoError("refusing to save a matrix with non-finite entries to " + path.string());
  }
  const auto fmt = format_for_path(path);
  std::ofstream out(path, fmt == MatrixFormat::binary ? std::ios::binary : std::ios::out);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  if (fmt == MatrixFormat::binary) {
    write_binary_matrix(out, m);
  } else {
    write_csv_matrix(out, m);
  }
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

}  // namespace cpgd::io
