#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "cpgd/blocks.hpp"

namespace cpgd::io {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binary layout: 8-byte magic "CPGDMAT1", rows and cols as little-endian
// uint64, then rows*cols little-endian IEEE-754 doubles in row-major order.
inline constexpr char kMatrixMagic[8] = {'C', 'P', 'G', 'D', 'M', 'A', 'T', '1'};

enum class MatrixFormat { csv, binary };

/// `.csv` selects CSV; `.bin` and `.cpgdmat` select the binary format.
MatrixFormat format_for_path(const std::filesystem::path& path);

Matrix load_matrix(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const Matrix& m);

/// Comma-separated decimal rows, no header. Blank lines are skipped.
Matrix read_csv_matrix(std::istream& is, const std::string& source = "<stream>");
void write_csv_matrix(std::ostream& os, const Matrix& m);

Matrix read_binary_matrix(std::istream& is, const std::string& source = "<stream>");
void write_binary_matrix(std::ostream& os, const Matrix& m);

/// Shortest-safe decimal rendering: 17 significant digits, round-trips exactly.
std::string format_double(double v);

/// Strict decimal parse of a whole field (surrounding blanks allowed).
bool parse_double(std::string_view text, double& out);

}  // namespace cpgd::io
