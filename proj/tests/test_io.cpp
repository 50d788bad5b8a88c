#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "cpgd/matrix_io.hpp"
#include "cpgd/quadratic.hpp"
#include "cpgd/run_log_io.hpp"

using namespace cpgd;
using namespace cpgd::io;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "cpgd_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST_CASE("binary roundtrip is bit-exact") {
  CHECK(bit_equal(Matrix::Identity(2, 2), [] {
    std::stringstream ss;
    write_binary_matrix(ss, Matrix::Identity(2, 2));
    return read_binary_matrix(ss);
  }()));

  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  Matrix M(7, 5);
  for (auto& e : M.reshaped()) e = n(rng) * std::pow(10.0, n(rng) * 50);
  M(0, 0) = -0.0;
  M(1, 1) = std::numeric_limits<double>::denorm_min();
  M(2, 2) = std::numeric_limits<double>::max();
  const auto path = scratch("m.bin");
  save_matrix(path, M);
  CHECK(bit_equal(load_matrix(path), M));
  CHECK(std::filesystem::file_size(path) == 8 + 16 + 8 * 35);
}

TEST_CASE("binary header layout") {
  std::stringstream ss;
  Matrix M(2, 3);
  M << 1, 2, 3, 4, 5, 6;
  write_binary_matrix(ss, M);
  const std::string s = ss.str();
  CHECK(s.substr(0, 8) == "CPGDMAT1");
  CHECK(static_cast<unsigned char>(s[8]) == 2);
  CHECK(static_cast<unsigned char>(s[16]) == 3);
  double second = 0.0;
  std::memcpy(&second, s.data() + 24 + 8, 8);
  CHECK(second == 2.0);  // row-major
}

TEST_CASE("binary errors") {
  std::stringstream bad("NOTMAGIC");
  CHECK_THROWS_AS(read_binary_matrix(bad), IoError);
  std::stringstream ss;
  write_binary_matrix(ss, Matrix::Ones(2, 2));
  std::string s = ss.str();
  std::stringstream trunc(s.substr(0, s.size() - 3));
  CHECK_THROWS_AS(read_binary_matrix(trunc), IoError);
  std::stringstream extra(s + "x");
  CHECK_THROWS_AS(read_binary_matrix(extra), IoError);
  Matrix nan = Matrix::Ones(1, 1);
  nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(save_matrix(scratch("nan.bin"), nan), IoError);
}

TEST_CASE("CSV parsing and roundtrip") {
  std::stringstream ss("1,2\n3,4\n");
  const Matrix M = read_csv_matrix(ss);
  CHECK(M.rows() == 2);
  CHECK(M.cols() == 2);
  CHECK(M(1, 0) == 3.0);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  Matrix R(4, 6);
  for (auto& e : R.reshaped()) e = u(rng) / 7.0;
  const auto path = scratch("m.csv");
  save_matrix(path, R);
  const Matrix back = load_matrix(path);
  CHECK(((back - R).cwiseAbs().array() <= 1e-15 * R.cwiseAbs().array()).all());
}

TEST_CASE("CSV errors name the line") {
  std::stringstream ragged("1,2\n3\n");
  try {
    read_csv_matrix(ragged, "r.csv");
    FAIL("expected an error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("r.csv:2") != std::string::npos);
  }
  std::stringstream junk("1,x\n");
  CHECK_THROWS_AS(read_csv_matrix(junk), IoError);
  std::stringstream inf("1,inf\n");
  CHECK_THROWS_AS(read_csv_matrix(inf), IoError);
  std::stringstream empty("");
  CHECK_THROWS_AS(read_csv_matrix(empty), IoError);
  CHECK_THROWS_AS(format_for_path("m.txt"), IoError);
  CHECK_THROWS_AS(load_matrix(scratch("missing.csv")), IoError);
}

TEST_CASE("run log CSV roundtrip") {
  const auto q = random_quadratic(5, {2, 3}, 0.3, false, 1);
  SolverConfig cfg;
  cfg.max_cycles = 40;
  const auto log = run_cpgd(q, Point::Zero(5), cfg);
  std::stringstream ss;
  write_run_log_csv(ss, log);
  const std::string text = ss.str();
  CHECK(text.rfind("cycle,elapsed_s,F,step_norm,stat_bound,alpha_max,HF_max\n", 0) == 0);
  const auto back = read_run_log_csv(ss);
  REQUIRE(back.records.size() == log.records.size());
  for (std::size_t k = 0; k < log.records.size(); ++k) {
    CHECK(back.records[k].cycle == log.records[k].cycle);
    CHECK(back.records[k].F == log.records[k].F);
    CHECK(back.records[k].step_norm == log.records[k].step_norm);
    CHECK(back.records[k].stat_bound == log.records[k].stat_bound);
    CHECK(back.records[k].alpha_max == log.records[k].alpha_max);
    CHECK(back.records[k].HF_max == log.records[k].HF_max);
  }
  std::stringstream bad("cycle,F\n1,2\n");
  CHECK_THROWS_AS(read_run_log_csv(bad), IoError);
}
