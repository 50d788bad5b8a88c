#include "cpgd/run_log_io.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "cpgd/matrix_io.hpp"

namespace cpgd::io {
namespace {

constexpr std::array<const char*, 7> kColumns = {"cycle",     "elapsed_s", "F",     "step_norm",
                                                 "stat_bound", "alpha_max", "HF_max"};
constexpr std::string_view kMetricPrefix = "metric:";

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

}  // namespace

void write_run_log_csv(std::ostream& os, const RunLog& log) {
  std::vector<std::string> metric_names;
  if (!log.records.empty()) {
    for (const auto& [name, value] : log.records.front().metrics) {
      metric_names.push_back(name);
    }
  }
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    os << (c ? "," : "") << kColumns[c];
  }
  for (const auto& name : metric_names) {
    os << ',' << kMetricPrefix << name;
  }
  os << '\n';
  for (const auto& rec : log.records) {
    os << rec.cycle << ',' << format_double(rec.elapsed_s) << ',' << format_double(rec.F) << ','
       << format_double(rec.step_norm) << ',' << format_double(rec.stat_bound) << ','
       << format_double(rec.alpha_max) << ',' << format_double(rec.HF_max);
    for (const auto& name : metric_names) {
      const auto it = rec.metrics.find(name);
      os << ',' << format_double(it == rec.metrics.end() ? 0.0 : it->second);
    }
    os << '\n';
  }
}

RunLog read_run_log_csv(std::istream& is, const std::string& source) {
  std::string line;
  if (!std::getline(is, line)) {
    throw IoError(source + ": empty run log");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  const auto header = split_commas(line);
  if (header.size() < kColumns.size()) {
    throw IoError(source + ": run-log header has too few columns");
  }
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    if (header[c] != kColumns[c]) {
      throw IoError(source + ": unexpected column '" + header[c] + "', expected '" +
                    kColumns[c] + "'");
    }
  }
  std::vector<std::string> metric_names;
  for (std::size_t c = kColumns.size(); c < header.size(); ++c) {
    if (header[c].rfind(kMetricPrefix, 0) != 0) {
      throw IoError(source + ": extra column '" + header[c] + "' is not a metric");
    }
    metric_names.push_back(header[c].substr(kMetricPrefix.size()));
  }

  RunLog log;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      throw IoError(source + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(header.size()) + " fields, got " +
                    std::to_string(fields.size()));
    }
    std::vector<double> v(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!parse_double(fields[c], v[c])) {
        throw IoError(source + ":" + std::to_string(line_no) + ": malformed number '" +
                      fields[c] + "'");
      }
    }
    CycleRecord rec;
    rec.cycle = static_cast<std::size_t>(v[0]);
    rec.elapsed_s = v[1];
    rec.F = v[2];
    rec.step_norm = v[3];
    rec.stat_bound = v[4];
    rec.alpha_max = v[5];
    rec.HF_max = v[6];
    for (std::size_t m = 0; m < metric_names.size(); ++m) {
      rec.metrics[metric_names[m]] = v[kColumns.size() + m];
    }
    log.records.push_back(std::move(rec));
  }
  return log;
}

}  // namespace cpgd::io
