#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace chiralflow {

// Shortest round-trip decimal representation (byte-stable across runs).
std::string fmt_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  bool good() const { return static_cast<bool>(out_); }

 private:
  std::ofstream out_;
};

std::string csv_cell(double v);
std::string csv_cell(long long v);
inline std::string csv_cell(int v) { return csv_cell(static_cast<long long>(v)); }
inline std::string csv_cell(const std::string& s) { return s; }

}  // namespace chiralflow
