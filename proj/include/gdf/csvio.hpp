#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace gdf::csvio {

// 17 significant digits: doubles round-trip, outputs stay byte-identical
// across runs.
std::string format_double(double x);

// CSV with a '#'-prefixed header block (units, truncation, policy,
// tolerances, resolved config) before the column row.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::pair<std::string, std::string>>& meta,
            const std::vector<std::string>& columns);

  void row(const std::vector<double>& values);
  void raw_row(const std::string& line);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t columns_ = 0;
};

void ensure_directory(const std::string& path);

}  // namespace gdf::csvio
