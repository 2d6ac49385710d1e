#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace mfgan {

/// Formats a double with 17 significant digits so that it parses back to
/// the identical value.
std::string format_real(double value);

/// Comma-separated metrics table with a single header row.
///
/// A row is written as: text labels, the numeric index, then the numeric
/// values. Within one file the label count is fixed and the index must be
/// non-decreasing.
class MetricsWriter {
 public:
  MetricsWriter(const std::filesystem::path& path, std::vector<std::string> header,
                std::size_t label_count = 0);

  void append(double index, const std::vector<double>& values);
  void append(const std::vector<std::string>& labels, double index,
              const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::vector<std::string> header_;
  std::size_t label_count_;
  double last_index_ = 0.0;
  bool has_rows_ = false;
};

}  // namespace mfgan
