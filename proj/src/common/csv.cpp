#include "mfgan/common/csv.hpp"

#include <cmath>
#include <cstdio>

#include "mfgan/common/error.hpp"

namespace mfgan {

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path, std::vector<std::string> header,
                             std::size_t label_count)
    : out_(path), header_(std::move(header)), label_count_(label_count) {
  if (!out_) throw Error("cannot open metrics file " + path.string());
  for (std::size_t i = 0; i < header_.size(); ++i) out_ << (i ? "," : "") << header_[i];
  out_ << '\n';
  out_.flush();
}

void MetricsWriter::append(double index, const std::vector<double>& values) {
  append({}, index, values);
}

void MetricsWriter::append(const std::vector<std::string>& labels, double index,
                           const std::vector<double>& values) {
  if (labels.size() != label_count_ || labels.size() + 1 + values.size() != header_.size()) {
    throw ShapeError("metrics row does not match the " + std::to_string(header_.size()) +
                     "-column header");
  }
  if (has_rows_ && index < last_index_) {
    throw Error("metrics rows must be monotone in the index column");
  }
  has_rows_ = true;
  last_index_ = index;
  for (const auto& l : labels) out_ << l << ',';
  out_ << format_real(index);
  for (double v : values) out_ << ',' << format_real(v);
  out_ << '\n';
  out_.flush();
}

}  // namespace mfgan
