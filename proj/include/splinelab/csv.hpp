#pragma once

#include <cstdio>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace splinelab {

/// Shortest-roundtrip-safe decimal for CSV cells ("%.17g", '.' decimal).
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Minimal CSV builder: ',' separator, LF line endings, header first.
class CsvWriter {
 public:
  explicit CsvWriter(std::initializer_list<std::string_view> header) {
    bool first = true;
    for (auto h : header) {
      if (!first) out_ += ',';
      out_ += h;
      first = false;
    }
    out_ += '\n';
  }

  void row(std::initializer_list<double> cells) {
    bool first = true;
    for (double c : cells) {
      if (!first) out_ += ',';
      out_ += format_number(c);
      first = false;
    }
    out_ += '\n';
  }

  void row(const std::vector<double>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ += ',';
      out_ += format_number(cells[i]);
    }
    out_ += '\n';
  }

  const std::string& str() const noexcept { return out_; }

 private:
  std::string out_;
};

}  // namespace splinelab
