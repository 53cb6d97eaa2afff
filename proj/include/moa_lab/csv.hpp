#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace moa_lab {

// Shortest round-trip decimal, independent of the global locale. Integral
// values keep a trailing ".0" so real-valued columns read as reals.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string out(buf, end);
  if (out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

// RFC 4180 rows: comma separated, fields quoted only when they contain a
// comma, quote or line break, every row terminated by '\n'.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      write_field(fields[i]);
    }
    out_ << '\n';
  }

 private:
  void write_field(std::string_view f) {
    if (f.find_first_of(",\"\r\n") == std::string_view::npos) {
      out_ << f;
      return;
    }
    out_ << '"';
    for (char c : f) {
      if (c == '"') out_ << '"';
      out_ << c;
    }
    out_ << '"';
  }

  std::ostream& out_;
};

}  // namespace moa_lab
