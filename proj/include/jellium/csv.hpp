#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace jellium {

// Shortest round-trip form is not needed; %.17g is stable and portable.
std::string format_double(double value);

// RFC-4180 writer: CRLF line ends, fields quoted only when they contain a
// comma, quote or line break.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header);

  CsvWriter& field(std::string_view text);
  CsvWriter& field(double value);
  CsvWriter& field(long long value);
  CsvWriter& field(int value) { return field(static_cast<long long>(value)); }
  void end_row();

  long long rows() const noexcept { return rows_; }

 private:
  void separator();

  std::ostream& out_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
  long long rows_ = 0;
};

std::string csv_escape(std::string_view text);

}  // namespace jellium
