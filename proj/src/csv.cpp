#include "jellium/csv.hpp"

#include <cstdio>

#include "jellium/error.hpp"

namespace jellium {

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string csv_escape(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header)
    : out_(out), columns_(header.size()) {
  for (auto h : header) field(h);
  end_row();
  rows_ = 0;
}

void CsvWriter::separator() {
  if (in_row_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::field(std::string_view text) {
  separator();
  out_ << csv_escape(text);
  return *this;
}

CsvWriter& CsvWriter::field(double value) {
  separator();
  out_ << format_double(value);
  return *this;
}

CsvWriter& CsvWriter::field(long long value) {
  separator();
  out_ << value;
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw IndexOutOfRange("CSV row has the wrong number of fields");
  out_ << "\r\n";
  in_row_ = 0;
  ++rows_;
}

}  // namespace jellium
