#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

// Text helpers shared by the file readers and writers. Not installed.
namespace relpose::csv {

std::string_view Trim(std::string_view s);
std::vector<std::string_view> SplitWhitespace(std::string_view s);

// Splits one CSV record. Fields may be double-quoted; embedded quotes are
// doubled. Throws ParseError on an unterminated quote.
std::vector<std::string> SplitLine(std::string_view line, std::size_t line_no);
std::string Escape(std::string_view field);
std::string Join(const std::vector<std::string>& fields);

// Finite doubles only; NaN and infinities raise NonFiniteValue.
double ParseReal(std::string_view token, std::size_t line_no);
std::int64_t ParseInt(std::string_view token, std::size_t line_no);

// Shortest form is not required, only exact round-trip: 17 significant
// digits always reproduce the same double.
std::string FormatReal(double value);

// Reads physical lines, strips a trailing '\r' and tracks 1-based numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}
  bool Next(std::string& line);
  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

// Reads the header line and checks it against the expected column names.
void ExpectHeader(LineReader& reader, const std::vector<std::string>& columns);

}  // namespace relpose::csv
