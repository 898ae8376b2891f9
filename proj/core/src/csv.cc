#include "csv.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "relpose/errors.h"

namespace relpose::csv {

namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
         c == '\f';
}

std::string Printable(std::string_view token) {
  std::string out;
  for (char c : token.substr(0, 40)) {
    out += (static_cast<unsigned char>(c) >= 0x20 && c != 0x7f) ? c : '?';
  }
  if (token.size() > 40) out += "...";
  return out;
}

}  // namespace

std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsSpace(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> SplitWhitespace(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && IsSpace(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !IsSpace(s[i])) ++i;
    if (i > start) tokens.push_back(s.substr(start, i - start));
  }
  return tokens;
}

std::vector<std::string> SplitLine(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      if (!field.empty() || field_was_quoted) {
        throw ParseError(line_no, "stray quote inside unquoted field");
      }
      quoted = true;
      field_was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else {
      if (field_was_quoted) {
        throw ParseError(line_no, "characters after closing quote");
      }
      field += c;
    }
  }
  if (quoted) throw ParseError(line_no, "unterminated quoted field");
  fields.push_back(std::move(field));
  return fields;
}

std::string Escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos &&
      (field.empty() || (!IsSpace(field.front()) && !IsSpace(field.back())))) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string Join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

double ParseReal(std::string_view token, std::size_t line_no) {
  token = Trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (token.empty() || ptr != end ||
      (ec != std::errc() && ec != std::errc::result_out_of_range)) {
    throw ParseError(line_no, "expected a real number, got '" +
                                  Printable(token) + "'");
  }
  if (ec == std::errc::result_out_of_range) {
    // Subnormals may be flagged out of range; strtod still returns them.
    value = std::strtod(std::string(token).c_str(), nullptr);
  }
  if (!std::isfinite(value)) {
    throw NonFiniteValue(line_no,
                         "non-finite real number '" + Printable(token) + "'");
  }
  return value;
}

std::int64_t ParseInt(std::string_view token, std::size_t line_no) {
  token = Trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  std::int64_t value = 0;
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (token.empty() || ptr != end || ec != std::errc()) {
    throw ParseError(line_no,
                     "expected an integer, got '" + Printable(token) + "'");
  }
  return value;
}

std::string FormatReal(double value) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(n));
}

bool LineReader::Next(std::string& line) {
  if (!std::getline(in_, line)) return false;
  ++line_no_;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

void ExpectHeader(LineReader& reader, const std::vector<std::string>& columns) {
  std::string line;
  if (!reader.Next(line)) {
    throw ParseError(1, "missing header line");
  }
  const auto fields = SplitLine(line, reader.line_no());
  if (fields.size() != columns.size()) {
    throw ParseError(reader.line_no(), "header has " +
                                           std::to_string(fields.size()) +
                                           " columns, expected " +
                                           std::to_string(columns.size()));
  }
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (Trim(fields[i]) != columns[i]) {
      throw ParseError(reader.line_no(), "header column " +
                                             std::to_string(i + 1) +
                                             " should be '" + columns[i] + "'");
    }
  }
}

}  // namespace relpose::csv
