#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pimpcs {

// Raised by every artifact loader. The kind distinguishes the diagnostics a
// caller may want to act on.
class FormatError : public std::runtime_error {
 public:
  enum class Kind { kIo, kVersion, kMalformedRow, kChecksum, kContent };
  FormatError(Kind kind, const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), kind_(kind), line_(line) {}
  Kind kind() const { return kind_; }
  // 1-based line number, 0 when not tied to a line.
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

// Shortest round-trip scientific representation.
std::string format_double(double v);
// Shortest round-trip representation, fixed or scientific, whichever is shorter.
std::string format_general(double v);
// Strict parse of a whole token; throws std::invalid_argument.
double parse_double(std::string_view token);
long long parse_int(std::string_view token);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

std::string sha256_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// Bodies of the checksummed text formats end with "# sha256=<hex of body>\n".
std::string seal_with_digest(std::string body);
// Verifies and strips the trailer; returns the body.
std::string_view unseal(std::string_view text, const std::string& what);
// Digest recorded in a sealed file's trailer.
std::string sealed_digest(std::string_view text);

// "key=value; key=value" pairs from a header line (after the leading tag).
std::vector<std::pair<std::string, std::string>> parse_header_fields(std::string_view fields);

}  // namespace pimpcs
