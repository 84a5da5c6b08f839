#include "pimpcs/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace pimpcs {

std::string format_double(double v) {
  std::array<char, 64> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::scientific);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), ptr);
}

std::string format_general(double v) {
  std::array<char, 64> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("format_general failed");
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view token) {
  token = trim(token);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty())
    throw std::invalid_argument("not a number: '" + std::string(token) + "'");
  return v;
}

long long parse_int(std::string_view token) {
  token = trim(token);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty())
    throw std::invalid_argument("not an integer: '" + std::string(token) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatError::Kind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatError::Kind::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(FormatError::Kind::kIo, "write failed for " + path.string());
}

namespace {
constexpr std::string_view kDigestTag = "# sha256=";

// Position of the trailer line, npos if absent.
std::size_t trailer_pos(std::string_view text) {
  std::string_view t = text;
  while (!t.empty() && (t.back() == '\n' || t.back() == '\r')) t.remove_suffix(1);
  const std::size_t nl = t.rfind('\n');
  const std::size_t start = nl == std::string_view::npos ? 0 : nl + 1;
  if (t.substr(start, kDigestTag.size()) != kDigestTag) return std::string_view::npos;
  return start;
}
}  // namespace

std::string seal_with_digest(std::string body) {
  const std::string digest = sha256_hex(body);
  body.append(kDigestTag);
  body.append(digest);
  body.push_back('\n');
  return body;
}

std::string sealed_digest(std::string_view text) {
  const std::size_t pos = trailer_pos(text);
  if (pos == std::string_view::npos) return {};
  return std::string(trim(text.substr(pos + kDigestTag.size())));
}

std::string_view unseal(std::string_view text, const std::string& what) {
  const std::size_t pos = trailer_pos(text);
  if (pos == std::string_view::npos) {
    const std::size_t lines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
    throw FormatError(FormatError::Kind::kMalformedRow,
                      what + ": missing '# sha256=' trailer (file truncated?) after line " +
                          std::to_string(lines),
                      lines + 1);
  }
  const std::string_view body = text.substr(0, pos);
  const std::string recorded(trim(text.substr(pos + kDigestTag.size())));
  const std::string actual = sha256_hex(body);
  if (recorded != actual)
    throw FormatError(FormatError::Kind::kChecksum,
                      what + ": checksum mismatch (recorded " + recorded + ", computed " + actual +
                          ")");
  return body;
}

std::vector<std::pair<std::string, std::string>> parse_header_fields(std::string_view fields) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::string_view part : split(fields, ';')) {
    part = trim(part);
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) {
      out.emplace_back(std::string(part), std::string());
    } else {
      out.emplace_back(std::string(trim(part.substr(0, eq))),
                       std::string(trim(part.substr(eq + 1))));
    }
  }
  return out;
}

}  // namespace pimpcs
