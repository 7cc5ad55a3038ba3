#include "noir/text.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <istream>

#include "noir/error.hpp"

namespace noir::text {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> tokens(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view s) {
  const std::string str = trim(s);
  if (str.empty()) fail(ErrorCode::ParseError, "empty number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(str.c_str(), &end);
  if (end != str.c_str() + str.size() || (errno == ERANGE && std::abs(v) == HUGE_VAL)) {
    fail(ErrorCode::ParseError, "bad number '" + str + "'");
  }
  return v;
}

long long parse_int(std::string_view s) {
  const std::string str = trim(s);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(str.c_str(), &end, 10);
  if (str.empty() || end != str.c_str() + str.size() || errno == ERANGE) {
    fail(ErrorCode::ParseError, "bad integer '" + str + "'");
  }
  return v;
}

std::vector<double> parse_doubles(std::string_view s, char sep) {
  std::vector<double> out;
  for (const auto& tok : split(s, sep)) out.push_back(parse_double(tok));
  return out;
}

std::string exact(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string Section::get(const std::string& key) const {
  auto v = find(key);
  if (!v) fail(ErrorCode::ParseError, "[" + name + "] is missing '" + key + "'");
  return *v;
}

std::optional<std::string> Section::find(const std::string& key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::vector<std::string> Section::all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries) {
    if (k == key) out.push_back(v);
  }
  return out;
}

std::vector<Section> parse_sections(std::istream& is, std::vector<std::string>* comments) {
  std::vector<Section> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#' || t[0] == ';') {
      if (comments) comments->push_back(trim(t.substr(1)));
      continue;
    }
    if (t.front() == '[') {
      if (t.back() != ']') fail(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": unterminated section");
      const auto words = tokens(t.substr(1, t.size() - 2));
      if (words.empty() || words.size() > 2) {
        fail(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": bad section header");
      }
      out.push_back({words[0], words.size() == 2 ? words[1] : "", {}, lineno});
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos || out.empty()) {
      fail(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected key = value inside a section");
    }
    std::string value = t.substr(eq + 1);
    if (const auto hash = value.find(" #"); hash != std::string::npos) value = value.substr(0, hash);
    out.back().entries.emplace_back(trim(t.substr(0, eq)), trim(value));
  }
  return out;
}

}  // namespace noir::text
