#pragma once

// Small string helpers shared by the text file formats.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace noir::text {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
/// Splits on runs of whitespace.
std::vector<std::string> tokens(std::string_view s);

double parse_double(std::string_view s);
long long parse_int(std::string_view s);
std::vector<double> parse_doubles(std::string_view s, char sep = ',');

/// Shortest representation that reads back to the same double.
std::string exact(double v);

/// `[name arg]` header followed by `key = value` lines. Entries keep file
/// order and keys may repeat.
struct Section {
  std::string name;
  std::string arg;
  std::vector<std::pair<std::string, std::string>> entries;
  int line = 0;

  std::string get(const std::string& key) const;  // ParseError when absent
  std::optional<std::string> find(const std::string& key) const;
  std::vector<std::string> all(const std::string& key) const;
};

/// Blank lines are skipped; `#` lines are collected into `comments` when given.
std::vector<Section> parse_sections(std::istream& is, std::vector<std::string>* comments = nullptr);

}  // namespace noir::text
