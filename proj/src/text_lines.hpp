#pragma once

// Shared tokenizer for the line-oriented graph and schedule formats.

#include <charconv>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

namespace ddet {

// Calls fn(line_number, tokens) for every non-blank line with `#` comments
// stripped.
template <class Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ss(raw);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(std::move(t));
    if (!tok.empty()) fn(line, tok);
  }
}

template <class MakeError>
long parse_long(const std::string& s, MakeError&& make_error) {
  long v = 0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw make_error();
  return v;
}

template <class MakeError>
double parse_double(const std::string& s, MakeError&& make_error) {
  double v = 0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw make_error();
  return v;
}

}  // namespace ddet
