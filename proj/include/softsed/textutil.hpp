// Copyright 2026 The softsed authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef SOFTSED_TEXTUTIL_HPP
#define SOFTSED_TEXTUTIL_HPP

#include <charconv>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "softsed/common.hpp"

namespace softsed::text {

inline std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Splits on tabs if that yields `want` non-empty fields (labels may contain
// spaces); otherwise splits on any whitespace run.
inline std::vector<std::string> split_fields(const std::string& line,
                                             std::size_t want) {
  std::vector<std::string> tab_fields;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t next = line.find('\t', pos);
    if (next == std::string::npos) next = line.size();
    std::string f = trim(std::string_view(line).substr(pos, next - pos));
    if (!f.empty()) tab_fields.push_back(std::move(f));
    pos = next + 1;
  }
  if (tab_fields.size() == want) return tab_fields;

  std::vector<std::string> ws_fields;
  std::istringstream iss(line);
  std::string tok;
  while (iss >> tok) ws_fields.push_back(tok);
  return ws_fields;
}

inline long parse_long(const std::string& s, std::size_t line_no,
                       const char* what) {
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ParseError("line " + std::to_string(line_no) + ": " + what +
                     " is not a whole number: '" + s + "'");
  return v;
}

inline double parse_real(const std::string& s, std::size_t line_no,
                         const char* what) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ParseError("line " + std::to_string(line_no) + ": " + what +
                     " is not a number: '" + s + "'");
  return v;
}

// Blank lines and '#' comments are skipped everywhere.
inline bool skippable(const std::string& line) {
  std::string t = trim(line);
  return t.empty() || t[0] == '#';
}

}  // namespace softsed::text

#endif  // SOFTSED_TEXTUTIL_HPP
