// Copyright 2026 The h2r Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "h2r/text_io.h"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "h2r/errors.h"

namespace h2r {

std::string_view Trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> SplitFields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(Trim(line.substr(start)));
      break;
    }
    out.push_back(Trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

double ParseDouble(std::string_view token, std::string_view what) {
  token = Trim(token);
  double value = 0.0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || token.empty()) {
    throw ParseError(fmt::format("{}: expected a number, got '{}'", what, token));
  }
  return value;
}

long long ParseInt(std::string_view token, std::string_view what) {
  token = Trim(token);
  long long value = 0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || token.empty()) {
    throw ParseError(fmt::format("{}: expected an integer, got '{}'", what, token));
  }
  return value;
}

std::string FormatDouble(double value) {
  // -0 prints as "-0"; normalize so identical values give identical bytes.
  if (value == 0.0) value = 0.0;
  return fmt::format("{}", value);
}

}  // namespace h2r
