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

#ifndef H2R_TEXT_IO_H_
#define H2R_TEXT_IO_H_

#include <string>
#include <string_view>
#include <vector>

namespace h2r {

/// Splits on `delim`, trimming ASCII whitespace around each field.
std::vector<std::string_view> SplitFields(std::string_view line, char delim = ',');

std::string_view Trim(std::string_view s);

/// Full-token parses; throw ParseError mentioning `what`.
double ParseDouble(std::string_view token, std::string_view what);
long long ParseInt(std::string_view token, std::string_view what);

/// Shortest decimal text that reads back to the identical double.
std::string FormatDouble(double value);

}  // namespace h2r

#endif  // H2R_TEXT_IO_H_
