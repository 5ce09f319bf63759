// Copyright 2026 The memelens Authors.
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

#ifndef MEMELENS_NUMERIC_IO_H_
#define MEMELENS_NUMERIC_IO_H_

#include <optional>
#include <string>
#include <string_view>

namespace memelens {

// Shortest decimal text that parses back to the identical double.
std::string FormatDouble(double value);

// Strict parse of the whole string; nullopt on any trailing garbage.
std::optional<double> ParseDouble(std::string_view text);
std::optional<long long> ParseInt(std::string_view text);

}  // namespace memelens

#endif  // MEMELENS_NUMERIC_IO_H_
