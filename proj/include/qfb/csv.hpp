// Copyright 2026 The qfb Authors
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

#pragma once

#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace qfb::csv {

/// Locale-independent, round-trippable number formatting for artifacts.
inline std::string num(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

inline void row(std::ostream& os, std::initializer_list<std::string_view> cells) {
    bool first = true;
    for (auto cell : cells) {
        if (!first) {
            os << ',';
        }
        os << cell;
        first = false;
    }
    os << '\n';
}

}  // namespace qfb::csv
