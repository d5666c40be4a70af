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

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace qfb::config {

using Json = nlohmann::json;

/// Reads a .toml or .json file into a JSON tree; throws ConfigError.
Json load_file(const std::filesystem::path& path);
Json parse_toml(std::string_view text, const std::string& source = "<string>");

/// Keys sorted, compact; stable under field reordering.
std::string canonical(const Json& j);
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);
std::string config_hash(const Json& j);

struct Range {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_open = false;

    static Range any() { return {}; }
    static Range positive() { return {0.0, std::numeric_limits<double>::infinity(), true}; }
    static Range non_negative() { return {0.0, std::numeric_limits<double>::infinity(), false}; }
    static Range closed(double a, double b) { return {a, b, false}; }
    static Range probability() { return closed(0.0, 1.0); }
    bool contains(double v) const;
    std::string describe() const;
};

/// Schema-checked view of one table; every accessor marks its key as known.
class Block {
  public:
    Block(const Json& j, std::string path);

    bool has(const std::string& key) const;

    double number(const std::string& key, Range r = {});
    double number_or(const std::string& key, double fallback, Range r = {});
    std::int64_t integer(const std::string& key, std::int64_t lo, std::int64_t hi);
    std::int64_t integer_or(const std::string& key, std::int64_t fallback, std::int64_t lo, std::int64_t hi);
    bool boolean_or(const std::string& key, bool fallback);
    std::string text(const std::string& key, const std::set<std::string>& allowed = {});
    std::string text_or(const std::string& key, const std::string& fallback, const std::set<std::string>& allowed = {});
    std::vector<double> numbers(const std::string& key, Range r = {}, std::size_t min_size = 1);
    std::vector<double> numbers_or(const std::string& key, const std::vector<double>& fallback, Range r = {},
                                   std::size_t min_size = 1);
    std::vector<std::string> texts(const std::string& key, std::size_t min_size = 1);
    std::vector<std::string> texts_or(const std::string& key, const std::vector<std::string>& fallback,
                                      std::size_t min_size = 1);

    Block block(const std::string& key);
    std::optional<Block> optional_block(const std::string& key);

    /// Throws ConfigError naming the first key that no accessor asked for.
    void finish() const;
    const std::string& path() const { return path_; }

  private:
    const Json& get(const std::string& key);
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;

    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace qfb::config
