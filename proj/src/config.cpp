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

#include "qfb/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "qfb/error.hpp"

namespace qfb::config {

namespace {

Json to_json(const toml::node& node);

Json table_to_json(const toml::table& t) {
    Json out = Json::object();
    for (const auto& [key, value] : t) {
        out[std::string(key.str())] = to_json(value);
    }
    return out;
}

Json to_json(const toml::node& node) {
    if (const auto* t = node.as_table()) {
        return table_to_json(*t);
    }
    if (const auto* a = node.as_array()) {
        Json out = Json::array();
        for (const auto& item : *a) {
            out.push_back(to_json(item));
        }
        return out;
    }
    if (const auto* v = node.as_integer()) {
        return v->get();
    }
    if (const auto* v = node.as_floating_point()) {
        return v->get();
    }
    if (const auto* v = node.as_boolean()) {
        return v->get();
    }
    if (const auto* v = node.as_string()) {
        return v->get();
    }
    const auto& src = node.source();
    throw ConfigError("config: " + (src.path ? *src.path : std::string("<string>")) + ":" +
                      std::to_string(src.begin.line) + ": date and time values are not supported");
}

std::string type_name(const Json& j) { return j.type_name(); }

}  // namespace

Json parse_toml(std::string_view text, const std::string& source) {
    try {
        return table_to_json(toml::parse(text, source));
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "config: " << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
           << e.description();
        throw ConfigError(os.str());
    }
}

Json load_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("config: cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (path.extension() == ".json") {
        try {
            return Json::parse(text);
        } catch (const Json::parse_error& e) {
            throw ConfigError("config: " + path.string() + ": " + e.what());
        }
    }
    if (path.extension() != ".toml") {
        throw ConfigError("config: " + path.string() + ": expected a .toml or .json file");
    }
    return parse_toml(text, path.string());
}

std::string canonical(const Json& j) { return j.dump(); }

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string config_hash(const Json& j) { return "fnv1a64:" + hex64(fnv1a64(canonical(j))); }

bool Range::contains(double v) const {
    if (std::isnan(v)) {
        return false;
    }
    const bool above = lo_open ? v > lo : v >= lo;
    return above && v <= hi;
}

std::string Range::describe() const {
    std::ostringstream os;
    os << (lo_open ? "(" : "[") << lo << ", " << hi << "]";
    return os.str();
}

Block::Block(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
        throw ConfigError("config: " + (path_.empty() ? std::string("<root>") : path_) + ": expected a table");
    }
}

bool Block::has(const std::string& key) const { return j_.contains(key); }

void Block::fail(const std::string& key, const std::string& what) const {
    throw ConfigError("config: " + (path_.empty() ? key : path_ + "." + key) + ": " + what);
}

const Json& Block::get(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) {
        fail(key, "missing required field");
    }
    return j_.at(key);
}

double Block::number(const std::string& key, Range r) {
    const Json& v = get(key);
    if (!v.is_number()) {
        fail(key, "expected a number, got " + type_name(v));
    }
    const double x = v.get<double>();
    if (!r.contains(x)) {
        fail(key, "value out of range " + r.describe());
    }
    return x;
}

double Block::number_or(const std::string& key, double fallback, Range r) {
    seen_.insert(key);
    return has(key) ? number(key, r) : fallback;
}

std::int64_t Block::integer(const std::string& key, std::int64_t lo, std::int64_t hi) {
    const Json& v = get(key);
    if (!v.is_number_integer()) {
        fail(key, "expected an integer, got " + type_name(v));
    }
    const auto x = v.get<std::int64_t>();
    if (x < lo || x > hi) {
        fail(key, "value out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return x;
}

std::int64_t Block::integer_or(const std::string& key, std::int64_t fallback, std::int64_t lo, std::int64_t hi) {
    seen_.insert(key);
    return has(key) ? integer(key, lo, hi) : fallback;
}

bool Block::boolean_or(const std::string& key, bool fallback) {
    seen_.insert(key);
    if (!has(key)) {
        return fallback;
    }
    const Json& v = get(key);
    if (!v.is_boolean()) {
        fail(key, "expected a boolean, got " + type_name(v));
    }
    return v.get<bool>();
}

std::string Block::text(const std::string& key, const std::set<std::string>& allowed) {
    const Json& v = get(key);
    if (!v.is_string()) {
        fail(key, "expected a string, got " + type_name(v));
    }
    auto s = v.get<std::string>();
    if (!allowed.empty() && allowed.count(s) == 0) {
        std::string list;
        for (const auto& a : allowed) {
            list += (list.empty() ? "" : ", ") + a;
        }
        fail(key, "unknown value '" + s + "' (expected one of: " + list + ")");
    }
    return s;
}

std::string Block::text_or(const std::string& key, const std::string& fallback, const std::set<std::string>& allowed) {
    seen_.insert(key);
    return has(key) ? text(key, allowed) : fallback;
}

std::vector<double> Block::numbers(const std::string& key, Range r, std::size_t min_size) {
    const Json& v = get(key);
    if (!v.is_array()) {
        fail(key, "expected an array of numbers, got " + type_name(v));
    }
    if (v.size() < min_size) {
        fail(key, "expected at least " + std::to_string(min_size) + " entries");
    }
    std::vector<double> out;
    for (const auto& item : v) {
        if (!item.is_number()) {
            fail(key, "expected an array of numbers");
        }
        const double x = item.get<double>();
        if (!r.contains(x)) {
            fail(key, "entry out of range " + r.describe());
        }
        out.push_back(x);
    }
    return out;
}

std::vector<double> Block::numbers_or(const std::string& key, const std::vector<double>& fallback, Range r,
                                      std::size_t min_size) {
    seen_.insert(key);
    return has(key) ? numbers(key, r, min_size) : fallback;
}

std::vector<std::string> Block::texts(const std::string& key, std::size_t min_size) {
    const Json& v = get(key);
    if (!v.is_array() || v.size() < min_size) {
        fail(key, "expected an array of at least " + std::to_string(min_size) + " strings");
    }
    std::vector<std::string> out;
    for (const auto& item : v) {
        if (!item.is_string()) {
            fail(key, "expected an array of strings");
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

std::vector<std::string> Block::texts_or(const std::string& key, const std::vector<std::string>& fallback,
                                         std::size_t min_size) {
    seen_.insert(key);
    return has(key) ? texts(key, min_size) : fallback;
}

Block Block::block(const std::string& key) {
    const Json& v = get(key);
    return Block(v, path_.empty() ? key : path_ + "." + key);
}

std::optional<Block> Block::optional_block(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) {
        return std::nullopt;
    }
    return block(key);
}

void Block::finish() const {
    for (const auto& item : j_.items()) {
        if (seen_.count(item.key()) == 0) {
            throw ConfigError("config: " + (path_.empty() ? item.key() : path_ + "." + item.key()) +
                              ": unknown field");
        }
    }
}

}  // namespace qfb::config
