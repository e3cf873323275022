/*
 * Copyright 2026 The divmine Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DIVMINE_CONFIG_HPP
#define DIVMINE_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace divmine {

/// Run configuration: `[section]` headers followed by `key = value` lines.
/// Lines starting with '#' or ';' are comments. Keys before the first
/// section belong to `[run]`.
class Config {
public:
    static Config parse(std::istream& in, const std::string& origin = "<config>",
                        std::filesystem::path base_dir = {});
    static Config load(const std::filesystem::path& path);

    void set(const std::string& section, const std::string& key, const std::string& value);
    /// `section.key=value`.
    void apply_override(std::string_view assignment);

    bool has(const std::string& section, const std::string& key) const;
    std::optional<std::string> get(const std::string& section, const std::string& key) const;
    std::string require(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
    std::size_t get_size(const std::string& section, const std::string& key, std::size_t fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const;
    double get_real(const std::string& section, const std::string& key, double fallback) const;
    std::optional<double> get_optional_real(const std::string& section, const std::string& key) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    /// Comma-separated; empty items dropped.
    std::vector<std::string> get_list(const std::string& section, const std::string& key) const;
    std::vector<std::size_t> get_size_list(const std::string& section, const std::string& key) const;

    /// Relative paths resolve against the config file's directory.
    std::filesystem::path resolve(const std::string& value) const;
    std::optional<std::filesystem::path> get_path(const std::string& section, const std::string& key) const;

    /// Throws ConfigError naming the first key in `section` not listed.
    void check_keys(const std::string& section, std::initializer_list<std::string_view> allowed) const;
    /// Throws ConfigError naming the first section not listed.
    void check_sections(std::initializer_list<std::string_view> allowed) const;

    std::uint64_t seed() const { return get_u64("run", "seed", 0); }

    /// Sorted `[section]` / `key = value` text without `[run] out_dir`; the
    /// hash is taken over it.
    std::string canonical() const;
    std::uint64_t hash() const;
    std::string hash_hex() const;

    const std::filesystem::path& base_dir() const noexcept { return base_dir_; }
    const std::map<std::string, std::map<std::string, std::string>>& entries() const noexcept { return values_; }

private:
    std::map<std::string, std::map<std::string, std::string>> values_;
    std::filesystem::path base_dir_;
};

} // namespace divmine

#endif
