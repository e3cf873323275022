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

#include "divmine/config.hpp"

#include "divmine/error.hpp"
#include "divmine/rng.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace divmine {

namespace {

std::string field(const std::string& section, const std::string& key)
{
    return "[" + section + "] " + key;
}

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_integer(const std::string& text, const std::string& where)
{
    T v{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError(where + ": expected a non-negative integer, got '" + text + "'");
    return v;
}

double parse_real(const std::string& text, const std::string& where)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size())
            throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where + ": expected a number, got '" + text + "'");
    }
}

} // namespace

Config Config::parse(std::istream& in, const std::string& origin, std::filesystem::path base_dir)
{
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ParseError(origin, e.line(), e.message());
    }
    Config c;
    c.base_dir_ = std::move(base_dir);
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            c.set("run", name, node.data());
            continue;
        }
        for (const auto& [key, leaf] : node) {
            if (!leaf.empty())
                throw ParseError(origin, 0, "nested key '" + key + "' in [" + name + "]");
            c.set(name, key, leaf.data());
        }
    }
    return c;
}

Config Config::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path.string() + "'");
    return parse(in, path.string(), path.parent_path());
}

void Config::set(const std::string& section, const std::string& key, const std::string& value)
{
    if (section.empty() || key.empty())
        throw ConfigError("empty section or key name");
    values_[section][key] = value;
}

void Config::apply_override(std::string_view assignment)
{
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq)
        throw ConfigError("override '" + std::string(assignment) + "' is not of the form section.key=value");
    set(trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
        trim(assignment.substr(eq + 1)));
}

bool Config::has(const std::string& section, const std::string& key) const
{
    return get(section, key).has_value();
}

std::optional<std::string> Config::get(const std::string& section, const std::string& key) const
{
    const auto s = values_.find(section);
    if (s == values_.end())
        return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.end())
        return std::nullopt;
    return k->second;
}

std::string Config::require(const std::string& section, const std::string& key) const
{
    auto v = get(section, key);
    if (!v || v->empty())
        throw ConfigError(field(section, key) + ": required but not set");
    return *v;
}

std::string Config::get_string(const std::string& section, const std::string& key, const std::string& fallback) const
{
    return get(section, key).value_or(fallback);
}

std::size_t Config::get_size(const std::string& section, const std::string& key, std::size_t fallback) const
{
    const auto v = get(section, key);
    return v ? parse_integer<std::size_t>(*v, field(section, key)) : fallback;
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const
{
    const auto v = get(section, key);
    return v ? parse_integer<std::uint64_t>(*v, field(section, key)) : fallback;
}

double Config::get_real(const std::string& section, const std::string& key, double fallback) const
{
    const auto v = get(section, key);
    return v ? parse_real(*v, field(section, key)) : fallback;
}

std::optional<double> Config::get_optional_real(const std::string& section, const std::string& key) const
{
    const auto v = get(section, key);
    if (!v || v->empty())
        return std::nullopt;
    return parse_real(*v, field(section, key));
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const
{
    const auto v = get(section, key);
    if (!v)
        return fallback;
    if (*v == "true" || *v == "yes" || *v == "1" || *v == "on")
        return true;
    if (*v == "false" || *v == "no" || *v == "0" || *v == "off")
        return false;
    throw ConfigError(field(section, key) + ": expected true or false, got '" + *v + "'");
}

std::vector<std::string> Config::get_list(const std::string& section, const std::string& key) const
{
    std::vector<std::string> out;
    const auto v = get(section, key);
    if (!v)
        return out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty())
            out.push_back(std::move(t));
    return out;
}

std::vector<std::size_t> Config::get_size_list(const std::string& section, const std::string& key) const
{
    std::vector<std::size_t> out;
    for (const auto& item : get_list(section, key))
        out.push_back(parse_integer<std::size_t>(item, field(section, key)));
    return out;
}

std::filesystem::path Config::resolve(const std::string& value) const
{
    std::filesystem::path p(value);
    if (p.is_absolute() || base_dir_.empty())
        return p;
    return base_dir_ / p;
}

std::optional<std::filesystem::path> Config::get_path(const std::string& section, const std::string& key) const
{
    const auto v = get(section, key);
    if (!v || v->empty())
        return std::nullopt;
    return resolve(*v);
}

void Config::check_keys(const std::string& section, std::initializer_list<std::string_view> allowed) const
{
    const auto s = values_.find(section);
    if (s == values_.end())
        return;
    for (const auto& [key, value] : s->second)
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(field(section, key) + ": unknown key");
}

void Config::check_sections(std::initializer_list<std::string_view> allowed) const
{
    for (const auto& [section, keys] : values_)
        if (std::find(allowed.begin(), allowed.end(), section) == allowed.end())
            throw ConfigError("[" + section + "]: unknown section");
}

std::string Config::canonical() const
{
    std::string out;
    for (const auto& [section, keys] : values_) {
        out += "[" + section + "]\n";
        for (const auto& [key, value] : keys) {
            // Where results land does not change them.
            if (section == "run" && key == "out_dir")
                continue;
            out += key + " = " + value + "\n";
        }
    }
    return out;
}

std::uint64_t Config::hash() const
{
    return fnv1a(canonical());
}

std::string Config::hash_hex() const
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
}

} // namespace divmine
