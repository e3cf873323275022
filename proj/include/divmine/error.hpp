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

#ifndef DIVMINE_ERROR_HPP
#define DIVMINE_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace divmine {

// Base for everything the toolkit throws on bad input or bad configuration.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters (k > n, inverted bounds, unknown enum names...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Well-formed input whose values break a contract (ratings out of range,
// duplicate ids, zero-variance blocks).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Malformed file content. Carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Requested work would exceed a configured memory budget.
class CapacityError : public Error {
public:
    using Error::Error;
};

} // namespace divmine

#endif
