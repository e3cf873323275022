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

#ifndef DIVMINE_RNG_HPP
#define DIVMINE_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace divmine {

/// Seeded generator with distribution code that is fully specified here, so
/// identical seeds give identical streams on every standard library.
/// (std::uniform_int_distribution and friends are implementation-defined.)
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform integer in [0, bound). bound must be > 0.
    std::size_t index(std::size_t bound);

    /// Standard normal via Box-Muller (both halves of the pair are used).
    double normal();

    /// m distinct indices drawn uniformly from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// Stable child seed: hash(master, stage, cell key). Used for every stage and
/// grid cell so parallel work never shares an RNG stream.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage, std::string_view cell = {});
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

} // namespace divmine

#endif
