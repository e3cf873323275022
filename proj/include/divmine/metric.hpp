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

#ifndef DIVMINE_METRIC_HPP
#define DIVMINE_METRIC_HPP

#include "divmine/dataio.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace divmine {

enum class Metric { euclidean, manhattan, chebyshev, cosine, pearson };

inline constexpr Metric kAllMetrics[] = {Metric::euclidean, Metric::manhattan, Metric::chebyshev, Metric::cosine,
                                         Metric::pearson};

std::string_view metric_name(Metric m);
Metric parse_metric(std::string_view name);

/// Distance between two equal-length vectors.
///
/// cosine = 1 - a.b / (|a||b|), pearson = 1 - r(a, b); both are clamped to
/// [0, 2]. Degenerate inputs are total: a zero vector is at cosine distance 1
/// from any nonzero vector and 0 from another zero vector; a constant vector
/// has r = 0, i.e. pearson distance 1. Each such evaluation bumps the
/// counters returned by degenerate_counts().
double distance(std::span<const double> a, std::span<const double> b, Metric m);

/// Throws ConfigError when `m` is undefined for vectors of length `dim`.
/// Parallel kernels call this first: nothing may throw inside their loops.
void require_metric_fits(Metric m, std::size_t dim);

struct DegenerateCounts {
    std::uint64_t zero_vector_cosine = 0;
    std::uint64_t constant_vector_pearson = 0;
};
DegenerateCounts degenerate_counts();
void reset_degenerate_counts();

inline constexpr std::size_t kDefaultPairwiseCap = 20000;

/// Symmetric n x n distance table with zero diagonal, stored as the strict
/// upper triangle.
class DistanceTable {
public:
    DistanceTable() = default;
    explicit DistanceTable(std::size_t n) : n_(n), upper_(n * (n - (n > 0 ? 1 : 0)) / 2, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const
    {
        if (i == j)
            return 0.0;
        if (i > j)
            std::swap(i, j);
        return upper_[offset(i, j)];
    }
    double& upper(std::size_t i, std::size_t j) { return upper_[offset(i, j)]; }

    /// Bytes needed for an n-point table.
    static std::size_t bytes_for(std::size_t n) { return n * (n > 0 ? n - 1 : 0) / 2 * sizeof(double); }

private:
    std::size_t offset(std::size_t i, std::size_t j) const { return i * (2 * n_ - i - 1) / 2 + (j - i - 1); }

    std::size_t n_ = 0;
    std::vector<double> upper_;
};

/// Full table over the rows of `data`. Throws CapacityError when
/// rows > cap: beyond that, callers must use on-demand distances.
DistanceTable pairwise(const FeatureMatrix& data, Metric m, std::size_t cap = kDefaultPairwiseCap);

/// Distance lookup that tabulates when n <= cap and computes on demand
/// otherwise. Cheap to pass by reference into kernels.
class Distances {
public:
    Distances(const FeatureMatrix& data, Metric m, std::size_t cap = kDefaultPairwiseCap);

    std::size_t size() const noexcept { return data_->rows(); }
    Metric metric() const noexcept { return metric_; }
    bool tabulated() const noexcept { return tabulated_; }
    const FeatureMatrix& data() const noexcept { return *data_; }

    double operator()(std::size_t i, std::size_t j) const
    {
        return tabulated_ ? table_(i, j) : distance(data_->row(i), data_->row(j), metric_);
    }

private:
    const FeatureMatrix* data_;
    Metric metric_;
    bool tabulated_ = false;
    DistanceTable table_;
};

} // namespace divmine

#endif
