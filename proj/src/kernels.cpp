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

#include "divmine/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdint>
#include <limits>

namespace divmine::kernels {

namespace detail {

std::size_t medoid_of(const Distances& d, const std::vector<std::size_t>& members, std::size_t current)
{
    std::size_t best = current;
    double best_sum = std::numeric_limits<double>::infinity();
    if (std::find(members.begin(), members.end(), current) != members.end()) {
        best_sum = 0.0;
        for (std::size_t j : members)
            best_sum += d(current, j);
    }
    for (std::size_t i : members) {
        if (i == current)
            continue;
        double s = 0.0;
        for (std::size_t j : members) {
            s += d(i, j);
            if (s > best_sum)
                break;
        }
        if (s < best_sum || (s == best_sum && best != current && i < best)) {
            best_sum = s;
            best = i;
        }
    }
    return best;
}

} // namespace detail

void pairwise_fill(const FeatureMatrix& data, Metric m, DistanceTable& table)
{
    require_metric_fits(m, data.cols());
    const auto n = static_cast<std::int64_t>(data.rows());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto a = data.row(static_cast<std::size_t>(i));
        for (std::int64_t j = i + 1; j < n; ++j)
            table.upper(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                distance(a, data.row(static_cast<std::size_t>(j)), m);
    }
}

void assign_to_medoids(const FeatureMatrix& data, std::span<const std::size_t> medoids, Metric m,
                       std::span<std::size_t> assign, std::span<double> dist)
{
    require_metric_fits(m, data.cols());
    const auto n = static_cast<std::int64_t>(data.rows());
    const std::size_t k = medoids.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto x = data.row(static_cast<std::size_t>(i));
        detail::nearest([&](std::size_t c) { return distance(x, data.row(medoids[c]), m); }, k,
                        assign[static_cast<std::size_t>(i)], dist[static_cast<std::size_t>(i)]);
    }
}

void assign_to_medoids(const Distances& d, std::span<const std::size_t> medoids, std::span<std::size_t> assign,
                       std::span<double> dist)
{
    const auto n = static_cast<std::int64_t>(d.size());
    const std::size_t k = medoids.size();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        detail::nearest([&](std::size_t c) { return d(row, medoids[c]); }, k, assign[row], dist[row]);
    }
}

void assign_to_centroids(const FeatureMatrix& data, std::span<const double> centroids, std::span<std::size_t> assign,
                         std::span<double> sqdist)
{
    const auto n = static_cast<std::int64_t>(data.rows());
    const std::size_t dim = data.cols();
    const std::size_t k = centroids.size() / dim;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        const auto x = data.row(row);
        detail::nearest([&](std::size_t c) { return detail::squared_euclidean(x, centroids.data() + c * dim); }, k,
                        assign[row], sqdist[row]);
    }
}

void relax_min_distance(const FeatureMatrix& data, std::size_t row, Metric m, std::span<double> min_dist)
{
    require_metric_fits(m, data.cols());
    const auto n = static_cast<std::int64_t>(data.rows());
    const auto p = data.row(row);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>(i);
        min_dist[r] = std::min(min_dist[r], distance(data.row(r), p, m));
    }
}

void cluster_medoids(const Distances& d, const std::vector<std::vector<std::size_t>>& members,
                     std::span<const std::size_t> current, std::span<std::size_t> out)
{
    const auto k = static_cast<std::int64_t>(members.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t c = 0; c < k; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        out[cc] = members[cc].empty() ? current[cc] : detail::medoid_of(d, members[cc], current[cc]);
    }
}

void distance_row_sums(const Distances& d, std::span<double> sums)
{
    const auto n = static_cast<std::int64_t>(d.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>(i);
        double s = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j)
            s += d(r, j);
        sums[r] = s;
    }
}

double ordered_sum(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return s;
}

} // namespace divmine::kernels
