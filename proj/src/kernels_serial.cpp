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

#include <algorithm>

namespace divmine::kernels::serial {

void pairwise_fill(const FeatureMatrix& data, Metric m, DistanceTable& table)
{
    require_metric_fits(m, data.cols());
    const std::size_t n = data.rows();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            table.upper(i, j) = distance(data.row(i), data.row(j), m);
}

void assign_to_medoids(const FeatureMatrix& data, std::span<const std::size_t> medoids, Metric m,
                       std::span<std::size_t> assign, std::span<double> dist)
{
    require_metric_fits(m, data.cols());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const auto x = data.row(i);
        detail::nearest([&](std::size_t c) { return distance(x, data.row(medoids[c]), m); }, medoids.size(),
                        assign[i], dist[i]);
    }
}

void assign_to_medoids(const Distances& d, std::span<const std::size_t> medoids, std::span<std::size_t> assign,
                       std::span<double> dist)
{
    for (std::size_t i = 0; i < d.size(); ++i)
        detail::nearest([&](std::size_t c) { return d(i, medoids[c]); }, medoids.size(), assign[i], dist[i]);
}

void assign_to_centroids(const FeatureMatrix& data, std::span<const double> centroids, std::span<std::size_t> assign,
                         std::span<double> sqdist)
{
    const std::size_t dim = data.cols();
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const auto x = data.row(i);
        detail::nearest([&](std::size_t c) { return detail::squared_euclidean(x, centroids.data() + c * dim); },
                        centroids.size() / dim, assign[i], sqdist[i]);
    }
}

void relax_min_distance(const FeatureMatrix& data, std::size_t row, Metric m, std::span<double> min_dist)
{
    require_metric_fits(m, data.cols());
    const auto p = data.row(row);
    for (std::size_t i = 0; i < data.rows(); ++i)
        min_dist[i] = std::min(min_dist[i], distance(data.row(i), p, m));
}

void cluster_medoids(const Distances& d, const std::vector<std::vector<std::size_t>>& members,
                     std::span<const std::size_t> current, std::span<std::size_t> out)
{
    for (std::size_t c = 0; c < members.size(); ++c)
        out[c] = members[c].empty() ? current[c] : detail::medoid_of(d, members[c], current[c]);
}

void distance_row_sums(const Distances& d, std::span<double> sums)
{
    for (std::size_t i = 0; i < d.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j)
            s += d(i, j);
        sums[i] = s;
    }
}

} // namespace divmine::kernels::serial
