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

#ifndef DIVMINE_KERNELS_HPP
#define DIVMINE_KERNELS_HPP

// Data-parallel inner loops. Every kernel exists twice: the OpenMP version in
// `kernels::` and a plain loop in `kernels::serial::` kept as the reference
// for tests and benchmarks. Each output element is written by exactly one
// iteration and reductions are done afterwards in index order, so both
// versions produce bit-identical results at any thread count.

#include "divmine/dataio.hpp"
#include "divmine/metric.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace divmine::kernels {

void pairwise_fill(const FeatureMatrix& data, Metric m, DistanceTable& table);

/// Nearest medoid (row index into `data`) for every row; ties go to the
/// lowest medoid position.
void assign_to_medoids(const FeatureMatrix& data, std::span<const std::size_t> medoids, Metric m,
                       std::span<std::size_t> assign, std::span<double> dist);
void assign_to_medoids(const Distances& d, std::span<const std::size_t> medoids, std::span<std::size_t> assign,
                       std::span<double> dist);

/// Nearest centroid by squared euclidean distance; `centroids` is k x D row-major.
void assign_to_centroids(const FeatureMatrix& data, std::span<const double> centroids, std::span<std::size_t> assign,
                         std::span<double> sqdist);

/// min_dist[i] = min(min_dist[i], d(i, row)).
void relax_min_distance(const FeatureMatrix& data, std::size_t row, Metric m, std::span<double> min_dist);

/// For each cluster, the member with the smallest distance sum to the other
/// members. A current medoid that ties the best keeps its place; other ties
/// go to the lowest index.
void cluster_medoids(const Distances& d, const std::vector<std::vector<std::size_t>>& members,
                     std::span<const std::size_t> current, std::span<std::size_t> out);

/// sums[i] = sum_j d(i, j) over all points.
void distance_row_sums(const Distances& d, std::span<double> sums);

/// Left-to-right sum; the one reduction order used everywhere.
double ordered_sum(std::span<const double> v);

namespace serial {

void pairwise_fill(const FeatureMatrix& data, Metric m, DistanceTable& table);
void assign_to_medoids(const FeatureMatrix& data, std::span<const std::size_t> medoids, Metric m,
                       std::span<std::size_t> assign, std::span<double> dist);
void assign_to_medoids(const Distances& d, std::span<const std::size_t> medoids, std::span<std::size_t> assign,
                       std::span<double> dist);
void assign_to_centroids(const FeatureMatrix& data, std::span<const double> centroids, std::span<std::size_t> assign,
                         std::span<double> sqdist);
void relax_min_distance(const FeatureMatrix& data, std::size_t row, Metric m, std::span<double> min_dist);
void cluster_medoids(const Distances& d, const std::vector<std::vector<std::size_t>>& members,
                     std::span<const std::size_t> current, std::span<std::size_t> out);
void distance_row_sums(const Distances& d, std::span<double> sums);

} // namespace serial

namespace detail {

template <class Dist>
inline void nearest(Dist&& dist_to, std::size_t k, std::size_t& best, double& best_d)
{
    best = 0;
    best_d = dist_to(0);
    for (std::size_t c = 1; c < k; ++c) {
        const double v = dist_to(c);
        if (v < best_d) {
            best_d = v;
            best = c;
        }
    }
}

inline double squared_euclidean(std::span<const double> a, const double* b)
{
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double t = a[j] - b[j];
        s += t * t;
    }
    return s;
}

std::size_t medoid_of(const Distances& d, const std::vector<std::size_t>& members, std::size_t current);

} // namespace detail

} // namespace divmine::kernels

#endif
