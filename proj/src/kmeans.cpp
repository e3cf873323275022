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

#include "divmine/cluster.hpp"

#include "divmine/error.hpp"
#include "divmine/kernels.hpp"
#include "divmine/rng.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace divmine {

namespace {

void require_euclidean(const ClusteringConfig& config)
{
    if (config.metric != Metric::euclidean)
        throw ConfigError("k-means family requires the euclidean metric, got " + std::string(metric_name(config.metric)));
}

std::vector<std::size_t> kmeans_seeds(const FeatureMatrix& data, const ClusteringConfig& config)
{
    const std::size_t n = data.rows();
    if (config.init == Init::faft)
        return faft(data, config.k, Metric::euclidean, config.seed);
    if (config.init == Init::random) {
        Rng rng(config.seed);
        return rng.sample_without_replacement(n, config.k);
    }
    // kpp and heuristic go through the medoid seeding code with on-demand
    // distances; neither needs a table.
    const Distances d(data, Metric::euclidean, 0);
    return initial_medoids(d, config.k, config.init, config.seed);
}

// Means of each cluster, summed in index order. Clusters without members
// keep their previous centroid.
void update_centroids(const FeatureMatrix& data, std::span<const std::size_t> assignment, std::size_t k,
                      std::vector<double>& centroids)
{
    const std::size_t dim = data.cols();
    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const auto x = data.row(i);
        double* s = sums.data() + assignment[i] * dim;
        for (std::size_t j = 0; j < dim; ++j)
            s[j] += x[j];
        ++counts[assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0)
            continue;
        for (std::size_t j = 0; j < dim; ++j)
            centroids[c * dim + j] = sums[c * dim + j] / static_cast<double>(counts[c]);
    }
}

// Assignment step with empty-cluster repair: an empty cluster's centroid
// jumps to the point currently farthest from its own centroid.
void assign_centroids_with_repair(const FeatureMatrix& data, std::vector<double>& centroids, std::size_t k,
                                  std::vector<std::size_t>& assignment, std::vector<double>& sqdist)
{
    const std::size_t dim = data.cols();
    for (std::size_t attempt = 0; attempt <= k; ++attempt) {
        kernels::assign_to_centroids(data, centroids, assignment, sqdist);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t c : assignment)
            ++counts[c];
        const auto empty = std::find(counts.begin(), counts.end(), std::size_t{0});
        if (empty == counts.end())
            return;
        const std::size_t c = static_cast<std::size_t>(empty - counts.begin());
        const std::size_t far = static_cast<std::size_t>(std::max_element(sqdist.begin(), sqdist.end()) - sqdist.begin());
        if (sqdist[far] == 0.0)
            return;
        const auto x = data.row(far);
        std::copy(x.begin(), x.end(), centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
    }
}

ClusteringResult lloyd(const FeatureMatrix& data, std::vector<std::size_t> seeds, std::size_t max_iter)
{
    const std::size_t n = data.rows();
    const std::size_t dim = data.cols();
    const std::size_t k = seeds.size();

    ClusteringResult r;
    r.k = k;
    r.centroids.resize(k * dim);
    for (std::size_t c = 0; c < k; ++c) {
        const auto x = data.row(seeds[c]);
        std::copy(x.begin(), x.end(), r.centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
    }
    r.initial = std::move(seeds);

    // Each trace entry is the inertia after the update step, so a pass that
    // leaves the assignment unchanged reproduces the previous entry exactly.
    std::vector<std::size_t> assignment(n), previous;
    std::vector<double> sqdist(n);
    for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
        assign_centroids_with_repair(data, r.centroids, k, assignment, sqdist);
        if (assignment == previous) {
            r.cost_trace.push_back(kernels::ordered_sum(sqdist));
            r.converged = true;
            break;
        }
        update_centroids(data, assignment, k, r.centroids);
        for (std::size_t i = 0; i < n; ++i)
            sqdist[i] = kernels::detail::squared_euclidean(data.row(i), r.centroids.data() + assignment[i] * dim);
        r.cost_trace.push_back(kernels::ordered_sum(sqdist));
        previous = assignment;
    }
    if (!r.converged) {
        assign_centroids_with_repair(data, r.centroids, k, assignment, sqdist);
        r.cost_trace.push_back(kernels::ordered_sum(sqdist));
    }
    r.assignment = std::move(assignment);
    r.cost = kernels::ordered_sum(sqdist);
    return r;
}

double inertia(const FeatureMatrix& data, std::span<const std::size_t> rows, std::vector<double>& mean)
{
    const std::size_t dim = data.cols();
    mean.assign(dim, 0.0);
    for (std::size_t i : rows) {
        const auto x = data.row(i);
        for (std::size_t j = 0; j < dim; ++j)
            mean[j] += x[j];
    }
    for (double& m : mean)
        m /= static_cast<double>(rows.size());
    double s = 0.0;
    for (std::size_t i : rows)
        s += kernels::detail::squared_euclidean(data.row(i), mean.data());
    return s;
}

} // namespace

ClusteringResult kmeans(const FeatureMatrix& data, const ClusteringConfig& config)
{
    require_euclidean(config);
    config.validate(data.rows());
    return lloyd(data, kmeans_seeds(data, config), config.max_iter);
}

ClusteringResult bisecting_kmeans(const FeatureMatrix& data, const ClusteringConfig& config)
{
    require_euclidean(config);
    const std::size_t n = data.rows();
    config.validate(n);
    const std::size_t dim = data.cols();

    std::vector<std::vector<std::size_t>> clusters(1);
    clusters[0].resize(n);
    std::iota(clusters[0].begin(), clusters[0].end(), std::size_t{0});
    std::vector<double> sse(1);
    std::vector<double> mean;
    sse[0] = inertia(data, clusters[0], mean);

    ClusteringResult r;
    r.cost_trace.push_back(sse[0]);
    std::size_t split = 0;
    while (clusters.size() < config.k) {
        std::size_t target = clusters.size();
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            if (clusters[c].size() < 2)
                continue;
            if (target == clusters.size() || sse[c] > sse[target])
                target = c;
        }
        // k <= n guarantees some cluster still has two members.
        const std::vector<std::size_t> rows = clusters[target];
        const FeatureMatrix sub = data.select_rows(rows);
        ClusteringConfig two = config;
        two.k = 2;
        two.init = Init::kpp;
        two.seed = derive_seed(config.seed, "bisect", std::to_string(split++));
        const ClusteringResult halves = kmeans(sub, two);

        std::vector<std::size_t> left, right;
        for (std::size_t i = 0; i < rows.size(); ++i)
            (halves.assignment[i] == 0 ? left : right).push_back(rows[i]);
        if (left.empty() || right.empty()) {
            // All members coincide; peel off the highest index.
            left = rows;
            right = {left.back()};
            left.pop_back();
        }
        clusters[target] = std::move(left);
        clusters.push_back(std::move(right));
        sse[target] = inertia(data, clusters[target], mean);
        sse.push_back(inertia(data, clusters.back(), mean));
        r.cost_trace.push_back(kernels::ordered_sum(sse));
    }

    r.k = config.k;
    r.assignment.assign(n, 0);
    r.centroids.assign(config.k * dim, 0.0);
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        inertia(data, clusters[c], mean);
        std::copy(mean.begin(), mean.end(), r.centroids.begin() + static_cast<std::ptrdiff_t>(c * dim));
        for (std::size_t i : clusters[c])
            r.assignment[i] = c;
    }
    r.cost = r.cost_trace.back();
    r.iterations = split;
    r.converged = true;
    return r;
}

} // namespace divmine
