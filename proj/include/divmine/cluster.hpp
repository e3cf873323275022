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

#ifndef DIVMINE_CLUSTER_HPP
#define DIVMINE_CLUSTER_HPP

#include "divmine/dataio.hpp"
#include "divmine/metric.hpp"

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace divmine {

enum class Algorithm { kmedoids, clara, kmeans, bisecting, agglomerative };
enum class Init { faft, heuristic, kpp, random };
enum class Linkage { average, single, complete };

std::string_view algorithm_name(Algorithm a);
Algorithm parse_algorithm(std::string_view name);
std::string_view init_name(Init i);
Init parse_init(std::string_view name);
std::string_view linkage_name(Linkage l);
Linkage parse_linkage(std::string_view name);

struct ClusteringConfig {
    std::size_t k = 2;
    Metric metric = Metric::euclidean;
    Init init = Init::heuristic;
    std::size_t max_iter = 100;
    std::uint64_t seed = 0;

    std::size_t clara_subsamples = 5;
    /// 0 selects the classical 40 + 2k.
    std::size_t clara_subsample_size = 0;

    /// After the alternating phase, k-medoids runs PAM swap passes until no
    /// single medoid/non-medoid exchange lowers the cost, whenever n is at
    /// most this. 0 disables the swap phase.
    std::size_t swap_max_n = 200;

    std::size_t pairwise_cap = kDefaultPairwiseCap;
    Linkage linkage = Linkage::average;

    std::size_t effective_subsample_size() const { return clara_subsample_size ? clara_subsample_size : 40 + 2 * k; }

    /// Throws ConfigError when the configuration cannot run on n points.
    void validate(std::size_t n) const;
};

struct Merge {
    std::size_t a = 0; // surviving representative (lowest member index)
    std::size_t b = 0; // absorbed representative
    double height = 0.0;
    std::size_t size = 0;
};

struct ClusteringResult {
    std::size_t k = 0;
    /// Sample indices of the medoids. Empty for the k-means family.
    std::vector<std::size_t> medoids;
    /// k x D centroid matrix, k-means family only.
    std::vector<double> centroids;
    std::vector<std::size_t> assignment;
    /// Sum over samples of the distance to the assigned medoid; squared
    /// euclidean (inertia) for the k-means family.
    double cost = 0.0;
    std::vector<double> cost_trace;
    /// Sample indices that seeded the run.
    std::vector<std::size_t> initial;
    std::size_t iterations = 0;
    bool converged = false;
    /// CLARA: full-data cost of every round.
    std::vector<double> round_costs;
    /// Agglomerative: merge sequence.
    std::vector<Merge> merges;

};

/// Farthest-first traversal. The first index is drawn uniformly with `seed`;
/// each later index maximizes the minimum distance to those already chosen,
/// lowest index on ties.
std::vector<std::size_t> faft(const FeatureMatrix& data, std::size_t n_select, Metric m, std::uint64_t seed);
std::vector<std::size_t> faft_from(const FeatureMatrix& data, std::size_t n_select, Metric m, std::size_t first);

/// k distinct seed indices for the given init method.
std::vector<std::size_t> initial_medoids(const Distances& d, std::size_t k, Init init, std::uint64_t seed);

/// Alternating k-medoids: assign to nearest medoid, move each medoid to the
/// member with the smallest in-cluster distance sum, repeat until the medoids
/// stop moving or max_iter. An empty cluster is re-seeded with the point
/// farthest from its current medoid. Followed by PAM swap refinement for
/// n <= config.swap_max_n.
ClusteringResult kmedoids(const FeatureMatrix& data, const ClusteringConfig& config);
ClusteringResult kmedoids(const Distances& d, const ClusteringConfig& config);

/// CLARA: k-medoids on random subsamples; the medoid set with the lowest
/// full-data cost wins. Round 0 runs with config.seed so that a subsample
/// covering the data reproduces kmedoids() exactly. Never builds an n x n
/// table over the full data.
ClusteringResult clara(const FeatureMatrix& data, const ClusteringConfig& config);

/// Lloyd iterations on squared euclidean distance. Euclidean metric only.
ClusteringResult kmeans(const FeatureMatrix& data, const ClusteringConfig& config);

/// Repeatedly splits the cluster with the largest inertia by 2-means until
/// k clusters exist.
ClusteringResult bisecting_kmeans(const FeatureMatrix& data, const ClusteringConfig& config);

/// Bottom-up merging under `linkage` until k clusters remain. Merges the
/// closest pair, lowest (i, j) on ties; clusters are named by their lowest
/// member index and labelled in that order.
ClusteringResult agglomerative(const FeatureMatrix& data, std::size_t k, Metric m, Linkage linkage = Linkage::average,
                               std::size_t pairwise_cap = kDefaultPairwiseCap);

ClusteringResult run_clustering(Algorithm algo, const FeatureMatrix& data, const ClusteringConfig& config);

} // namespace divmine

#endif
