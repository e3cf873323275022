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
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace divmine {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::vector<std::size_t>> members_of(std::span<const std::size_t> assignment, std::size_t k)
{
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < assignment.size(); ++i)
        members[assignment[i]].push_back(i);
    return members;
}

// Assigns every point, then re-seeds empty clusters with the farthest
// non-medoid point until none is empty.
void assign_with_repair(const Distances& d, std::vector<std::size_t>& medoids, std::vector<std::size_t>& assignment,
                        std::vector<double>& dist)
{
    const std::size_t k = medoids.size();
    for (std::size_t attempt = 0; attempt <= k; ++attempt) {
        kernels::assign_to_medoids(d, medoids, assignment, dist);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t c : assignment)
            ++counts[c];
        const auto empty = std::find(counts.begin(), counts.end(), std::size_t{0});
        if (empty == counts.end())
            return;
        const std::size_t c = static_cast<std::size_t>(empty - counts.begin());
        std::size_t far = d.size();
        double far_d = -1.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (dist[i] > far_d && std::find(medoids.begin(), medoids.end(), i) == medoids.end()) {
                far_d = dist[i];
                far = i;
            }
        }
        if (far == d.size())
            return;
        medoids[c] = far;
    }
}

// PAM swap phase. Tracks nearest and second-nearest medoid distances so a
// candidate exchange is priced in O(n).
bool swap_refine(const Distances& d, std::vector<std::size_t>& medoids, std::vector<std::size_t>& assignment,
                 std::vector<double>& dist, std::vector<double>& trace, std::size_t max_passes)
{
    const std::size_t n = d.size();
    const std::size_t k = medoids.size();
    std::vector<char> is_medoid(n, 0);
    for (std::size_t m : medoids)
        is_medoid[m] = 1;
    std::vector<double> second(n);
    for (std::size_t pass = 0; pass < max_passes; ++pass) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = kInf;
            for (std::size_t c = 0; c < k; ++c)
                if (c != assignment[i])
                    s = std::min(s, d(i, medoids[c]));
            second[i] = s;
        }
        const double cost = kernels::ordered_sum(dist);
        const double tol = 1e-12 * std::max(1.0, cost);
        double best_delta = 0.0;
        std::size_t best_c = k, best_o = n;
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t o = 0; o < n; ++o) {
                if (is_medoid[o])
                    continue;
                double delta = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double djo = d(j, o);
                    const double now = dist[j];
                    const double after = assignment[j] == c ? std::min(second[j], djo) : std::min(now, djo);
                    delta += after - now;
                }
                if (delta < best_delta - tol) {
                    best_delta = delta;
                    best_c = c;
                    best_o = o;
                }
            }
        }
        if (best_c == k) {
            trace.push_back(cost);
            return true;
        }
        is_medoid[medoids[best_c]] = 0;
        is_medoid[best_o] = 1;
        medoids[best_c] = best_o;
        kernels::assign_to_medoids(d, medoids, assignment, dist);
        trace.push_back(kernels::ordered_sum(dist));
    }
    return false;
}

} // namespace

std::string_view algorithm_name(Algorithm a)
{
    switch (a) {
    case Algorithm::kmedoids: return "kmedoids";
    case Algorithm::clara: return "clara";
    case Algorithm::kmeans: return "kmeans";
    case Algorithm::bisecting: return "bisecting";
    case Algorithm::agglomerative: return "agglomerative";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view name)
{
    for (Algorithm a : {Algorithm::kmedoids, Algorithm::clara, Algorithm::kmeans, Algorithm::bisecting,
                        Algorithm::agglomerative})
        if (algorithm_name(a) == name)
            return a;
    throw ConfigError("unknown algorithm '" + std::string(name) +
                      "' (expected kmedoids|clara|kmeans|bisecting|agglomerative)");
}

std::string_view init_name(Init i)
{
    switch (i) {
    case Init::faft: return "faft";
    case Init::heuristic: return "heuristic";
    case Init::kpp: return "kpp";
    case Init::random: return "random";
    }
    return "?";
}

Init parse_init(std::string_view name)
{
    for (Init i : {Init::faft, Init::heuristic, Init::kpp, Init::random})
        if (init_name(i) == name)
            return i;
    throw ConfigError("unknown init '" + std::string(name) + "' (expected faft|heuristic|kpp|random)");
}

std::string_view linkage_name(Linkage l)
{
    switch (l) {
    case Linkage::average: return "average";
    case Linkage::single: return "single";
    case Linkage::complete: return "complete";
    }
    return "?";
}

Linkage parse_linkage(std::string_view name)
{
    for (Linkage l : {Linkage::average, Linkage::single, Linkage::complete})
        if (linkage_name(l) == name)
            return l;
    throw ConfigError("unknown linkage '" + std::string(name) + "' (expected average|single|complete)");
}

void ClusteringConfig::validate(std::size_t n) const
{
    if (k < 1)
        throw ConfigError("k must be >= 1");
    if (k > n)
        throw ConfigError("k = " + std::to_string(k) + " exceeds the number of samples n = " + std::to_string(n));
    if (max_iter < 1)
        throw ConfigError("max_iter must be >= 1");
    if (clara_subsamples < 1)
        throw ConfigError("clara_subsamples must be >= 1");
    if (effective_subsample_size() < k)
        throw ConfigError("CLARA subsample size " + std::to_string(effective_subsample_size()) +
                          " is smaller than k = " + std::to_string(k));
}

std::vector<std::size_t> faft_from(const FeatureMatrix& data, std::size_t n_select, Metric m, std::size_t first)
{
    const std::size_t n = data.rows();
    if (n_select < 1 || n_select > n)
        throw ConfigError("FAFT selection size " + std::to_string(n_select) + " outside [1, " + std::to_string(n) + "]");
    if (first >= n)
        throw ConfigError("FAFT start index out of range");
    std::vector<double> min_dist(n, kInf);
    std::vector<char> chosen(n, 0);
    std::vector<std::size_t> order;
    order.reserve(n_select);
    std::size_t next = first;
    while (true) {
        order.push_back(next);
        chosen[next] = 1;
        if (order.size() == n_select)
            break;
        kernels::relax_min_distance(data, next, m, min_dist);
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!chosen[i] && min_dist[i] > best) {
                best = min_dist[i];
                next = i;
            }
        }
    }
    return order;
}

std::vector<std::size_t> faft(const FeatureMatrix& data, std::size_t n_select, Metric m, std::uint64_t seed)
{
    if (data.rows() == 0)
        throw ConfigError("FAFT on an empty dataset");
    Rng rng(seed);
    return faft_from(data, n_select, m, rng.index(data.rows()));
}

std::vector<std::size_t> initial_medoids(const Distances& d, std::size_t k, Init init, std::uint64_t seed)
{
    const std::size_t n = d.size();
    if (k < 1 || k > n)
        throw ConfigError("cannot pick " + std::to_string(k) + " initial medoids from " + std::to_string(n) + " points");
    switch (init) {
    case Init::faft:
        return faft(d.data(), k, d.metric(), seed);
    case Init::random: {
        Rng rng(seed);
        return rng.sample_without_replacement(n, k);
    }
    case Init::heuristic: {
        std::vector<double> sums(n);
        kernels::distance_row_sums(d, sums);
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return sums[a] < sums[b]; });
        idx.resize(k);
        return idx;
    }
    case Init::kpp: {
        Rng rng(seed);
        std::vector<std::size_t> out{rng.index(n)};
        std::vector<double> min_dist(n, kInf);
        std::vector<char> chosen(n, 0);
        chosen[out[0]] = 1;
        while (out.size() < k) {
            const std::size_t last = out.back();
            for (std::size_t i = 0; i < n; ++i)
                min_dist[i] = std::min(min_dist[i], d(i, last));
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (!chosen[i])
                    total += min_dist[i] * min_dist[i];
            std::size_t pick = n;
            if (total > 0.0) {
                const double r = rng.uniform() * total;
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (chosen[i] || min_dist[i] == 0.0)
                        continue;
                    acc += min_dist[i] * min_dist[i];
                    pick = i;
                    if (r < acc)
                        break;
                }
            } else {
                // Only duplicates of chosen points remain.
                std::size_t skip = rng.index(n - out.size());
                for (std::size_t i = 0; i < n; ++i) {
                    if (chosen[i])
                        continue;
                    if (skip-- == 0) {
                        pick = i;
                        break;
                    }
                }
            }
            chosen[pick] = 1;
            out.push_back(pick);
        }
        return out;
    }
    }
    return {};
}

ClusteringResult kmedoids(const FeatureMatrix& data, const ClusteringConfig& config)
{
    config.validate(data.rows());
    const Distances d(data, config.metric, config.pairwise_cap);
    return kmedoids(d, config);
}

ClusteringResult kmedoids(const Distances& d, const ClusteringConfig& config)
{
    const std::size_t n = d.size();
    config.validate(n);
    const std::size_t k = config.k;

    ClusteringResult r;
    r.k = k;
    r.initial = initial_medoids(d, k, config.init, config.seed);
    std::vector<std::size_t> medoids = r.initial;
    std::vector<std::size_t> assignment(n);
    std::vector<double> dist(n);
    std::vector<std::size_t> updated(k);

    for (r.iterations = 0; r.iterations < config.max_iter; ++r.iterations) {
        assign_with_repair(d, medoids, assignment, dist);
        r.cost_trace.push_back(kernels::ordered_sum(dist));
        kernels::cluster_medoids(d, members_of(assignment, k), medoids, updated);
        if (updated == medoids) {
            // Re-evaluating the unchanged medoid set reproduces the same cost.
            r.cost_trace.push_back(r.cost_trace.back());
            r.converged = true;
            break;
        }
        medoids = updated;
    }
    if (!r.converged) {
        assign_with_repair(d, medoids, assignment, dist);
        r.cost_trace.push_back(kernels::ordered_sum(dist));
    }

    if (config.swap_max_n > 0 && n <= config.swap_max_n && k < n)
        r.converged = swap_refine(d, medoids, assignment, dist, r.cost_trace, 10 * n) && r.converged;

    r.medoids = std::move(medoids);
    r.assignment = std::move(assignment);
    r.cost = kernels::ordered_sum(dist);
    return r;
}

ClusteringResult clara(const FeatureMatrix& data, const ClusteringConfig& config)
{
    const std::size_t n = data.rows();
    config.validate(n);
    const std::size_t sub_size = std::min(config.effective_subsample_size(), n);

    ClusteringResult best;
    best.cost = kInf;
    std::vector<double> round_costs;
    std::vector<double> trace;
    std::vector<std::size_t> assignment(n);
    std::vector<double> dist(n);

    for (std::size_t round = 0; round < config.clara_subsamples; ++round) {
        std::vector<std::size_t> rows;
        if (sub_size == n) {
            rows.resize(n);
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        } else {
            Rng rng(derive_seed(config.seed, "clara-subsample", std::to_string(round)));
            rows = rng.sample_without_replacement(n, sub_size);
            std::sort(rows.begin(), rows.end());
        }
        const FeatureMatrix sub = data.select_rows(rows);
        ClusteringConfig sub_config = config;
        sub_config.seed = round == 0 ? config.seed : derive_seed(config.seed, round);
        ClusteringResult local = kmedoids(sub, sub_config);

        std::vector<std::size_t> medoids(local.medoids.size());
        for (std::size_t c = 0; c < medoids.size(); ++c)
            medoids[c] = rows[local.medoids[c]];
        kernels::assign_to_medoids(data, medoids, config.metric, assignment, dist);
        const double cost = kernels::ordered_sum(dist);
        round_costs.push_back(cost);
        if (cost < best.cost) {
            best.cost = cost;
            best.medoids = std::move(medoids);
            best.assignment = assignment;
            best.initial.clear();
            for (std::size_t i : local.initial)
                best.initial.push_back(rows[i]);
            best.iterations = local.iterations;
            best.converged = local.converged;
        }
        trace.push_back(best.cost);
    }
    best.k = config.k;
    best.round_costs = std::move(round_costs);
    best.cost_trace = std::move(trace);
    return best;
}

ClusteringResult run_clustering(Algorithm algo, const FeatureMatrix& data, const ClusteringConfig& config)
{
    switch (algo) {
    case Algorithm::kmedoids: return kmedoids(data, config);
    case Algorithm::clara: return clara(data, config);
    case Algorithm::kmeans: return kmeans(data, config);
    case Algorithm::bisecting: return bisecting_kmeans(data, config);
    case Algorithm::agglomerative:
        return agglomerative(data, config.k, config.metric, config.linkage, config.pairwise_cap);
    }
    throw ConfigError("unknown algorithm");
}

} // namespace divmine
