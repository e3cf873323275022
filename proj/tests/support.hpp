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

// Shared fixtures and brute-force oracles for the test binaries.

#ifndef DIVMINE_TESTS_SUPPORT_HPP
#define DIVMINE_TESTS_SUPPORT_HPP

#include "divmine/dataio.hpp"
#include "divmine/metric.hpp"
#include "divmine/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace support {

using divmine::Dataset;
using divmine::FeatureMatrix;
using divmine::Metric;

inline FeatureMatrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed, double scale = 1.0)
{
    divmine::Rng rng(seed);
    std::vector<double> v(n * d);
    for (auto& x : v)
        x = scale * rng.normal();
    return FeatureMatrix(n, d, std::move(v));
}

inline FeatureMatrix column(std::vector<double> values)
{
    const std::size_t n = values.size();
    return FeatureMatrix(n, 1, std::move(values));
}

/// Dataset with ids s0.., sources cycling through `sources`, one speaker per
/// source.
inline Dataset with_meta(const FeatureMatrix& m, const std::vector<std::string>& sources = {"LP", "TP", "HP"})
{
    std::vector<divmine::SampleMeta> meta;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const std::string& s = sources[i % sources.size()];
        meta.push_back({"s" + std::to_string(i), s, s + "-spk", std::nullopt, std::nullopt});
    }
    return Dataset(std::move(meta), m);
}

inline double medoid_cost(const FeatureMatrix& data, const std::vector<std::size_t>& medoids, Metric m)
{
    double total = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c : medoids)
            best = std::min(best, divmine::distance(data.row(i), data.row(c), m));
        total += best;
    }
    return total;
}

/// Every k-subset of {0..n-1} in lexicographic order.
inline std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t k)
{
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur(k);
    for (std::size_t i = 0; i < k; ++i)
        cur[i] = i;
    while (true) {
        out.push_back(cur);
        std::size_t i = k;
        while (i > 0 && cur[i - 1] == n - k + i - 1)
            --i;
        if (i == 0)
            break;
        ++cur[i - 1];
        for (std::size_t j = i; j < k; ++j)
            cur[j] = cur[j - 1] + 1;
    }
    return out;
}

struct KMedoidsLandscape {
    double optimum = 0.0;
    std::vector<double> local_optima; // costs of swap-local optima
};

/// Exhaustive C(n,k) scan: global optimum plus every medoid set that no
/// single medoid/non-medoid swap improves by more than `tol`.
inline KMedoidsLandscape kmedoids_landscape(const FeatureMatrix& data, std::size_t k, Metric m, double tol)
{
    const std::size_t n = data.rows();
    const auto all = subsets(n, k);
    std::vector<double> cost(all.size());
    for (std::size_t s = 0; s < all.size(); ++s)
        cost[s] = medoid_cost(data, all[s], m);
    KMedoidsLandscape out;
    out.optimum = *std::min_element(cost.begin(), cost.end());
    for (std::size_t s = 0; s < all.size(); ++s) {
        bool local = true;
        for (std::size_t pos = 0; pos < k && local; ++pos)
            for (std::size_t x = 0; x < n && local; ++x) {
                if (std::find(all[s].begin(), all[s].end(), x) != all[s].end())
                    continue;
                auto swapped = all[s];
                swapped[pos] = x;
                if (medoid_cost(data, swapped, m) < cost[s] - tol)
                    local = false;
            }
        if (local)
            out.local_optima.push_back(cost[s]);
    }
    return out;
}

/// Symmetric eigenvalues by cyclic Jacobi rotations, descending.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> a, std::size_t n)
{
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                off += a[p * n + q] * a[p * n + q];
        if (off < 1e-30)
            break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300)
                    continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t r = 0; r < n; ++r) {
                    const double arp = a[r * n + p], arq = a[r * n + q];
                    a[r * n + p] = c * arp - s * arq;
                    a[r * n + q] = s * arp + c * arq;
                }
                for (std::size_t r = 0; r < n; ++r) {
                    const double apr = a[p * n + r], aqr = a[q * n + r];
                    a[p * n + r] = c * apr - s * aqr;
                    a[q * n + r] = s * apr + c * aqr;
                }
            }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i)
        ev[i] = a[i * n + i];
    std::sort(ev.rbegin(), ev.rend());
    return ev;
}

/// Two-sided exact MWU p by enumerating which positions of the pooled
/// sample belong to x (mid-ranks for ties).
inline double exact_mwu_p(const std::vector<double>& x, const std::vector<double>& y)
{
    std::vector<double> pooled = x;
    pooled.insert(pooled.end(), y.begin(), y.end());
    const std::size_t n = pooled.size(), nx = x.size();
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        double less = 0.0, equal = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            less += pooled[j] < pooled[i];
            equal += pooled[j] == pooled[i];
        }
        rank[i] = less + (equal + 1.0) / 2.0;
    }
    const double shift = static_cast<double>(nx) * static_cast<double>(nx + 1) / 2.0;
    const double mu = static_cast<double>(nx) * static_cast<double>(n - nx) / 2.0;
    double observed = -shift;
    for (std::size_t i = 0; i < nx; ++i)
        observed += rank[i];
    const double obs_dev = std::abs(observed - mu);
    std::size_t hits = 0, total = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != nx)
            continue;
        double u = -shift;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i))
                u += rank[i];
        ++total;
        hits += std::abs(u - mu) >= obs_dev - 1e-9;
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    const auto p = std::filesystem::temp_directory_path() / ("divmine-test-" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace support

#endif
