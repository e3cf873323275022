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

#include <algorithm>
#include <limits>
#include <string>

namespace divmine {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lance_williams(Linkage linkage, double d_ax, double d_bx, std::size_t size_a, std::size_t size_b)
{
    switch (linkage) {
    case Linkage::single: return std::min(d_ax, d_bx);
    case Linkage::complete: return std::max(d_ax, d_bx);
    case Linkage::average:
        return (static_cast<double>(size_a) * d_ax + static_cast<double>(size_b) * d_bx) /
               static_cast<double>(size_a + size_b);
    }
    return 0.0;
}

// Cached nearest neighbour of every active row among active j > i.
struct RowMinima {
    std::vector<std::size_t> nn;
    std::vector<double> dist;

    void recompute(const DistanceTable& t, const std::vector<char>& active, std::size_t i)
    {
        nn[i] = t.size();
        dist[i] = kInf;
        for (std::size_t j = i + 1; j < t.size(); ++j) {
            if (active[j] && t(i, j) < dist[i]) {
                dist[i] = t(i, j);
                nn[i] = j;
            }
        }
    }
};

} // namespace

ClusteringResult agglomerative(const FeatureMatrix& data, std::size_t k, Metric m, Linkage linkage,
                               std::size_t pairwise_cap)
{
    const std::size_t n = data.rows();
    if (k < 1 || k > n)
        throw ConfigError("agglomerative: k = " + std::to_string(k) + " outside [1, n = " + std::to_string(n) + "]");
    DistanceTable table = pairwise(data, m, pairwise_cap);

    std::vector<char> active(n, 1);
    std::vector<std::size_t> size(n, 1);
    RowMinima rows{std::vector<std::size_t>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i)
        rows.recompute(table, active, i);

    ClusteringResult r;
    for (std::size_t remaining = n; remaining > k; --remaining) {
        std::size_t a = n;
        double best = kInf;
        for (std::size_t i = 0; i < n; ++i) {
            if (active[i] && rows.nn[i] < n && rows.dist[i] < best) {
                best = rows.dist[i];
                a = i;
            }
        }
        const std::size_t b = rows.nn[a];
        for (std::size_t x = 0; x < n; ++x) {
            if (!active[x] || x == a || x == b)
                continue;
            const double merged = lance_williams(linkage, table(a, x), table(b, x), size[a], size[b]);
            if (x < a)
                table.upper(x, a) = merged;
            else
                table.upper(a, x) = merged;
        }
        active[b] = 0;
        size[a] += size[b];
        r.merges.push_back({a, b, best, size[a]});

        for (std::size_t i = 0; i < b; ++i) {
            if (!active[i])
                continue;
            if (i == a || rows.nn[i] == b || (i < a && rows.nn[i] == a)) {
                rows.recompute(table, active, i);
            } else if (i < a) {
                const double v = table(i, a);
                if (v < rows.dist[i] || (v == rows.dist[i] && a < rows.nn[i])) {
                    rows.dist[i] = v;
                    rows.nn[i] = a;
                }
            }
        }
    }

    // Label clusters by ascending representative, i.e. lowest member index.
    std::vector<std::size_t> root(n);
    for (std::size_t i = 0; i < n; ++i)
        root[i] = i;
    for (const auto& mg : r.merges)
        root[mg.b] = mg.a; // survivors have lower indices, so chains end at a live representative
    std::vector<std::size_t> label(n, n);
    std::size_t next = 0;
    r.assignment.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t rep = i;
        while (root[rep] != rep)
            rep = root[rep];
        if (label[rep] == n)
            label[rep] = next++;
        r.assignment[i] = label[rep];
    }

    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < n; ++i)
        members[r.assignment[i]].push_back(i);
    const Distances d(data, m, 0);
    r.medoids.resize(k);
    std::vector<std::size_t> current(k);
    for (std::size_t c = 0; c < k; ++c)
        current[c] = members[c].front();
    kernels::cluster_medoids(d, members, current, r.medoids);
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i)
        dist[i] = d(i, r.medoids[r.assignment[i]]);
    r.k = k;
    r.cost = kernels::ordered_sum(dist);
    r.cost_trace = {r.cost};
    r.converged = true;
    r.iterations = r.merges.size();
    return r;
}

} // namespace divmine
