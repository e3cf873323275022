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

#include "divmine/metric.hpp"

#include "divmine/error.hpp"
#include "divmine/kernels.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

namespace divmine {

namespace {

std::atomic<std::uint64_t> g_zero_cosine{0};
std::atomic<std::uint64_t> g_constant_pearson{0};

double clamp_unit_pair(double d)
{
    return std::clamp(d, 0.0, 2.0);
}

double cosine_distance(std::span<const double> a, std::span<const double> b)
{
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        g_zero_cosine.fetch_add(1, std::memory_order_relaxed);
        spdlog::debug("cosine distance with a zero vector");
        return (na == 0.0 && nb == 0.0) ? 0.0 : 1.0;
    }
    // sqrt(na * nb) rather than sqrt(na) * sqrt(nb): gives exactly 0 for a == b.
    return clamp_unit_pair(1.0 - dot / std::sqrt(na * nb));
}

double pearson_distance(std::span<const double> a, std::span<const double> b)
{
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) {
        g_constant_pearson.fetch_add(1, std::memory_order_relaxed);
        spdlog::debug("pearson distance with a constant vector");
        return 1.0;
    }
    return clamp_unit_pair(1.0 - sab / std::sqrt(saa * sbb));
}

} // namespace

std::string_view metric_name(Metric m)
{
    switch (m) {
    case Metric::euclidean: return "euclidean";
    case Metric::manhattan: return "manhattan";
    case Metric::chebyshev: return "chebyshev";
    case Metric::cosine: return "cosine";
    case Metric::pearson: return "pearson";
    }
    return "?";
}

Metric parse_metric(std::string_view name)
{
    for (Metric m : kAllMetrics)
        if (metric_name(m) == name)
            return m;
    throw ConfigError("unknown metric '" + std::string(name) +
                      "' (expected euclidean|manhattan|chebyshev|cosine|pearson)");
}

double distance(std::span<const double> a, std::span<const double> b, Metric m)
{
    if (a.size() != b.size())
        throw ConfigError("distance between vectors of length " + std::to_string(a.size()) + " and " +
                          std::to_string(b.size()));
    switch (m) {
    case Metric::euclidean: {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            s += d * d;
        }
        return std::sqrt(s);
    }
    case Metric::manhattan: {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            s += std::abs(a[i] - b[i]);
        return s;
    }
    case Metric::chebyshev: {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            s = std::max(s, std::abs(a[i] - b[i]));
        return s;
    }
    case Metric::cosine:
        return cosine_distance(a, b);
    case Metric::pearson:
        if (a.size() < 2)
            throw ConfigError("pearson distance needs vectors of length >= 2");
        return pearson_distance(a, b);
    }
    return 0.0;
}

DegenerateCounts degenerate_counts()
{
    return {g_zero_cosine.load(), g_constant_pearson.load()};
}

void reset_degenerate_counts()
{
    g_zero_cosine = 0;
    g_constant_pearson = 0;
}

void require_metric_fits(Metric m, std::size_t dim)
{
    if (dim == 0)
        throw ConfigError("distances need at least one feature column");
    if (m == Metric::pearson && dim < 2)
        throw ConfigError("pearson distance needs vectors of length >= 2");
}

DistanceTable pairwise(const FeatureMatrix& data, Metric m, std::size_t cap)
{
    const std::size_t n = data.rows();
    if (n == 0)
        throw ConfigError("pairwise distances need at least one point");
    if (n > cap)
        throw CapacityError("pairwise table for n = " + std::to_string(n) + " exceeds the cap of " +
                            std::to_string(cap) + " points (" + std::to_string(DistanceTable::bytes_for(n) >> 20) +
                            " MiB); use on-demand distances");
    require_metric_fits(m, data.cols());
    DistanceTable table(n);
    kernels::pairwise_fill(data, m, table);
    return table;
}

Distances::Distances(const FeatureMatrix& data, Metric m, std::size_t cap) : data_(&data), metric_(m)
{
    require_metric_fits(m, data.cols());
    if (data.rows() > 0 && data.rows() <= cap) {
        table_ = pairwise(data, m, cap);
        tabulated_ = true;
    }
}

} // namespace divmine
