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

#include "divmine/stats.hpp"

#include "divmine/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

namespace divmine {

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double x, double a, double b)
{
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny)
        d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny)
            d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny)
            d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps)
            break;
    }
    return h;
}

} // namespace

double log_beta(double a, double b)
{
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double regularized_incomplete_beta(double x, double a, double b)
{
    if (!(a > 0.0) || !(b > 0.0))
        throw ConfigError("incomplete beta needs a, b > 0");
    if (x <= 0.0)
        return 0.0;
    if (x >= 1.0)
        return 1.0;
    const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_continued_fraction(x, a, b) / a;
    return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double f_upper_tail(double f, double d1, double d2)
{
    if (std::isnan(f))
        return std::numeric_limits<double>::quiet_NaN();
    if (f <= 0.0)
        return 1.0;
    if (std::isinf(f))
        return 0.0;
    return regularized_incomplete_beta(d2 / (d2 + d1 * f), d2 / 2.0, d1 / 2.0);
}

double normal_upper_tail(double z)
{
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

std::vector<double> midranks(std::span<const double> x)
{
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]])
            ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t)
            ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

double mean(std::span<const double> x)
{
    if (x.empty())
        return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double population_sd(std::span<const double> x)
{
    if (x.empty())
        return 0.0;
    // Shifted by x[0] so constant input gives exactly zero.
    const double shift = x[0];
    double m = 0.0;
    for (double v : x)
        m += v - shift;
    m /= static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x)
        s += (v - shift - m) * (v - shift - m);
    return std::sqrt(s / static_cast<double>(x.size()));
}

double median(std::vector<double> x)
{
    if (x.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

LeveneResult levene(const std::vector<std::vector<double>>& groups, LeveneCenter center)
{
    if (groups.size() < 2)
        throw ConfigError("Levene's test needs at least two groups");
    std::size_t total = 0;
    std::vector<std::vector<double>> dev(groups.size());
    std::vector<double> group_mean(groups.size());
    double grand = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].size() < 2)
            throw ConfigError("Levene's test: group " + std::to_string(g) + " has fewer than 2 values");
        const double c = center == LeveneCenter::mean ? mean(groups[g]) : median(groups[g]);
        for (double v : groups[g])
            dev[g].push_back(std::abs(v - c));
        group_mean[g] = mean(dev[g]);
        grand += std::accumulate(dev[g].begin(), dev[g].end(), 0.0);
        total += groups[g].size();
    }
    grand /= static_cast<double>(total);

    double between = 0.0, within = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double d = group_mean[g] - grand;
        between += static_cast<double>(dev[g].size()) * d * d;
        for (double z : dev[g])
            within += (z - group_mean[g]) * (z - group_mean[g]);
    }

    LeveneResult r;
    r.df_between = static_cast<double>(groups.size() - 1);
    r.df_within = static_cast<double>(total - groups.size());
    if (between == 0.0) {
        r.w = 0.0;
        r.p = 1.0;
        return r;
    }
    r.w = within == 0.0 ? std::numeric_limits<double>::infinity()
                        : (r.df_within / r.df_between) * between / within;
    r.p = std::clamp(f_upper_tail(r.w, r.df_between, r.df_within), 0.0, 1.0);
    return r;
}

MwuResult mann_whitney_u(std::span<const double> x, std::span<const double> y, MwuMode mode)
{
    if (x.empty() || y.empty())
        throw ConfigError("Mann-Whitney U needs two nonempty samples");
    const std::size_t nx = x.size();
    const std::size_t ny = y.size();
    const std::size_t n = nx + ny;
    std::vector<double> pooled(x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    const auto ranks = midranks(pooled);

    const double rx = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(nx), 0.0);
    MwuResult r;
    r.u_x = rx - static_cast<double>(nx) * static_cast<double>(nx + 1) / 2.0;
    r.u_y = static_cast<double>(nx) * static_cast<double>(ny) - r.u_x;
    const double mu = static_cast<double>(nx) * static_cast<double>(ny) / 2.0;

    const bool exact = mode == MwuMode::exact || (mode == MwuMode::automatic && n <= kMwuExactMaxN);
    if (exact) {
        // Enumerate every nx-subset of the pooled ranks.
        double combos = 1.0;
        for (std::size_t i = 1; i <= nx; ++i)
            combos = combos * static_cast<double>(ny + i) / static_cast<double>(i);
        if (combos > 5e7)
            throw ConfigError("exact Mann-Whitney enumeration too large (" + std::to_string(combos) + " splits)");
        const double observed = std::abs(r.u_x - mu);
        const double tol = 1e-9 * std::max(1.0, mu);
        const double offset = static_cast<double>(nx) * static_cast<double>(nx + 1) / 2.0;
        std::vector<std::size_t> pick(nx);
        std::iota(pick.begin(), pick.end(), std::size_t{0});
        std::uint64_t extreme = 0, all = 0;
        while (true) {
            double s = 0.0;
            for (std::size_t i : pick)
                s += ranks[i];
            if (std::abs(s - offset - mu) >= observed - tol)
                ++extreme;
            ++all;
            // Next combination in lexicographic order.
            std::size_t i = nx;
            while (i > 0 && pick[i - 1] == n - nx + (i - 1))
                --i;
            if (i == 0)
                break;
            ++pick[i - 1];
            for (std::size_t j = i; j < nx; ++j)
                pick[j] = pick[j - 1] + 1;
        }
        r.p = static_cast<double>(extreme) / static_cast<double>(all);
        r.exact = true;
        return r;
    }

    // Tie correction: sum over tie groups of t^3 - t.
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double ties = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i])
            ++j;
        const double t = static_cast<double>(j - i);
        ties += t * t * t - t;
        i = j;
    }
    const double nn = static_cast<double>(n);
    const double var = static_cast<double>(nx) * static_cast<double>(ny) / 12.0 * ((nn + 1.0) - ties / (nn * (nn - 1.0)));
    if (!(var > 0.0)) {
        r.p = 1.0;
        return r;
    }
    const double z = (std::abs(r.u_x - mu) - 0.5) / std::sqrt(var);
    r.p = std::clamp(2.0 * normal_upper_tail(z), 0.0, 1.0);
    return r;
}

} // namespace divmine
