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

#ifndef DIVMINE_STATS_HPP
#define DIVMINE_STATS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace divmine {

// Special functions. The incomplete beta uses the Lentz continued fraction,
// relative accuracy ~1e-14 over the parameter ranges the tests use.
double log_beta(double a, double b);
double regularized_incomplete_beta(double x, double a, double b);
/// P(F > f) for F ~ F(d1, d2).
double f_upper_tail(double f, double d1, double d2);
/// P(Z > z) for standard normal Z.
double normal_upper_tail(double z);

/// Average ranks (1-based) with ties sharing their mid-rank.
std::vector<double> midranks(std::span<const double> x);

double mean(std::span<const double> x);
/// Population standard deviation (divides by n).
double population_sd(std::span<const double> x);

enum class LeveneCenter { mean, median };

struct LeveneResult {
    double w = 0.0;
    double p = 1.0;
    double df_between = 0.0;
    double df_within = 0.0;
};

/// Levene's test on absolute deviations from each group's mean (or median:
/// Brown-Forsythe). p is the F(k-1, N-k) upper tail. Every group needs >= 2
/// values.
LeveneResult levene(const std::vector<std::vector<double>>& groups, LeveneCenter center = LeveneCenter::mean);

enum class MwuMode { automatic, exact, normal };

struct MwuResult {
    double u_x = 0.0; // U for the first sample
    double u_y = 0.0;
    double p = 1.0;   // two-sided
    bool exact = false;
};

/// Mann-Whitney U with mid-ranks. Automatic mode enumerates every split of
/// the pooled ranks when n_x + n_y <= kMwuExactMaxN, otherwise uses the
/// tie-corrected normal approximation with continuity correction.
inline constexpr std::size_t kMwuExactMaxN = 12;
MwuResult mann_whitney_u(std::span<const double> x, std::span<const double> y, MwuMode mode = MwuMode::automatic);

double median(std::vector<double> x);

} // namespace divmine

#endif
