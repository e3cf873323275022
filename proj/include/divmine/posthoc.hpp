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

#ifndef DIVMINE_POSTHOC_HPP
#define DIVMINE_POSTHOC_HPP

#include "divmine/annostats.hpp"
#include "divmine/cluster.hpp"
#include "divmine/dataio.hpp"
#include "divmine/metric.hpp"
#include "divmine/stats.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace divmine {

// ---- diversity curves ----------------------------------------------------

enum class Strategy { random, faft, faft_kmedoids, clara };
inline constexpr Strategy kAllStrategies[] = {Strategy::random, Strategy::faft, Strategy::faft_kmedoids,
                                              Strategy::clara};
std::string_view strategy_name(Strategy s);
Strategy parse_strategy(std::string_view name);

/// 100 for random sampling, 5 otherwise.
std::size_t default_runs(Strategy s);

/// Roughly log-spaced integers from lo to hi inclusive, deduplicated.
std::vector<std::size_t> log_spaced_sizes(std::size_t lo, std::size_t hi, std::size_t count);
/// log_spaced_sizes(10, 1500, 12).
std::vector<std::size_t> default_diversity_sizes();

struct DiversityPoint {
    std::size_t n_samples = 0;
    double sd_mean = 0.0;
    double sd_stderr = 0.0;
};

struct DiversityCurve {
    Strategy strategy = Strategy::random;
    std::string feature_set = "all";
    Dimension dimension = Dimension::valence;
    std::size_t runs = 0;
    std::vector<DiversityPoint> points;      // ascending n_samples
    std::vector<std::vector<double>> run_sd; // [point][run]
};

struct DiversitySpec {
    Strategy strategy = Strategy::random;
    std::vector<std::size_t> sizes;
    std::size_t runs = 0; // 0: default_runs(strategy)
    std::uint64_t seed = 0;
    Metric metric = Metric::euclidean;
    Init clara_init = Init::heuristic;
    std::size_t max_iter = 100;
    std::size_t pairwise_cap = kDefaultPairwiseCap;
    std::string feature_set = "all";
};

/// Index sets picked by one strategy run, one per size (ascending sizes).
std::vector<std::vector<std::size_t>> diversity_selections(const FeatureMatrix& features, const DiversitySpec& spec,
                                                           std::size_t run, const Distances* shared = nullptr);

/// Curves for valence and arousal (in that order) from one set of
/// selections. `scores` is aligned with the feature rows.
std::vector<DiversityCurve> diversity_curves(const FeatureMatrix& features, std::span<const ScoreRecord> scores,
                                             const DiversitySpec& spec);

DiversityCurve diversity_curve(const FeatureMatrix& features, std::span<const double> scores,
                               const DiversitySpec& spec, Dimension dim = Dimension::valence);

// ---- purity ----------------------------------------------------------------

struct Purity {
    double purity = 0.0;
    std::size_t n_excluded = 0;
};

/// Mean modal-class fraction over clusters with at least two members.
Purity purity(std::span<const std::size_t> assignment, std::span<const int> labels);

struct Variant {
    std::size_t id = 0; // 1-based
    Algorithm algorithm = Algorithm::clara;
    Metric metric = Metric::euclidean;
    Init init = Init::heuristic;

    std::string name() const;
};

/// k-means, bisecting k-means, agglomerative x 4 metrics, CLARA x 5 metrics
/// x {heuristic, kpp}: 16 variants with ids 1..16.
std::vector<Variant> standard_variants();

struct FeatureSet {
    std::string name;
    std::vector<std::string> blocks;
};

/// Each block alone, then all blocks together (named "all").
std::vector<FeatureSet> standard_feature_sets(std::span<const BlockSpec> blocks);

/// {50, 60, ..., 250, 500, 750, 1000, 1500}.
std::vector<std::size_t> standard_k_values();

struct GridSpec {
    std::vector<Variant> variants;
    std::vector<FeatureSet> feature_sets;
    std::vector<std::size_t> k_values;
    std::size_t reps = 10;
    std::uint64_t seed = 0;
    double valence_threshold = kDefaultValenceThreshold;
    std::size_t max_iter = 100;
    std::size_t pairwise_cap = kDefaultPairwiseCap;
};

struct GridCell {
    std::size_t variant = 0; // index into GridSpec::variants
    std::size_t feature_set = 0;
    std::size_t k = 0;
    std::size_t rep = 0;

    std::string key(const GridSpec& spec) const;
};

/// Canonical order: variant, feature set, k, rep.
std::vector<GridCell> enumerate_cells(const GridSpec& spec);
std::uint64_t cell_seed(const GridSpec& spec, const GridCell& cell);

struct PurityResult {
    std::string variant;
    std::size_t variant_id = 0;
    std::string feature_set;
    std::size_t k = 0;
    std::size_t rep = 0;
    Dimension dimension = Dimension::valence;
    bool ok = true;
    double purity = 0.0;
    std::size_t n_excluded = 0;
    std::string error; // failed cells only
};

struct GridResult {
    std::size_t cells = 0;
    std::size_t failed_cells = 0;
    std::vector<PurityResult> rows; // two per cell, canonical order
};

GridResult purity_grid(const Dataset& data, std::span<const ScoreRecord> scores, const GridSpec& spec);

// ---- comparisons -------------------------------------------------------------

enum class GroupBy { variant, algorithm, metric, init, feature_set };
std::string_view group_by_name(GroupBy g);
GroupBy parse_group_by(std::string_view name);
std::string group_key(const PurityResult& r, GroupBy g);

struct Comparison {
    std::string a;
    std::string b;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    double u = 0.0; // U of group a
    double p = 1.0;
    double median_a = 0.0;
    double median_b = 0.0;
};

/// Two-sided MWU for every pair of groups (sorted by name), pooling purity
/// over the remaining factors. Failed rows are ignored; groups with fewer
/// than two values are dropped with a warning.
std::vector<Comparison> compare_variants(std::span<const PurityResult> results, GroupBy group_by,
                                         std::optional<Dimension> dimension = std::nullopt,
                                         MwuMode mode = MwuMode::automatic);

struct LeveneComparison {
    Dimension dimension = Dimension::valence;
    std::size_t n_mined = 0;
    std::size_t n_random = 0;
    double sd_mined = 0.0;
    double sd_random = 0.0;
    LeveneResult test;
};

/// Levene test of mined vs random score variance, valence then arousal.
std::vector<LeveneComparison> compare_variances(std::span<const ScoreRecord> mined, std::span<const ScoreRecord> random,
                                                LeveneCenter center = LeveneCenter::mean);

// ---- CSV -----------------------------------------------------------------------

void write_curves(std::ostream& out, std::span<const DiversityCurve> curves);
void write_purity(std::ostream& out, std::span<const PurityResult> rows);
std::vector<PurityResult> read_purity(std::istream& in, const std::string& origin = "<purity>");
void write_comparisons(std::ostream& out, std::span<const Comparison> rows);
void write_levene(std::ostream& out, std::span<const LeveneComparison> rows);

} // namespace divmine

#endif
