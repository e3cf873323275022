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

#ifndef DIVMINE_ANNOSTATS_HPP
#define DIVMINE_ANNOSTATS_HPP

#include "divmine/dataio.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace divmine {

enum class Dimension { valence, arousal };
std::string_view dimension_name(Dimension d);

// Discrete classes. Arousal: 0 = low, 1 = high.
// Valence: 0 = negative, 1 = neutral, 2 = positive.
inline constexpr int kLow = 0;
inline constexpr int kHigh = 1;
inline constexpr int kNegative = 0;
inline constexpr int kNeutral = 1;
inline constexpr int kPositive = 2;

inline constexpr double kDefaultValenceThreshold = 0.08;

struct NormParams {
    double mean = 0.0;
    double sd = 0.0;
    double max_abs = 0.0; // of the z-scores
    bool degenerate = false;
};

struct AnnotatorParams {
    std::string annotator_id;
    NormParams valence;
    NormParams arousal;
};

struct NormalizedRatings {
    std::vector<AnnotationRecord> records; // same order as the input
    std::vector<AnnotatorParams> annotators; // order of first appearance
};

/// Per annotator and dimension: z-score with population SD, then divide by
/// the largest |z|. Annotator-dimensions with fewer than two distinct
/// ratings become all zeros (logged).
NormalizedRatings normalize_ratings(std::span<const AnnotationRecord> records);

/// Mean rating per gold-standard sample. Throws ValidationError listing the
/// samples with fewer than two ratings.
std::vector<ScoreRecord> aggregate_gs(const NormalizedRatings& normalized, std::span<const std::string> gs_ids);

/// One score per rated sample: mean over its ratings (the gold-standard mean
/// for GS samples, the single rating otherwise). Sorted by first appearance.
std::vector<ScoreRecord> consensus_scores(const NormalizedRatings& normalized);

int arousal_class(double score);
int valence_class(double score, double threshold);

struct DiscreteLabels {
    Dimension dimension = Dimension::arousal;
    double threshold = 0.0;
    std::vector<int> labels;
};

/// Arousal: low <=> score <= 0. Valence: negative <=> score <= -t,
/// positive <=> score > t, neutral otherwise. Throws ConfigError for t < 0.
DiscreteLabels discretize(std::span<const double> scores, Dimension dim, double threshold = kDefaultValenceThreshold);

/// Per-sample modal label over annotators; negative entries mean "not
/// rated". Ties resolve to neutral (valence) or low (arousal).
std::vector<int> majority_vote(const std::vector<std::vector<int>>& per_annotator, Dimension dim);

/// (p_o - p_e) / (1 - p_e) with each rater's own marginals; 1 when p_e = 1.
double cohens_kappa(std::span<const int> a, std::span<const int> b);

/// Pearson correlation of mid-ranks. Constant input gives 0 (logged).
double spearman(std::span<const double> x, std::span<const double> y);

/// Gold-standard ratings as an annotator x sample grid; NaN = not rated.
struct GoldMatrix {
    std::vector<std::string> sample_ids;
    std::vector<std::string> annotators;
    std::vector<double> valence;
    std::vector<double> arousal;

    double at(Dimension d, std::size_t annotator, std::size_t sample) const
    {
        const auto& v = d == Dimension::valence ? valence : arousal;
        return v[annotator * sample_ids.size() + sample];
    }
};

GoldMatrix gold_matrix(const NormalizedRatings& normalized, std::span<const std::string> gs_ids);

enum class KappaMode {
    vs_vote,   // each annotator against the majority vote
    all_pairs, // additionally every annotator pair, pooled
};

/// {0.000, 0.005, ..., 0.500}.
std::vector<double> default_threshold_grid();

struct ThresholdSearch {
    double best = 0.0;
    std::vector<double> grid;
    std::vector<double> mean_kappa;
};

/// Grid search for the valence threshold maximizing mean kappa; the lowest
/// t wins ties. Throws ConfigError on an empty grid.
ThresholdSearch optimize_valence_threshold(const GoldMatrix& gold, std::span<const double> grid,
                                           KappaMode mode = KappaMode::vs_vote);

/// Mean kappa at one threshold for one dimension (arousal ignores t).
double mean_kappa(const GoldMatrix& gold, Dimension dim, double threshold, KappaMode mode = KappaMode::vs_vote);

struct AgreementReport {
    double spearman_valence = 0.0; // mean over annotators, vs mean of annotators
    double spearman_arousal = 0.0;
    double kappa_valence = 0.0;    // mean over annotators, vs majority vote
    double kappa_arousal = 0.0;
    double threshold = kDefaultValenceThreshold;
};

AgreementReport agreement(const GoldMatrix& gold, double threshold);

} // namespace divmine

#endif
