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

#ifndef DIVMINE_FEATPREP_HPP
#define DIVMINE_FEATPREP_HPP

#include "divmine/dataio.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace divmine {

/// Per-speaker z-scoring of one block's columns with population SD.
/// Singleton speakers and zero-variance columns map to 0.
Dataset speaker_zscore(const Dataset& data, const std::string& block);

struct PcaModel {
    std::string block;
    std::size_t input_width = 0;
    std::vector<double> mean;        // input_width
    std::vector<double> components;  // n_components x input_width, orthonormal rows
    std::vector<double> explained_variance; // non-increasing

    std::size_t n_components() const { return explained_variance.size(); }
};

/// Principal axes of the block's population covariance. Component signs are
/// fixed so the largest-magnitude loading of each axis is positive.
PcaModel fit_pca(const Dataset& data, const std::string& block, std::size_t n_components);

/// Replaces the block's columns by (x - mean) * components^T; no whitening.
/// Later blocks shift left/right to stay contiguous.
Dataset apply_pca(const Dataset& data, const PcaModel& model);

/// Sum of per-column population variances over a block.
double block_total_variance(const FeatureMatrix& m, const BlockSpec& block);

struct BalanceWeights {
    std::vector<std::string> blocks;
    std::vector<double> scales;
    double target_per_block_variance = 1.0;
};

struct Balanced {
    Dataset data;
    BalanceWeights weights;
};

/// Scales every block by one factor so its total variance is 1; with B
/// blocks each contributes exactly 1/B. Throws ValidationError naming a
/// zero-variance block.
Balanced balance_blocks(const Dataset& data);
Dataset apply_balance(const Dataset& data, const BalanceWeights& weights);

/// z-score -> PCA -> balance, in that order.
struct PrepConfig {
    std::vector<std::string> zscore_blocks;
    std::optional<std::string> pca_block;
    std::size_t pca_components = 42;
    bool balance = true;
};

struct PrepModel {
    std::vector<std::string> zscore_blocks;
    std::optional<PcaModel> pca;
    std::optional<BalanceWeights> balance;
};

struct Prepared {
    Dataset data;
    PrepModel model;
};

Prepared prepare(const Dataset& data, const PrepConfig& config);

/// Applies a fitted model to other data. Speaker z-scoring uses the new
/// data's own speaker statistics; PCA and balance reuse the stored fit.
Dataset apply_prep(const Dataset& data, const PrepModel& model);

void write_prep_model(std::ostream& out, const PrepModel& model);
PrepModel read_prep_model(std::istream& in, const std::string& origin = "<model>");

} // namespace divmine

#endif
