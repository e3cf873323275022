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

#ifndef DIVMINE_DATAIO_HPP
#define DIVMINE_DATAIO_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace divmine {

/// A named run of contiguous feature columns, e.g. `egemaps = 0:42`.
struct BlockSpec {
    std::string name;
    std::size_t start_col = 0;
    std::size_t width = 0;

    bool operator==(const BlockSpec&) const = default;
};

/// Throws ValidationError unless the blocks are contiguous, ordered,
/// non-overlapping and cover exactly `dim` columns.
void validate_blocks(std::span<const BlockSpec> blocks, std::size_t dim);
std::size_t total_width(std::span<const BlockSpec> blocks);

/// Immutable row-major n x D matrix with its block layout.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    /// An empty `blocks` means one block named "features" spanning all columns.
    FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                  std::vector<BlockSpec> blocks = {});

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
    double at(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
    std::span<const double> values() const noexcept { return values_; }
    const std::vector<BlockSpec>& blocks() const noexcept { return blocks_; }
    const BlockSpec& block(std::string_view name) const;

    /// Column subset made of whole blocks, in the given order.
    FeatureMatrix select_blocks(std::span<const std::string> names) const;
    FeatureMatrix select_rows(std::span<const std::size_t> rows) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
    std::vector<BlockSpec> blocks_;
};

struct SampleMeta {
    std::string sample_id;
    std::string source;
    std::string speaker_id;
    std::optional<double> duration_s;
    std::optional<double> snr_db;

    bool operator==(const SampleMeta&) const = default;
};

struct SampleRecord {
    SampleMeta meta;
    std::vector<double> features;
};

/// Sample metadata plus features. Sample ids are unique.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<SampleRecord> records, std::vector<BlockSpec> blocks);
    Dataset(std::vector<SampleMeta> meta, FeatureMatrix features);

    std::size_t size() const noexcept { return meta_.size(); }
    std::size_t dim() const noexcept { return features_.cols(); }
    const std::vector<SampleMeta>& meta() const noexcept { return meta_; }
    const SampleMeta& meta(std::size_t i) const { return meta_[i]; }
    const FeatureMatrix& features() const noexcept { return features_; }
    const std::vector<BlockSpec>& blocks() const noexcept { return features_.blocks(); }

    SampleRecord record(std::size_t i) const;
    std::optional<std::size_t> index_of(std::string_view sample_id) const;

    Dataset subset(std::span<const std::size_t> rows) const;
    Dataset with_features(FeatureMatrix features) const;

    /// Distinct source tags in order of first appearance.
    std::vector<std::string> sources() const;

private:
    void build_index();

    std::vector<SampleMeta> meta_;
    FeatureMatrix features_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct AnnotationRecord {
    std::string sample_id;
    std::string annotator_id;
    double valence = 0.0;
    double arousal = 0.0;

    bool operator==(const AnnotationRecord&) const = default;
};

/// Per-sample consensus scores consumed by the post-hoc analyses.
struct ScoreRecord {
    std::string sample_id;
    double valence = 0.0;
    double arousal = 0.0;
};

// Formatting used by every numeric CSV column: 9 significant digits.
std::string format_real(double v);
std::vector<std::string_view> split_csv(std::string_view line);

// Block config: `name = start:width` per line; '#' starts a comment.
std::vector<BlockSpec> parse_blocks(std::istream& in, const std::string& origin = "<blocks>");
std::vector<BlockSpec> load_blocks(const std::string& path);
void write_blocks(std::ostream& out, std::span<const BlockSpec> blocks);
/// Inline form `name:width,name:width`, laid out left to right.
std::vector<BlockSpec> blocks_from_widths(std::string_view spec);

/// Feature table `sample_id,source,speaker_id,duration_s,snr_db,f_0,...`.
/// With empty `blocks`, D is taken from the header and one block is assumed.
Dataset read_features(std::istream& in, std::span<const BlockSpec> blocks,
                      const std::string& origin = "<features>");
Dataset load_features(const std::string& path, std::span<const BlockSpec> blocks);
void write_features(std::ostream& out, const Dataset& data);

std::vector<AnnotationRecord> read_annotations(std::istream& in, const std::string& origin = "<annotations>");
std::vector<AnnotationRecord> load_annotations(const std::string& path);
void write_annotations(std::ostream& out, std::span<const AnnotationRecord> records);

std::vector<ScoreRecord> read_scores(std::istream& in, const std::string& origin = "<scores>");
std::vector<ScoreRecord> load_scores(const std::string& path);
void write_scores(std::ostream& out, std::span<const ScoreRecord> scores);

/// One id per line.
std::vector<std::string> load_id_list(const std::string& path);

/// Inclusive bounds; a disengaged optional disables that bound.
struct MetadataBounds {
    std::optional<double> min_duration_s;
    std::optional<double> max_duration_s;
    std::optional<double> min_snr_db;
};

/// Keeps records with min_dur <= duration <= max_dur and snr >= min_snr.
/// A record missing a field survives only if every bound on it is disabled.
Dataset filter_metadata(const Dataset& data, const MetadataBounds& bounds);

struct MixtureComponent {
    double weight = 1.0;
    double offset = 0.0;  // mean of every feature column
    double scale = 1.0;   // isotropic feature SD
    double valence = 0.0; // latent label means
    double arousal = 0.0;
};

struct MixtureConfig {
    std::vector<MixtureComponent> components;
    double label_sd = 0.1;
    std::vector<std::string> sources{"LP", "TP", "HP"};
    std::size_t speakers_per_source = 20;
    double speaker_offset_sd = 0.0;
    bool with_metadata = true;

    /// Bulk component plus a far, wide component carrying extreme labels.
    static MixtureConfig extreme_tail(double fraction);
};

struct SyntheticCorpus {
    Dataset data;
    std::vector<std::size_t> component;
    std::vector<double> valence;
    std::vector<double> arousal;
};

/// Deterministic function of (n, blocks, config, seed).
SyntheticCorpus gen_synthetic(std::size_t n, std::span<const BlockSpec> blocks, const MixtureConfig& config,
                              std::uint64_t seed);

struct RatingSimulation {
    std::size_t annotators = 5;
    std::size_t gold_standard = 0; // samples rated by everybody
    double noise_sd = 0.15;
    double bias_sd = 0.1;    // per-annotator offset
    double scale_min = 0.6;  // per-annotator slider usage
    double scale_max = 1.2;
};

struct SimulatedRatings {
    std::vector<AnnotationRecord> records;
    std::vector<std::string> gold_ids;
};

/// Annotators rate noisy versions of the latent labels. The first
/// `gold_standard` samples are rated by all annotators, the rest by one each
/// in round-robin order. Ratings are clamped into [-1, 1].
SimulatedRatings simulate_ratings(const SyntheticCorpus& corpus, const RatingSimulation& sim, std::uint64_t seed);

} // namespace divmine

#endif
