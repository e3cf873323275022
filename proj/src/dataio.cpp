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

#include "divmine/dataio.hpp"

#include "divmine/error.hpp"
#include "divmine/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace divmine {

namespace {

const char* const kMetaHeader[] = {"sample_id", "source", "speaker_id", "duration_s", "snr_db"};
constexpr std::size_t kMetaColumns = 5;

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open " + path);
    return in;
}

bool parse_real(std::string_view text, double& out)
{
    text = trim(text);
    if (text.empty())
        return false;
    if (text.front() == '+')
        text.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}

double require_real(std::string_view text, const std::string& origin, std::size_t line, std::string_view column)
{
    double v = 0.0;
    if (!parse_real(text, v) || !std::isfinite(v))
        throw ParseError(origin, line, "column " + std::string(column) + ": not a finite number: '" +
                                           std::string(text) + "'");
    return v;
}

std::optional<double> optional_real(std::string_view text, const std::string& origin, std::size_t line,
                                    std::string_view column)
{
    if (trim(text).empty())
        return std::nullopt;
    return require_real(text, origin, line, column);
}

// Reads the next non-empty, non-comment line. Returns false at EOF.
bool next_line(std::istream& in, std::string& line, std::size_t& lineno)
{
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty() || line.front() == '#')
            continue;
        return true;
    }
    return false;
}

void check_field(std::string_view value, std::string_view what)
{
    if (value.find_first_of(",\n\r") != std::string_view::npos)
        throw ValidationError(std::string(what) + " '" + std::string(value) + "' contains a separator");
}

std::string format_optional(const std::optional<double>& v)
{
    return v ? format_real(*v) : std::string();
}

} // namespace

void validate_blocks(std::span<const BlockSpec> blocks, std::size_t dim)
{
    std::size_t next = 0;
    std::unordered_set<std::string> names;
    for (const auto& b : blocks) {
        if (b.width == 0)
            throw ValidationError("block '" + b.name + "' has zero width");
        if (b.start_col != next)
            throw ValidationError("block '" + b.name + "' starts at column " + std::to_string(b.start_col) +
                                  ", expected " + std::to_string(next));
        if (!names.insert(b.name).second)
            throw ValidationError("duplicate block name '" + b.name + "'");
        next += b.width;
    }
    if (next != dim)
        throw ValidationError("blocks cover " + std::to_string(next) + " columns but D = " + std::to_string(dim));
}

std::size_t total_width(std::span<const BlockSpec> blocks)
{
    std::size_t w = 0;
    for (const auto& b : blocks)
        w += b.width;
    return w;
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                             std::vector<BlockSpec> blocks)
    : rows_(rows), cols_(cols), values_(std::move(values)), blocks_(std::move(blocks))
{
    if (values_.size() != rows_ * cols_)
        throw ValidationError("feature matrix holds " + std::to_string(values_.size()) + " values, expected " +
                              std::to_string(rows_ * cols_));
    if (blocks_.empty() && cols_ > 0)
        blocks_.push_back({"features", 0, cols_});
    validate_blocks(blocks_, cols_);
}

const BlockSpec& FeatureMatrix::block(std::string_view name) const
{
    for (const auto& b : blocks_)
        if (b.name == name)
            return b;
    throw ConfigError("unknown feature block '" + std::string(name) + "'");
}

FeatureMatrix FeatureMatrix::select_blocks(std::span<const std::string> names) const
{
    std::vector<const BlockSpec*> picked;
    std::vector<BlockSpec> layout;
    std::size_t width = 0;
    for (const auto& name : names) {
        const BlockSpec& b = block(name);
        picked.push_back(&b);
        layout.push_back({b.name, width, b.width});
        width += b.width;
    }
    std::vector<double> out;
    out.reserve(rows_ * width);
    for (std::size_t i = 0; i < rows_; ++i) {
        const auto r = row(i);
        for (const BlockSpec* b : picked)
            out.insert(out.end(), r.begin() + b->start_col, r.begin() + b->start_col + b->width);
    }
    return FeatureMatrix(rows_, width, std::move(out), std::move(layout));
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const
{
    std::vector<double> out;
    out.reserve(rows.size() * cols_);
    for (std::size_t i : rows) {
        const auto r = row(i);
        out.insert(out.end(), r.begin(), r.end());
    }
    return FeatureMatrix(rows.size(), cols_, std::move(out), blocks_);
}

Dataset::Dataset(std::vector<SampleRecord> records, std::vector<BlockSpec> blocks)
{
    const std::size_t dim = blocks.empty() ? (records.empty() ? 0 : records.front().features.size())
                                           : total_width(blocks);
    std::vector<double> values;
    values.reserve(records.size() * dim);
    meta_.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto& r = records[i];
        if (r.features.size() != dim)
            throw ValidationError("sample '" + r.meta.sample_id + "' has " + std::to_string(r.features.size()) +
                                  " features, expected " + std::to_string(dim));
        values.insert(values.end(), r.features.begin(), r.features.end());
        meta_.push_back(std::move(r.meta));
    }
    features_ = FeatureMatrix(meta_.size(), dim, std::move(values), std::move(blocks));
    build_index();
}

Dataset::Dataset(std::vector<SampleMeta> meta, FeatureMatrix features)
    : meta_(std::move(meta)), features_(std::move(features))
{
    if (meta_.size() != features_.rows())
        throw ValidationError("metadata rows (" + std::to_string(meta_.size()) + ") != feature rows (" +
                              std::to_string(features_.rows()) + ")");
    build_index();
}

void Dataset::build_index()
{
    index_.clear();
    index_.reserve(meta_.size());
    for (std::size_t i = 0; i < meta_.size(); ++i) {
        if (!index_.emplace(meta_[i].sample_id, i).second)
            throw ValidationError("duplicate sample_id '" + meta_[i].sample_id + "'");
    }
}

SampleRecord Dataset::record(std::size_t i) const
{
    const auto r = features_.row(i);
    return {meta_[i], std::vector<double>(r.begin(), r.end())};
}

std::optional<std::size_t> Dataset::index_of(std::string_view sample_id) const
{
    const auto it = index_.find(std::string(sample_id));
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const
{
    std::vector<SampleMeta> meta;
    meta.reserve(rows.size());
    for (std::size_t i : rows)
        meta.push_back(meta_[i]);
    return Dataset(std::move(meta), features_.select_rows(rows));
}

Dataset Dataset::with_features(FeatureMatrix features) const
{
    return Dataset(meta_, std::move(features));
}

std::vector<std::string> Dataset::sources() const
{
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& m : meta_)
        if (seen.insert(m.source).second)
            out.push_back(m.source);
    return out;
}

std::string format_real(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::vector<std::string_view> split_csv(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::vector<BlockSpec> parse_blocks(std::istream& in, const std::string& origin)
{
    std::vector<BlockSpec> blocks;
    std::string line;
    std::size_t lineno = 0;
    while (next_line(in, line, lineno)) {
        const std::string_view body = trim(std::string_view(line).substr(0, line.find('#')));
        const auto eq = body.find('=');
        const auto colon = body.find(':', eq == std::string_view::npos ? 0 : eq);
        if (eq == std::string_view::npos || colon == std::string_view::npos)
            throw ParseError(origin, lineno, "expected 'name = start:width'");
        BlockSpec b;
        b.name = std::string(trim(body.substr(0, eq)));
        const auto start = trim(body.substr(eq + 1, colon - eq - 1));
        const auto width = trim(body.substr(colon + 1));
        if (b.name.empty())
            throw ParseError(origin, lineno, "empty block name");
        auto r1 = std::from_chars(start.data(), start.data() + start.size(), b.start_col);
        auto r2 = std::from_chars(width.data(), width.data() + width.size(), b.width);
        if (r1.ec != std::errc() || r1.ptr != start.data() + start.size() || r2.ec != std::errc() ||
            r2.ptr != width.data() + width.size())
            throw ParseError(origin, lineno, "bad start:width '" + std::string(body.substr(eq + 1)) + "'");
        blocks.push_back(std::move(b));
    }
    validate_blocks(blocks, total_width(blocks));
    return blocks;
}

std::vector<BlockSpec> load_blocks(const std::string& path)
{
    auto in = open_input(path);
    return parse_blocks(in, path);
}

void write_blocks(std::ostream& out, std::span<const BlockSpec> blocks)
{
    for (const auto& b : blocks)
        out << b.name << " = " << b.start_col << ':' << b.width << '\n';
}

std::vector<BlockSpec> blocks_from_widths(std::string_view spec)
{
    std::vector<BlockSpec> blocks;
    std::size_t col = 0;
    for (auto part : split_csv(spec)) {
        part = trim(part);
        const auto colon = part.find(':');
        if (colon == std::string_view::npos)
            throw ConfigError("block '" + std::string(part) + "' must be name:width");
        std::size_t width = 0;
        const auto w = trim(part.substr(colon + 1));
        const auto r = std::from_chars(w.data(), w.data() + w.size(), width);
        if (r.ec != std::errc() || r.ptr != w.data() + w.size() || width == 0)
            throw ConfigError("bad block width in '" + std::string(part) + "'");
        blocks.push_back({std::string(trim(part.substr(0, colon))), col, width});
        col += width;
    }
    validate_blocks(blocks, col);
    return blocks;
}

Dataset read_features(std::istream& in, std::span<const BlockSpec> blocks, const std::string& origin)
{
    std::string line;
    std::size_t lineno = 0;
    if (!next_line(in, line, lineno))
        throw ParseError(origin, lineno, "missing header");
    const auto header = split_csv(line);
    if (header.size() < kMetaColumns)
        throw ParseError(origin, lineno, "header has too few columns");
    for (std::size_t c = 0; c < kMetaColumns; ++c)
        if (trim(header[c]) != kMetaHeader[c])
            throw ParseError(origin, lineno, "header column " + std::to_string(c) + " must be '" + kMetaHeader[c] + "'");
    const std::size_t dim = header.size() - kMetaColumns;
    for (std::size_t j = 0; j < dim; ++j)
        if (trim(header[kMetaColumns + j]) != "f_" + std::to_string(j))
            throw ParseError(origin, lineno, "header column " + std::to_string(kMetaColumns + j) + " must be 'f_" +
                                                 std::to_string(j) + "'");
    std::vector<BlockSpec> layout(blocks.begin(), blocks.end());
    if (!layout.empty() && total_width(layout) != dim)
        throw ParseError(origin, lineno, "header declares D = " + std::to_string(dim) + " but blocks cover " +
                                             std::to_string(total_width(layout)) + " columns");

    std::vector<SampleMeta> meta;
    std::vector<double> values;
    std::unordered_set<std::string> ids;
    while (next_line(in, line, lineno)) {
        const auto fields = split_csv(line);
        if (fields.size() != header.size())
            throw ParseError(origin, lineno, "row has " + std::to_string(fields.size() - std::min(fields.size(), kMetaColumns)) +
                                                 " feature values, expected " + std::to_string(dim));
        SampleMeta m;
        m.sample_id = std::string(trim(fields[0]));
        if (m.sample_id.empty())
            throw ParseError(origin, lineno, "empty sample_id");
        if (!ids.insert(m.sample_id).second)
            throw ParseError(origin, lineno, "duplicate sample_id '" + m.sample_id + "'");
        m.source = std::string(trim(fields[1]));
        m.speaker_id = std::string(trim(fields[2]));
        m.duration_s = optional_real(fields[3], origin, lineno, "duration_s");
        m.snr_db = optional_real(fields[4], origin, lineno, "snr_db");
        if (m.duration_s && *m.duration_s < 0.0)
            throw ParseError(origin, lineno, "negative duration");
        for (std::size_t j = 0; j < dim; ++j)
            values.push_back(require_real(fields[kMetaColumns + j], origin, lineno, header[kMetaColumns + j]));
        meta.push_back(std::move(m));
    }
    const std::size_t rows = meta.size();
    return Dataset(std::move(meta), FeatureMatrix(rows, dim, std::move(values), std::move(layout)));
}

Dataset load_features(const std::string& path, std::span<const BlockSpec> blocks)
{
    auto in = open_input(path);
    return read_features(in, blocks, path);
}

void write_features(std::ostream& out, const Dataset& data)
{
    for (std::size_t c = 0; c < kMetaColumns; ++c)
        out << (c ? "," : "") << kMetaHeader[c];
    for (std::size_t j = 0; j < data.dim(); ++j)
        out << ",f_" << j;
    out << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& m = data.meta(i);
        check_field(m.sample_id, "sample_id");
        check_field(m.source, "source");
        check_field(m.speaker_id, "speaker_id");
        out << m.sample_id << ',' << m.source << ',' << m.speaker_id << ',' << format_optional(m.duration_s) << ','
            << format_optional(m.snr_db);
        for (double v : data.features().row(i))
            out << ',' << format_real(v);
        out << '\n';
    }
}

std::vector<AnnotationRecord> read_annotations(std::istream& in, const std::string& origin)
{
    std::string line;
    std::size_t lineno = 0;
    if (!next_line(in, line, lineno))
        throw ParseError(origin, lineno, "missing header");
    const auto header = split_csv(line);
    if (header.size() != 4 || trim(header[0]) != "sample_id" || trim(header[1]) != "annotator_id" ||
        trim(header[2]) != "valence" || trim(header[3]) != "arousal")
        throw ParseError(origin, lineno, "header must be 'sample_id,annotator_id,valence,arousal'");

    std::vector<AnnotationRecord> out;
    while (next_line(in, line, lineno)) {
        const auto f = split_csv(line);
        if (f.size() != 4)
            throw ParseError(origin, lineno, "expected 4 fields");
        AnnotationRecord r;
        r.sample_id = std::string(trim(f[0]));
        r.annotator_id = std::string(trim(f[1]));
        r.valence = require_real(f[2], origin, lineno, "valence");
        r.arousal = require_real(f[3], origin, lineno, "arousal");
        if (r.valence < -1.0 || r.valence > 1.0 || r.arousal < -1.0 || r.arousal > 1.0)
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": rating outside [-1, 1]");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<AnnotationRecord> load_annotations(const std::string& path)
{
    auto in = open_input(path);
    return read_annotations(in, path);
}

void write_annotations(std::ostream& out, std::span<const AnnotationRecord> records)
{
    out << "sample_id,annotator_id,valence,arousal\n";
    for (const auto& r : records)
        out << r.sample_id << ',' << r.annotator_id << ',' << format_real(r.valence) << ',' << format_real(r.arousal)
            << '\n';
}

std::vector<ScoreRecord> read_scores(std::istream& in, const std::string& origin)
{
    std::string line;
    std::size_t lineno = 0;
    if (!next_line(in, line, lineno))
        throw ParseError(origin, lineno, "missing header");
    const auto header = split_csv(line);
    if (header.size() != 3 || trim(header[0]) != "sample_id" || trim(header[1]) != "valence" ||
        trim(header[2]) != "arousal")
        throw ParseError(origin, lineno, "header must be 'sample_id,valence,arousal'");
    std::vector<ScoreRecord> out;
    while (next_line(in, line, lineno)) {
        const auto f = split_csv(line);
        if (f.size() != 3)
            throw ParseError(origin, lineno, "expected 3 fields");
        out.push_back({std::string(trim(f[0])), require_real(f[1], origin, lineno, "valence"),
                       require_real(f[2], origin, lineno, "arousal")});
    }
    return out;
}

std::vector<ScoreRecord> load_scores(const std::string& path)
{
    auto in = open_input(path);
    return read_scores(in, path);
}

void write_scores(std::ostream& out, std::span<const ScoreRecord> scores)
{
    out << "sample_id,valence,arousal\n";
    for (const auto& s : scores)
        out << s.sample_id << ',' << format_real(s.valence) << ',' << format_real(s.arousal) << '\n';
}

std::vector<std::string> load_id_list(const std::string& path)
{
    auto in = open_input(path);
    std::vector<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (next_line(in, line, lineno))
        ids.emplace_back(trim(line));
    return ids;
}

Dataset filter_metadata(const Dataset& data, const MetadataBounds& bounds)
{
    if (bounds.min_duration_s && bounds.max_duration_s && *bounds.min_duration_s > *bounds.max_duration_s)
        throw ConfigError("min duration " + format_real(*bounds.min_duration_s) + " exceeds max duration " +
                          format_real(*bounds.max_duration_s));
    const bool need_duration = bounds.min_duration_s || bounds.max_duration_s;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& m = data.meta(i);
        if (need_duration) {
            if (!m.duration_s)
                continue;
            if (bounds.min_duration_s && *m.duration_s < *bounds.min_duration_s)
                continue;
            if (bounds.max_duration_s && *m.duration_s > *bounds.max_duration_s)
                continue;
        }
        if (bounds.min_snr_db && (!m.snr_db || *m.snr_db < *bounds.min_snr_db))
            continue;
        keep.push_back(i);
    }
    return data.subset(keep);
}

MixtureConfig MixtureConfig::extreme_tail(double fraction)
{
    MixtureConfig c;
    c.components = {
        {1.0 - fraction, 0.0, 1.0, 0.0, 0.0},
        {fraction, 4.0, 2.0, 0.85, 0.85},
    };
    c.label_sd = 0.15;
    return c;
}

SyntheticCorpus gen_synthetic(std::size_t n, std::span<const BlockSpec> blocks, const MixtureConfig& config,
                              std::uint64_t seed)
{
    if (config.components.empty())
        throw ConfigError("mixture has zero components");
    if (config.sources.empty())
        throw ConfigError("mixture has no sources");
    double total_weight = 0.0;
    for (const auto& c : config.components) {
        if (!(c.weight >= 0.0) || !(c.scale >= 0.0))
            throw ConfigError("mixture weights and scales must be nonnegative");
        total_weight += c.weight;
    }
    if (!(total_weight > 0.0))
        throw ConfigError("mixture weights sum to zero");
    const std::size_t dim = total_width(blocks);
    if (dim == 0)
        throw ConfigError("synthetic corpus needs at least one feature column");

    Rng rng(seed);
    const std::size_t n_speakers = std::max<std::size_t>(1, config.speakers_per_source);
    std::vector<double> speaker_offset(config.sources.size() * n_speakers * dim, 0.0);
    if (config.speaker_offset_sd > 0.0)
        for (double& v : speaker_offset)
            v = config.speaker_offset_sd * rng.normal();

    SyntheticCorpus out;
    std::vector<SampleMeta> meta;
    std::vector<double> values;
    meta.reserve(n);
    values.reserve(n * dim);
    out.component.reserve(n);
    out.valence.reserve(n);
    out.arousal.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double u = rng.uniform() * total_weight;
        std::size_t comp = 0;
        while (comp + 1 < config.components.size() && u >= config.components[comp].weight) {
            u -= config.components[comp].weight;
            ++comp;
        }
        const auto& c = config.components[comp];
        const std::size_t src = rng.index(config.sources.size());
        const std::size_t spk = rng.index(n_speakers);

        SampleMeta m;
        char id[32];
        std::snprintf(id, sizeof id, "s%06zu", i);
        m.sample_id = id;
        m.source = config.sources[src];
        m.speaker_id = config.sources[src] + "_spk" + std::to_string(spk);
        if (config.with_metadata) {
            m.duration_s = 0.5 + 24.5 * rng.uniform();
            m.snr_db = 25.0 + 8.0 * rng.normal();
        }
        const double* off = speaker_offset.data() + (src * n_speakers + spk) * dim;
        for (std::size_t j = 0; j < dim; ++j)
            values.push_back(c.offset + c.scale * rng.normal() + off[j]);
        out.valence.push_back(std::clamp(c.valence + config.label_sd * rng.normal(), -1.0, 1.0));
        out.arousal.push_back(std::clamp(c.arousal + config.label_sd * rng.normal(), -1.0, 1.0));
        out.component.push_back(comp);
        meta.push_back(std::move(m));
    }
    out.data = Dataset(std::move(meta),
                       FeatureMatrix(n, dim, std::move(values), std::vector<BlockSpec>(blocks.begin(), blocks.end())));
    return out;
}

SimulatedRatings simulate_ratings(const SyntheticCorpus& corpus, const RatingSimulation& sim, std::uint64_t seed)
{
    if (sim.annotators == 0)
        throw ConfigError("rating simulation needs at least one annotator");
    const std::size_t n = corpus.data.size();
    if (sim.gold_standard > n)
        throw ConfigError("gold-standard size exceeds corpus size");
    Rng rng(seed);
    struct Rater {
        double bias_v, bias_a, scale_v, scale_a;
    };
    std::vector<Rater> raters;
    for (std::size_t a = 0; a < sim.annotators; ++a) {
        const double span = sim.scale_max - sim.scale_min;
        raters.push_back({sim.bias_sd * rng.normal(), sim.bias_sd * rng.normal(), sim.scale_min + span * rng.uniform(),
                          sim.scale_min + span * rng.uniform()});
    }
    auto rate = [&](std::size_t i, std::size_t a) {
        const auto& r = raters[a];
        AnnotationRecord rec;
        rec.sample_id = corpus.data.meta(i).sample_id;
        rec.annotator_id = "ann" + std::to_string(a + 1);
        rec.valence = std::clamp(r.bias_v + r.scale_v * corpus.valence[i] + sim.noise_sd * rng.normal(), -1.0, 1.0);
        rec.arousal = std::clamp(r.bias_a + r.scale_a * corpus.arousal[i] + sim.noise_sd * rng.normal(), -1.0, 1.0);
        return rec;
    };
    SimulatedRatings out;
    for (std::size_t i = 0; i < sim.gold_standard; ++i) {
        out.gold_ids.push_back(corpus.data.meta(i).sample_id);
        for (std::size_t a = 0; a < sim.annotators; ++a)
            out.records.push_back(rate(i, a));
    }
    for (std::size_t i = sim.gold_standard; i < n; ++i)
        out.records.push_back(rate(i, (i - sim.gold_standard) % sim.annotators));
    return out;
}

} // namespace divmine
