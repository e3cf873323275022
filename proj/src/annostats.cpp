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

#include "divmine/annostats.hpp"

#include "divmine/error.hpp"
#include "divmine/stats.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace divmine {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

NormParams fit_norm(const std::vector<double>& values, const std::string& who, std::string_view dim)
{
    NormParams p;
    std::unordered_set<double> distinct(values.begin(), values.end());
    if (distinct.size() < 2) {
        p.degenerate = true;
        spdlog::warn("annotator '{}' has fewer than two distinct {} ratings; normalized to 0", who, dim);
        return p;
    }
    p.mean = mean(values);
    p.sd = population_sd(values);
    for (double v : values)
        p.max_abs = std::max(p.max_abs, std::abs((v - p.mean) / p.sd));
    return p;
}

double apply_norm(const NormParams& p, double v)
{
    if (p.degenerate)
        return 0.0;
    return ((v - p.mean) / p.sd) / p.max_abs;
}

std::vector<int> labels_of(const GoldMatrix& gold, Dimension dim, double t, std::size_t annotator)
{
    std::vector<int> out(gold.sample_ids.size(), -1);
    for (std::size_t s = 0; s < gold.sample_ids.size(); ++s) {
        const double v = gold.at(dim, annotator, s);
        if (!std::isnan(v))
            out[s] = dim == Dimension::valence ? valence_class(v, t) : arousal_class(v);
    }
    return out;
}

// Kappa on the samples both label lists cover.
double paired_kappa(const std::vector<int>& a, const std::vector<int>& b)
{
    std::vector<int> x, y;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] >= 0 && b[i] >= 0) {
            x.push_back(a[i]);
            y.push_back(b[i]);
        }
    if (x.empty())
        return kNaN;
    return cohens_kappa(x, y);
}

double nan_mean(const std::vector<double>& v)
{
    double s = 0.0;
    std::size_t n = 0;
    for (double x : v)
        if (!std::isnan(x)) {
            s += x;
            ++n;
        }
    return n ? s / static_cast<double>(n) : kNaN;
}

} // namespace

std::string_view dimension_name(Dimension d)
{
    return d == Dimension::valence ? "valence" : "arousal";
}

NormalizedRatings normalize_ratings(std::span<const AnnotationRecord> records)
{
    std::vector<std::string> order;
    std::unordered_map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_annotator;
    for (const auto& r : records) {
        auto [it, fresh] = by_annotator.try_emplace(r.annotator_id);
        if (fresh)
            order.push_back(r.annotator_id);
        it->second.first.push_back(r.valence);
        it->second.second.push_back(r.arousal);
    }
    NormalizedRatings out;
    std::unordered_map<std::string, std::size_t> slot;
    for (const auto& a : order) {
        const auto& [val, aro] = by_annotator.at(a);
        slot[a] = out.annotators.size();
        out.annotators.push_back({a, fit_norm(val, a, "valence"), fit_norm(aro, a, "arousal")});
    }
    out.records.reserve(records.size());
    for (const auto& r : records) {
        const auto& p = out.annotators[slot.at(r.annotator_id)];
        out.records.push_back({r.sample_id, r.annotator_id, apply_norm(p.valence, r.valence),
                               apply_norm(p.arousal, r.arousal)});
    }
    return out;
}

std::vector<ScoreRecord> aggregate_gs(const NormalizedRatings& normalized, std::span<const std::string> gs_ids)
{
    std::unordered_map<std::string, std::size_t> slot;
    for (std::size_t i = 0; i < gs_ids.size(); ++i)
        slot.emplace(gs_ids[i], i);
    std::vector<double> sv(gs_ids.size(), 0.0), sa(gs_ids.size(), 0.0);
    std::vector<std::size_t> count(gs_ids.size(), 0);
    for (const auto& r : normalized.records) {
        const auto it = slot.find(r.sample_id);
        if (it == slot.end())
            continue;
        sv[it->second] += r.valence;
        sa[it->second] += r.arousal;
        ++count[it->second];
    }
    std::string missing;
    std::size_t n_missing = 0;
    for (std::size_t i = 0; i < gs_ids.size(); ++i)
        if (count[i] < 2) {
            if (n_missing++ < 10)
                missing += (missing.empty() ? "" : ", ") + gs_ids[i];
        }
    if (n_missing)
        throw ValidationError(std::to_string(n_missing) + " gold-standard sample(s) have fewer than two ratings: " +
                              missing + (n_missing > 10 ? ", ..." : ""));
    std::vector<ScoreRecord> out;
    for (std::size_t i = 0; i < gs_ids.size(); ++i)
        out.push_back({gs_ids[i], sv[i] / static_cast<double>(count[i]), sa[i] / static_cast<double>(count[i])});
    return out;
}

std::vector<ScoreRecord> consensus_scores(const NormalizedRatings& normalized)
{
    std::vector<ScoreRecord> out;
    std::vector<std::size_t> count;
    std::unordered_map<std::string, std::size_t> slot;
    for (const auto& r : normalized.records) {
        auto [it, fresh] = slot.try_emplace(r.sample_id, out.size());
        if (fresh) {
            out.push_back({r.sample_id, 0.0, 0.0});
            count.push_back(0);
        }
        out[it->second].valence += r.valence;
        out[it->second].arousal += r.arousal;
        ++count[it->second];
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].valence /= static_cast<double>(count[i]);
        out[i].arousal /= static_cast<double>(count[i]);
    }
    return out;
}

int arousal_class(double score)
{
    return score <= 0.0 ? kLow : kHigh;
}

int valence_class(double score, double threshold)
{
    if (score <= -threshold)
        return kNegative;
    if (score > threshold)
        return kPositive;
    return kNeutral;
}

DiscreteLabels discretize(std::span<const double> scores, Dimension dim, double threshold)
{
    if (!(threshold >= 0.0))
        throw ConfigError("valence threshold must be >= 0");
    DiscreteLabels out{dim, threshold, {}};
    out.labels.reserve(scores.size());
    for (double s : scores)
        out.labels.push_back(dim == Dimension::valence ? valence_class(s, threshold) : arousal_class(s));
    return out;
}

std::vector<int> majority_vote(const std::vector<std::vector<int>>& per_annotator, Dimension dim)
{
    if (per_annotator.empty())
        throw ConfigError("majority vote needs at least one annotator");
    const std::size_t n = per_annotator.front().size();
    const int n_classes = dim == Dimension::valence ? 3 : 2;
    const int tie_class = dim == Dimension::valence ? kNeutral : kLow;
    std::vector<int> out(n, tie_class);
    std::vector<int> counts(static_cast<std::size_t>(n_classes));
    for (std::size_t s = 0; s < n; ++s) {
        std::fill(counts.begin(), counts.end(), 0);
        for (const auto& labels : per_annotator) {
            if (labels.size() != n)
                throw ConfigError("annotator label lists differ in length");
            if (labels[s] >= 0 && labels[s] < n_classes)
                ++counts[static_cast<std::size_t>(labels[s])];
        }
        const int top = *std::max_element(counts.begin(), counts.end());
        if (top == 0)
            continue;
        int winners = 0, winner = tie_class;
        for (int c = 0; c < n_classes; ++c)
            if (counts[static_cast<std::size_t>(c)] == top) {
                ++winners;
                winner = c;
            }
        out[s] = winners == 1 ? winner : tie_class;
    }
    return out;
}

double cohens_kappa(std::span<const int> a, std::span<const int> b)
{
    if (a.size() != b.size())
        throw ConfigError("kappa: label lists differ in length (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
    if (a.empty())
        throw ConfigError("kappa needs at least one item");
    std::map<int, std::pair<double, double>> marginals;
    double agree = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        marginals[a[i]].first += 1.0;
        marginals[b[i]].second += 1.0;
        agree += a[i] == b[i];
    }
    const double n = static_cast<double>(a.size());
    const double po = agree / n;
    double pe = 0.0;
    for (const auto& [label, m] : marginals)
        pe += (m.first / n) * (m.second / n);
    if (pe >= 1.0)
        return 1.0;
    return (po - pe) / (1.0 - pe);
}

double spearman(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size())
        throw ConfigError("spearman: inputs differ in length");
    if (x.size() < 2)
        throw ConfigError("spearman needs at least two pairs");
    const auto rx = midranks(x);
    const auto ry = midranks(y);
    const double mx = mean(rx), my = mean(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        spdlog::warn("spearman correlation of a constant input; returning 0");
        return 0.0;
    }
    return sxy / std::sqrt(sxx * syy);
}

GoldMatrix gold_matrix(const NormalizedRatings& normalized, std::span<const std::string> gs_ids)
{
    GoldMatrix g;
    g.sample_ids.assign(gs_ids.begin(), gs_ids.end());
    std::unordered_map<std::string, std::size_t> sample_slot, annotator_slot;
    for (std::size_t i = 0; i < gs_ids.size(); ++i)
        if (!sample_slot.emplace(gs_ids[i], i).second)
            throw ValidationError("gold-standard id '" + gs_ids[i] + "' listed twice");
    for (const auto& r : normalized.records)
        if (sample_slot.contains(r.sample_id) && annotator_slot.try_emplace(r.annotator_id, g.annotators.size()).second)
            g.annotators.push_back(r.annotator_id);
    const std::size_t s = gs_ids.size();
    g.valence.assign(g.annotators.size() * s, kNaN);
    g.arousal.assign(g.annotators.size() * s, kNaN);
    for (const auto& r : normalized.records) {
        const auto it = sample_slot.find(r.sample_id);
        if (it == sample_slot.end())
            continue;
        const std::size_t a = annotator_slot.at(r.annotator_id);
        g.valence[a * s + it->second] = r.valence;
        g.arousal[a * s + it->second] = r.arousal;
    }
    return g;
}

std::vector<double> default_threshold_grid()
{
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i)
        grid.push_back(i * 0.005);
    return grid;
}

double mean_kappa(const GoldMatrix& gold, Dimension dim, double threshold, KappaMode mode)
{
    const std::size_t na = gold.annotators.size();
    if (na < 1)
        throw ValidationError("gold standard has no annotators");
    std::vector<std::vector<int>> labels;
    for (std::size_t a = 0; a < na; ++a)
        labels.push_back(labels_of(gold, dim, threshold, a));
    const auto vote = majority_vote(labels, dim);
    std::vector<double> kappas;
    for (std::size_t a = 0; a < na; ++a)
        kappas.push_back(paired_kappa(labels[a], vote));
    if (mode == KappaMode::all_pairs)
        for (std::size_t a = 0; a < na; ++a)
            for (std::size_t b = a + 1; b < na; ++b)
                kappas.push_back(paired_kappa(labels[a], labels[b]));
    return nan_mean(kappas);
}

ThresholdSearch optimize_valence_threshold(const GoldMatrix& gold, std::span<const double> grid, KappaMode mode)
{
    if (grid.empty())
        throw ConfigError("threshold grid is empty");
    if (gold.annotators.size() < 2)
        throw ValidationError("threshold optimization needs at least two gold-standard annotators");
    for (double t : grid)
        if (!(t >= 0.0))
            throw ConfigError("threshold grid value " + std::to_string(t) + " is negative");
    ThresholdSearch out;
    out.grid.assign(grid.begin(), grid.end());
    out.mean_kappa.resize(grid.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(grid.size()); ++i) {
        const auto t = static_cast<std::size_t>(i);
        out.mean_kappa[t] = mean_kappa(gold, Dimension::valence, grid[t], mode);
    }
    std::size_t best = grid.size();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::isnan(out.mean_kappa[i]))
            continue;
        if (best == grid.size() || out.mean_kappa[i] > out.mean_kappa[best] ||
            (out.mean_kappa[i] == out.mean_kappa[best] && grid[i] < grid[best]))
            best = i;
    }
    if (best == grid.size())
        throw ValidationError("kappa undefined at every grid threshold");
    out.best = grid[best];
    return out;
}

AgreementReport agreement(const GoldMatrix& gold, double threshold)
{
    AgreementReport r;
    r.threshold = threshold;
    const std::size_t na = gold.annotators.size();
    const std::size_t ns = gold.sample_ids.size();
    for (Dimension dim : {Dimension::valence, Dimension::arousal}) {
        std::vector<double> consensus(ns, 0.0);
        for (std::size_t s = 0; s < ns; ++s) {
            double sum = 0.0;
            std::size_t c = 0;
            for (std::size_t a = 0; a < na; ++a) {
                const double v = gold.at(dim, a, s);
                if (!std::isnan(v)) {
                    sum += v;
                    ++c;
                }
            }
            consensus[s] = c ? sum / static_cast<double>(c) : kNaN;
        }
        std::vector<double> rhos;
        for (std::size_t a = 0; a < na; ++a) {
            std::vector<double> x, y;
            for (std::size_t s = 0; s < ns; ++s) {
                const double v = gold.at(dim, a, s);
                if (!std::isnan(v)) {
                    x.push_back(v);
                    y.push_back(consensus[s]);
                }
            }
            rhos.push_back(x.size() >= 2 ? spearman(x, y) : kNaN);
        }
        const double rho = nan_mean(rhos);
        const double kappa = mean_kappa(gold, dim, threshold);
        if (dim == Dimension::valence) {
            r.spearman_valence = rho;
            r.kappa_valence = kappa;
        } else {
            r.spearman_arousal = rho;
            r.kappa_arousal = kappa;
        }
    }
    return r;
}

} // namespace divmine
