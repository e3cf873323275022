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

#include "divmine/posthoc.hpp"

#include "divmine/error.hpp"
#include "divmine/rng.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

namespace divmine {

namespace {

double sample_sd(const std::vector<double>& v)
{
    if (v.size() < 2)
        return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v)
        ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double subset_sd(std::span<const double> scores, const std::vector<std::size_t>& idx)
{
    std::vector<double> v;
    v.reserve(idx.size());
    for (std::size_t i : idx)
        v.push_back(scores[i]);
    return population_sd(v);
}

std::size_t parse_count(std::string_view s, const std::string& origin, std::size_t line)
{
    std::size_t v = 0;
    try {
        std::size_t used = 0;
        const std::string str(s);
        const long long x = std::stoll(str, &used);
        if (used != str.size() || x < 0)
            throw std::invalid_argument("bad");
        v = static_cast<std::size_t>(x);
    } catch (const std::exception&) {
        throw ParseError(origin, line, "expected a non-negative integer, got '" + std::string(s) + "'");
    }
    return v;
}

} // namespace

std::string_view strategy_name(Strategy s)
{
    switch (s) {
    case Strategy::random: return "random";
    case Strategy::faft: return "faft";
    case Strategy::faft_kmedoids: return "faft_kmedoids";
    case Strategy::clara: return "clara";
    }
    return "?";
}

Strategy parse_strategy(std::string_view name)
{
    for (Strategy s : kAllStrategies)
        if (strategy_name(s) == name)
            return s;
    throw ConfigError("unknown strategy '" + std::string(name) + "' (random, faft, faft_kmedoids, clara)");
}

std::size_t default_runs(Strategy s)
{
    return s == Strategy::random ? 100 : 5;
}

std::vector<std::size_t> log_spaced_sizes(std::size_t lo, std::size_t hi, std::size_t count)
{
    if (lo < 1 || hi < lo || count < 1)
        throw ConfigError("log-spaced sizes need 1 <= lo <= hi and count >= 1");
    std::vector<std::size_t> out;
    if (count == 1 || lo == hi)
        return {hi};
    const double a = std::log(static_cast<double>(lo)), b = std::log(static_cast<double>(hi));
    for (std::size_t i = 0; i < count; ++i) {
        const double x = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
        const auto v = static_cast<std::size_t>(std::llround(x));
        if (out.empty() || v > out.back())
            out.push_back(v);
    }
    out.back() = hi;
    return out;
}

std::vector<std::size_t> default_diversity_sizes()
{
    return log_spaced_sizes(10, 1500, 12);
}

std::vector<std::vector<std::size_t>> diversity_selections(const FeatureMatrix& features, const DiversitySpec& spec,
                                                           std::size_t run, const Distances* shared)
{
    const std::size_t n = features.rows();
    if (spec.sizes.empty())
        throw ConfigError("diversity: no sample sizes given");
    for (std::size_t m : spec.sizes) {
        if (m < 1)
            throw ConfigError("diversity: sample size must be >= 1");
        if (m > n)
            throw ConfigError("diversity: sample size " + std::to_string(m) + " exceeds n = " + std::to_string(n));
    }
    std::vector<std::size_t> sizes = spec.sizes;
    std::sort(sizes.begin(), sizes.end());
    const std::size_t largest = sizes.back();
    const std::uint64_t seed = derive_seed(spec.seed, "diversity",
                                           std::string(strategy_name(spec.strategy)) + ":" + std::to_string(run));

    std::vector<std::vector<std::size_t>> out;
    switch (spec.strategy) {
    case Strategy::random:
    case Strategy::faft: {
        const auto order = spec.strategy == Strategy::random ? Rng(seed).sample_without_replacement(n, largest)
                                                             : faft(features, largest, spec.metric, seed);
        for (std::size_t m : sizes)
            out.emplace_back(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
        break;
    }
    case Strategy::faft_kmedoids: {
        std::optional<Distances> own;
        if (!shared)
            own.emplace(features, spec.metric, spec.pairwise_cap);
        const Distances& d = shared ? *shared : *own;
        for (std::size_t m : sizes) {
            ClusteringConfig cfg;
            cfg.k = m;
            cfg.metric = spec.metric;
            cfg.init = Init::faft;
            cfg.max_iter = spec.max_iter;
            cfg.seed = seed;
            cfg.pairwise_cap = spec.pairwise_cap;
            out.push_back(kmedoids(d, cfg).medoids);
        }
        break;
    }
    case Strategy::clara:
        for (std::size_t m : sizes) {
            ClusteringConfig cfg;
            cfg.k = m;
            cfg.metric = spec.metric;
            cfg.init = spec.clara_init;
            cfg.max_iter = spec.max_iter;
            cfg.seed = derive_seed(seed, m);
            cfg.pairwise_cap = spec.pairwise_cap;
            out.push_back(clara(features, cfg).medoids);
        }
        break;
    }
    return out;
}

std::vector<DiversityCurve> diversity_curves(const FeatureMatrix& features, std::span<const ScoreRecord> scores,
                                             const DiversitySpec& spec)
{
    if (scores.size() != features.rows())
        throw ValidationError("diversity: " + std::to_string(scores.size()) + " scores for " +
                              std::to_string(features.rows()) + " samples");
    const std::size_t runs = spec.runs ? spec.runs : default_runs(spec.strategy);
    std::vector<double> val, aro;
    for (const auto& s : scores) {
        val.push_back(s.valence);
        aro.push_back(s.arousal);
    }
    std::vector<std::size_t> sizes = spec.sizes;
    std::sort(sizes.begin(), sizes.end());

    std::optional<Distances> shared;
    if (spec.strategy == Strategy::faft_kmedoids && !sizes.empty() && sizes.back() <= features.rows())
        shared.emplace(features, spec.metric, spec.pairwise_cap);

    // [run][point]
    std::vector<std::vector<double>> sd_val(runs), sd_aro(runs);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(runs); ++r) {
        try {
            const auto run = static_cast<std::size_t>(r);
            const auto sel = diversity_selections(features, spec, run, shared ? &*shared : nullptr);
            for (const auto& idx : sel) {
                sd_val[run].push_back(subset_sd(val, idx));
                sd_aro[run].push_back(subset_sd(aro, idx));
            }
        } catch (...) {
#pragma omp critical(divmine_diversity_failure)
            if (!failure)
                failure = std::current_exception();
        }
    }
    if (failure)
        std::rethrow_exception(failure);

    std::vector<DiversityCurve> out;
    for (Dimension dim : {Dimension::valence, Dimension::arousal}) {
        const auto& sd = dim == Dimension::valence ? sd_val : sd_aro;
        DiversityCurve c;
        c.strategy = spec.strategy;
        c.feature_set = spec.feature_set;
        c.dimension = dim;
        c.runs = runs;
        for (std::size_t p = 0; p < sizes.size(); ++p) {
            std::vector<double> v(runs);
            for (std::size_t r = 0; r < runs; ++r)
                v[r] = sd[r][p];
            c.points.push_back({sizes[p], mean(v), sample_sd(v) / std::sqrt(static_cast<double>(runs))});
            c.run_sd.push_back(std::move(v));
        }
        out.push_back(std::move(c));
    }
    return out;
}

DiversityCurve diversity_curve(const FeatureMatrix& features, std::span<const double> scores,
                               const DiversitySpec& spec, Dimension dim)
{
    std::vector<ScoreRecord> records(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        (dim == Dimension::valence ? records[i].valence : records[i].arousal) = scores[i];
    auto curves = diversity_curves(features, records, spec);
    return std::move(curves[dim == Dimension::valence ? 0 : 1]);
}

Purity purity(std::span<const std::size_t> assignment, std::span<const int> labels)
{
    if (assignment.size() != labels.size())
        throw ConfigError("purity: " + std::to_string(assignment.size()) + " assignments for " +
                          std::to_string(labels.size()) + " labels");
    std::map<std::size_t, std::map<int, std::size_t>> counts;
    for (std::size_t i = 0; i < assignment.size(); ++i)
        ++counts[assignment[i]][labels[i]];
    Purity out;
    double sum = 0.0;
    std::size_t used = 0;
    for (const auto& [cluster, by_label] : counts) {
        std::size_t size = 0, top = 0;
        for (const auto& [label, c] : by_label) {
            size += c;
            top = std::max(top, c);
        }
        if (size < 2) {
            ++out.n_excluded;
            continue;
        }
        sum += static_cast<double>(top) / static_cast<double>(size);
        ++used;
    }
    if (used == 0)
        throw ValidationError("purity: every cluster is a singleton");
    out.purity = sum / static_cast<double>(used);
    return out;
}

std::string Variant::name() const
{
    switch (algorithm) {
    case Algorithm::kmeans:
    case Algorithm::bisecting: return std::string(algorithm_name(algorithm));
    case Algorithm::agglomerative: return "agglomerative-" + std::string(metric_name(metric));
    default:
        return std::string(algorithm_name(algorithm)) + "-" + std::string(metric_name(metric)) + "-" +
               std::string(init_name(init));
    }
}

std::vector<Variant> standard_variants()
{
    std::vector<Variant> v;
    v.push_back({0, Algorithm::kmeans, Metric::euclidean, Init::kpp});
    v.push_back({0, Algorithm::bisecting, Metric::euclidean, Init::kpp});
    for (Metric m : {Metric::euclidean, Metric::manhattan, Metric::cosine, Metric::chebyshev})
        v.push_back({0, Algorithm::agglomerative, m, Init::heuristic});
    for (Metric m : {Metric::euclidean, Metric::manhattan, Metric::cosine, Metric::chebyshev, Metric::pearson})
        for (Init i : {Init::heuristic, Init::kpp})
            v.push_back({0, Algorithm::clara, m, i});
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i].id = i + 1;
    return v;
}

std::vector<FeatureSet> standard_feature_sets(std::span<const BlockSpec> blocks)
{
    std::vector<FeatureSet> out;
    FeatureSet all{"all", {}};
    for (const auto& b : blocks) {
        out.push_back({b.name, {b.name}});
        all.blocks.push_back(b.name);
    }
    if (blocks.size() > 1)
        out.push_back(std::move(all));
    return out;
}

std::vector<std::size_t> standard_k_values()
{
    std::vector<std::size_t> k;
    for (std::size_t v = 50; v <= 250; v += 10)
        k.push_back(v);
    for (std::size_t v : {500, 750, 1000, 1500})
        k.push_back(v);
    return k;
}

std::string GridCell::key(const GridSpec& spec) const
{
    return spec.variants[variant].name() + "|" + spec.feature_sets[feature_set].name + "|k" + std::to_string(k) +
           "|r" + std::to_string(rep);
}

std::vector<GridCell> enumerate_cells(const GridSpec& spec)
{
    std::vector<GridCell> cells;
    cells.reserve(spec.variants.size() * spec.feature_sets.size() * spec.k_values.size() * spec.reps);
    for (std::size_t v = 0; v < spec.variants.size(); ++v)
        for (std::size_t f = 0; f < spec.feature_sets.size(); ++f)
            for (std::size_t k : spec.k_values)
                for (std::size_t r = 0; r < spec.reps; ++r)
                    cells.push_back({v, f, k, r});
    return cells;
}

std::uint64_t cell_seed(const GridSpec& spec, const GridCell& cell)
{
    return derive_seed(spec.seed, "purity", cell.key(spec));
}

GridResult purity_grid(const Dataset& data, std::span<const ScoreRecord> scores, const GridSpec& spec)
{
    if (scores.size() != data.size())
        throw ValidationError("purity grid: " + std::to_string(scores.size()) + " scores for " +
                              std::to_string(data.size()) + " samples");
    std::vector<double> val, aro;
    for (const auto& s : scores) {
        val.push_back(s.valence);
        aro.push_back(s.arousal);
    }
    const auto val_labels = discretize(val, Dimension::valence, spec.valence_threshold).labels;
    const auto aro_labels = discretize(aro, Dimension::arousal).labels;

    std::vector<FeatureMatrix> matrices;
    for (const auto& fs : spec.feature_sets)
        matrices.push_back(data.features().select_blocks(fs.blocks));

    const auto cells = enumerate_cells(spec);
    GridResult out;
    out.cells = cells.size();
    out.rows.resize(2 * cells.size());
    std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(cells.size()); ++c) {
        const GridCell& cell = cells[static_cast<std::size_t>(c)];
        const Variant& variant = spec.variants[cell.variant];
        PurityResult base;
        base.variant = variant.name();
        base.variant_id = variant.id;
        base.feature_set = spec.feature_sets[cell.feature_set].name;
        base.k = cell.k;
        base.rep = cell.rep;
        PurityResult rv = base, ra = base;
        rv.dimension = Dimension::valence;
        ra.dimension = Dimension::arousal;
        try {
            try {
                ClusteringConfig cfg;
                cfg.k = cell.k;
                cfg.metric = variant.metric;
                cfg.init = variant.init;
                cfg.max_iter = spec.max_iter;
                cfg.seed = cell_seed(spec, cell);
                cfg.pairwise_cap = spec.pairwise_cap;
                const auto result = run_clustering(variant.algorithm, matrices[cell.feature_set], cfg);
                const auto pv = purity(result.assignment, val_labels);
                const auto pa = purity(result.assignment, aro_labels);
                rv.purity = pv.purity;
                rv.n_excluded = pv.n_excluded;
                ra.purity = pa.purity;
                ra.n_excluded = pa.n_excluded;
            } catch (const Error& e) {
                rv.ok = ra.ok = false;
                rv.error = ra.error = e.what();
            }
        } catch (...) {
#pragma omp critical(divmine_grid_failure)
            if (!failure)
                failure = std::current_exception();
        }
        out.rows[2 * static_cast<std::size_t>(c)] = std::move(rv);
        out.rows[2 * static_cast<std::size_t>(c) + 1] = std::move(ra);
    }
    if (failure)
        std::rethrow_exception(failure);
    for (std::size_t c = 0; c < cells.size(); ++c)
        if (!out.rows[2 * c].ok) {
            ++out.failed_cells;
            spdlog::warn("grid cell {} failed: {}", cells[c].key(spec), out.rows[2 * c].error);
        }
    return out;
}

std::string_view group_by_name(GroupBy g)
{
    switch (g) {
    case GroupBy::variant: return "variant";
    case GroupBy::algorithm: return "algorithm";
    case GroupBy::metric: return "metric";
    case GroupBy::init: return "init";
    case GroupBy::feature_set: return "feature_set";
    }
    return "?";
}

GroupBy parse_group_by(std::string_view name)
{
    for (GroupBy g : {GroupBy::variant, GroupBy::algorithm, GroupBy::metric, GroupBy::init, GroupBy::feature_set})
        if (group_by_name(g) == name)
            return g;
    throw ConfigError("unknown grouping '" + std::string(name) + "' (variant, algorithm, metric, init, feature_set)");
}

std::string group_key(const PurityResult& r, GroupBy g)
{
    if (g == GroupBy::variant)
        return r.variant;
    if (g == GroupBy::feature_set)
        return r.feature_set;
    // Variant names are algo[-metric[-init]].
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto dash = r.variant.find('-', start);
        parts.push_back(r.variant.substr(start, dash - start));
        if (dash == std::string::npos)
            break;
        start = dash + 1;
    }
    switch (g) {
    case GroupBy::algorithm: return parts[0];
    case GroupBy::metric: return parts.size() > 1 ? parts[1] : "euclidean";
    case GroupBy::init: return parts.size() > 2 ? parts[2] : "none";
    default: return r.variant;
    }
}

std::vector<Comparison> compare_variants(std::span<const PurityResult> results, GroupBy group_by,
                                         std::optional<Dimension> dimension, MwuMode mode)
{
    std::map<std::string, std::vector<double>> groups;
    for (const auto& r : results) {
        if (!r.ok || (dimension && r.dimension != *dimension))
            continue;
        groups[group_key(r, group_by)].push_back(r.purity);
    }
    for (auto it = groups.begin(); it != groups.end();) {
        if (it->second.size() < 2) {
            spdlog::warn("group '{}' has fewer than two results; excluded", it->first);
            it = groups.erase(it);
        } else {
            ++it;
        }
    }
    if (groups.size() < 2)
        throw ValidationError("comparison needs at least two groups with two or more results each");
    std::vector<Comparison> out;
    for (auto a = groups.begin(); a != groups.end(); ++a)
        for (auto b = std::next(a); b != groups.end(); ++b) {
            const auto t = mann_whitney_u(a->second, b->second, mode);
            out.push_back({a->first, b->first, a->second.size(), b->second.size(), t.u_x, t.p, median(a->second),
                           median(b->second)});
        }
    return out;
}

std::vector<LeveneComparison> compare_variances(std::span<const ScoreRecord> mined, std::span<const ScoreRecord> random,
                                                LeveneCenter center)
{
    std::vector<LeveneComparison> out;
    for (Dimension dim : {Dimension::valence, Dimension::arousal}) {
        std::vector<double> a, b;
        for (const auto& s : mined)
            a.push_back(dim == Dimension::valence ? s.valence : s.arousal);
        for (const auto& s : random)
            b.push_back(dim == Dimension::valence ? s.valence : s.arousal);
        LeveneComparison c;
        c.dimension = dim;
        c.n_mined = a.size();
        c.n_random = b.size();
        c.test = levene({a, b}, center);
        c.sd_mined = population_sd(a);
        c.sd_random = population_sd(b);
        out.push_back(c);
    }
    return out;
}

void write_curves(std::ostream& out, std::span<const DiversityCurve> curves)
{
    out << "strategy,feature_set,dimension,n_samples,sd_mean,sd_stderr,runs\n";
    for (const auto& c : curves)
        for (const auto& p : c.points)
            out << strategy_name(c.strategy) << ',' << c.feature_set << ',' << dimension_name(c.dimension) << ','
                << p.n_samples << ',' << format_real(p.sd_mean) << ',' << format_real(p.sd_stderr) << ',' << c.runs
                << '\n';
}

void write_purity(std::ostream& out, std::span<const PurityResult> rows)
{
    out << "variant,feature_set,k,rep,dimension,purity,n_excluded,variant_id,status\n";
    for (const auto& r : rows) {
        out << r.variant << ',' << r.feature_set << ',' << r.k << ',' << r.rep << ',' << dimension_name(r.dimension)
            << ',';
        if (r.ok)
            out << format_real(r.purity) << ',' << r.n_excluded;
        else
            out << ',';
        out << ',' << r.variant_id << ',' << (r.ok ? "ok" : "failed") << '\n';
    }
}

std::vector<PurityResult> read_purity(std::istream& in, const std::string& origin)
{
    std::vector<PurityResult> rows;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        if (!header) {
            if (line.rfind("variant,feature_set,k,rep,dimension,purity,n_excluded", 0) != 0)
                throw ParseError(origin, lineno, "unexpected purity header");
            header = true;
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 9)
            throw ParseError(origin, lineno, "expected 9 fields, got " + std::to_string(f.size()));
        PurityResult r;
        r.variant = std::string(f[0]);
        r.feature_set = std::string(f[1]);
        r.k = parse_count(f[2], origin, lineno);
        r.rep = parse_count(f[3], origin, lineno);
        if (f[4] == "valence")
            r.dimension = Dimension::valence;
        else if (f[4] == "arousal")
            r.dimension = Dimension::arousal;
        else
            throw ParseError(origin, lineno, "unknown dimension '" + std::string(f[4]) + "'");
        r.variant_id = parse_count(f[7], origin, lineno);
        r.ok = f[8] == "ok";
        if (r.ok) {
            try {
                r.purity = std::stod(std::string(f[5]));
            } catch (const std::exception&) {
                throw ParseError(origin, lineno, "bad purity value '" + std::string(f[5]) + "'");
            }
            r.n_excluded = parse_count(f[6], origin, lineno);
        }
        rows.push_back(std::move(r));
    }
    if (!header)
        throw ParseError(origin, lineno, "missing header");
    return rows;
}

void write_comparisons(std::ostream& out, std::span<const Comparison> rows)
{
    out << "comparison,U,p,n_a,n_b,median_a,median_b\n";
    for (const auto& c : rows)
        out << c.a << " vs " << c.b << ',' << format_real(c.u) << ',' << format_real(c.p) << ',' << c.n_a << ','
            << c.n_b << ',' << format_real(c.median_a) << ',' << format_real(c.median_b) << '\n';
}

void write_levene(std::ostream& out, std::span<const LeveneComparison> rows)
{
    out << "dimension,n_mined,n_random,sd_mined,sd_random,W,p,df1,df2\n";
    for (const auto& r : rows)
        out << dimension_name(r.dimension) << ',' << r.n_mined << ',' << r.n_random << ',' << format_real(r.sd_mined)
            << ',' << format_real(r.sd_random) << ',' << format_real(r.test.w) << ',' << format_real(r.test.p) << ','
            << format_real(r.test.df_between) << ',' << format_real(r.test.df_within) << '\n';
}

} // namespace divmine
