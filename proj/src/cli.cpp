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

#include "divmine/cli.hpp"

#include "divmine/annostats.hpp"
#include "divmine/cluster.hpp"
#include "divmine/config.hpp"
#include "divmine/dataio.hpp"
#include "divmine/error.hpp"
#include "divmine/featprep.hpp"
#include "divmine/kernels.hpp"
#include "divmine/posthoc.hpp"
#include "divmine/rng.hpp"
#include "divmine/select.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <omp.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <unordered_map>

#ifndef DIVMINE_VERSION
#define DIVMINE_VERSION "0.0.0"
#endif

namespace divmine {

namespace fs = std::filesystem;

namespace {

// ---- output staging ------------------------------------------------------

class Outputs {
public:
    Outputs(fs::path dir, std::string header) : dir_(std::move(dir)), header_(std::move(header)) {}

    void add(const std::string& name, const std::string& content, bool with_header = true)
    {
        files_.push_back({name, with_header ? header_ + content : content});
    }

    std::vector<std::string> names() const
    {
        std::vector<std::string> out;
        for (const auto& f : files_)
            out.push_back(f.name);
        return out;
    }

    // All files go to `<name>.tmp` first and are renamed once every write
    // succeeded; on failure nothing from this run is left behind.
    void commit() const
    {
        std::vector<fs::path> written;
        std::vector<fs::path> renamed;
        try {
            fs::create_directories(dir_);
            for (const auto& f : files_) {
                const fs::path tmp = dir_ / (f.name + ".tmp");
                std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
                written.push_back(tmp);
                out << f.content;
                out.close();
                if (!out)
                    throw std::runtime_error("cannot write '" + tmp.string() + "'");
            }
            for (std::size_t i = 0; i < files_.size(); ++i) {
                const fs::path dst = dir_ / files_[i].name;
                fs::rename(written[i], dst);
                renamed.push_back(dst);
            }
        } catch (...) {
            std::error_code ec;
            for (const auto& p : written)
                fs::remove(p, ec);
            for (const auto& p : renamed)
                fs::remove(p, ec);
            throw;
        }
    }

private:
    struct File {
        std::string name;
        std::string content;
    };
    fs::path dir_;
    std::string header_;
    std::vector<File> files_;
};

struct Context {
    std::string command;
    Config config;
    fs::path out_dir;
    std::uint64_t seed = 0;
    Outputs outputs;
};

template <typename Fn>
std::string render(Fn&& fn)
{
    std::ostringstream out;
    fn(out);
    return out.str();
}

// ---- inputs ------------------------------------------------------------------

fs::path input_path(const Context& ctx, const std::string& section, const std::string& key,
                    const std::vector<fs::path>& fallbacks)
{
    if (const auto p = ctx.config.get_path(section, key)) {
        if (!fs::exists(*p))
            throw ConfigError("[" + section + "] " + key + ": file not found: " + p->string());
        return *p;
    }
    for (const auto& f : fallbacks)
        if (!f.empty() && fs::exists(f))
            return f;
    std::string tried;
    for (const auto& f : fallbacks)
        if (!f.empty())
            tried += (tried.empty() ? "" : ", ") + f.string();
    throw ConfigError("[" + section + "] " + key + ": not set and no default input exists (tried " +
                      (tried.empty() ? std::string("nothing") : tried) + ")");
}

fs::path optional_paths_entry(const Context& ctx, const std::string& key)
{
    return ctx.config.get_path("paths", key).value_or(fs::path{});
}

fs::path companion_blocks(const fs::path& features)
{
    fs::path p = features;
    p.replace_extension(".blocks");
    return p;
}

Dataset load_dataset(const Context& ctx, const std::string& section, const fs::path& path)
{
    std::vector<BlockSpec> blocks;
    if (const auto b = ctx.config.get_path(section, "blocks")) {
        if (!fs::exists(*b))
            throw ConfigError("[" + section + "] blocks: file not found: " + b->string());
        blocks = load_blocks(b->string());
    } else if (fs::exists(companion_blocks(path))) {
        blocks = load_blocks(companion_blocks(path).string());
    } else if (const auto pb = ctx.config.get_path("paths", "blocks");
               pb && fs::exists(*pb) && ctx.config.get_path("paths", "features") == path) {
        blocks = load_blocks(pb->string());
    }
    Dataset d = load_features(path.string(), blocks);
    spdlog::info("loaded {} samples x {} features from {}", d.size(), d.dim(), path.string());
    return d;
}

void add_dataset(Context& ctx, const std::string& name, const Dataset& data)
{
    ctx.outputs.add(name, render([&](std::ostream& o) { write_features(o, data); }));
    fs::path blocks_name = fs::path(name).replace_extension(".blocks");
    ctx.outputs.add(blocks_name.string(), render([&](std::ostream& o) { write_blocks(o, data.blocks()); }));
}

fs::path out_file(const Context& ctx, const std::string& name)
{
    return ctx.out_dir / name;
}

// Scores aligned with the rows of `data`, restricted to the scored samples.
std::pair<Dataset, std::vector<ScoreRecord>> align_scores(const Dataset& data, const std::vector<ScoreRecord>& scores)
{
    std::unordered_map<std::string, const ScoreRecord*> by_id;
    for (const auto& s : scores)
        by_id.emplace(s.sample_id, &s);
    std::vector<std::size_t> rows;
    std::vector<ScoreRecord> aligned;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (const auto it = by_id.find(data.meta(i).sample_id); it != by_id.end()) {
            rows.push_back(i);
            aligned.push_back(*it->second);
        }
    if (rows.empty())
        throw ValidationError("no scored sample appears in the feature table");
    if (rows.size() < scores.size())
        spdlog::warn("{} scored samples have no features and are ignored", scores.size() - rows.size());
    return {data.subset(rows), std::move(aligned)};
}

Metric metric_of(const Context& ctx, const std::string& section, Metric fallback = Metric::euclidean)
{
    const auto v = ctx.config.get(section, "metric");
    return v ? parse_metric(*v) : fallback;
}

// ---- subcommands -----------------------------------------------------------

void cmd_synth(Context& ctx)
{
    const auto& c = ctx.config;
    c.check_keys("synth", {"n", "blocks", "tail_fraction", "annotators", "gold_standard", "noise_sd", "bias_sd",
                           "label_sd", "speakers_per_source", "sources"});
    const std::size_t n = c.get_size("synth", "n", 1000);
    if (n < 2)
        throw ConfigError("[synth] n: must be >= 2");
    const auto blocks = blocks_from_widths(c.get_string("synth", "blocks", "acoustic:42,emotion:8,text:1"));
    const double tail = c.get_real("synth", "tail_fraction", 0.05);
    if (!(tail >= 0.0 && tail < 1.0))
        throw ConfigError("[synth] tail_fraction: must be in [0, 1)");
    MixtureConfig mix = MixtureConfig::extreme_tail(tail);
    mix.label_sd = c.get_real("synth", "label_sd", mix.label_sd);
    mix.speakers_per_source = c.get_size("synth", "speakers_per_source", mix.speakers_per_source);
    if (const auto s = c.get_list("synth", "sources"); !s.empty())
        mix.sources = s;
    RatingSimulation sim;
    sim.annotators = c.get_size("synth", "annotators", sim.annotators);
    sim.gold_standard = c.get_size("synth", "gold_standard", std::min<std::size_t>(n, 100));
    sim.noise_sd = c.get_real("synth", "noise_sd", sim.noise_sd);
    sim.bias_sd = c.get_real("synth", "bias_sd", sim.bias_sd);
    if (sim.annotators < 1)
        throw ConfigError("[synth] annotators: must be >= 1");
    if (sim.gold_standard > n)
        throw ConfigError("[synth] gold_standard: exceeds n");

    const auto corpus = gen_synthetic(n, blocks, mix, derive_seed(ctx.seed, "synth"));
    const auto ratings = simulate_ratings(corpus, sim, derive_seed(ctx.seed, "synth-ratings"));

    std::vector<ScoreRecord> latent;
    for (std::size_t i = 0; i < n; ++i)
        latent.push_back({corpus.data.meta(i).sample_id, corpus.valence[i], corpus.arousal[i]});

    add_dataset(ctx, "features.csv", corpus.data);
    ctx.outputs.add("annotations.csv", render([&](std::ostream& o) { write_annotations(o, ratings.records); }));
    ctx.outputs.add("gs_ids.txt", render([&](std::ostream& o) {
                        for (const auto& id : ratings.gold_ids)
                            o << id << '\n';
                    }));
    ctx.outputs.add("latent_scores.csv", render([&](std::ostream& o) { write_scores(o, latent); }));
}

void cmd_ingest(Context& ctx)
{
    const auto& c = ctx.config;
    c.check_keys("ingest", {"input", "blocks", "min_duration_s", "max_duration_s", "min_snr_db"});
    const auto path = input_path(ctx, "ingest", "input", {optional_paths_entry(ctx, "features")});
    MetadataBounds bounds;
    bounds.min_duration_s = c.get_optional_real("ingest", "min_duration_s");
    bounds.max_duration_s = c.get_optional_real("ingest", "max_duration_s");
    bounds.min_snr_db = c.get_optional_real("ingest", "min_snr_db");
    if (bounds.min_duration_s && bounds.max_duration_s && *bounds.min_duration_s > *bounds.max_duration_s)
        throw ConfigError("[ingest] min_duration_s: exceeds max_duration_s");
    const Dataset raw = load_dataset(ctx, "ingest", path);
    const Dataset kept = filter_metadata(raw, bounds);
    spdlog::info("ingest kept {} of {} samples", kept.size(), raw.size());
    if (kept.size() == 0)
        throw ValidationError("metadata filter removed every sample");
    add_dataset(ctx, "ingested.csv", kept);
}

void cmd_prep(Context& ctx)
{
    const auto& c = ctx.config;
    c.check_keys("prep", {"input", "blocks", "zscore_blocks", "pca_block", "pca_components", "balance"});
    const auto path = input_path(ctx, "prep", "input",
                                 {out_file(ctx, "ingested.csv"), optional_paths_entry(ctx, "features"),
                                  out_file(ctx, "features.csv")});
    const Dataset data = load_dataset(ctx, "prep", path);
    PrepConfig pc;
    if (c.has("prep", "zscore_blocks")) {
        pc.zscore_blocks = c.get_list("prep", "zscore_blocks");
    } else {
        for (const auto& b : data.blocks())
            pc.zscore_blocks.push_back(b.name);
    }
    for (const auto& b : pc.zscore_blocks)
        data.features().block(b);
    if (const auto b = c.get("prep", "pca_block"); b && !b->empty())
        pc.pca_block = *b;
    pc.pca_components = c.get_size("prep", "pca_components", pc.pca_components);
    pc.balance = c.get_bool("prep", "balance", true);
    const Prepared prepared = prepare(data, pc);
    add_dataset(ctx, "prepared.csv", prepared.data);
    ctx.outputs.add("prep_model.txt", render([&](std::ostream& o) { write_prep_model(o, prepared.model); }));
}

ClusteringConfig clustering_config(const Context& ctx)
{
    const auto& c = ctx.config;
    ClusteringConfig cfg;
    cfg.k = c.get_size("cluster", "k", 50);
    cfg.metric = metric_of(ctx, "cluster");
    cfg.init = parse_init(c.get_string("cluster", "init", "heuristic"));
    cfg.max_iter = c.get_size("cluster", "max_iter", cfg.max_iter);
    cfg.clara_subsamples = c.get_size("cluster", "subsamples", cfg.clara_subsamples);
    cfg.clara_subsample_size = c.get_size("cluster", "subsample_size", 0);
    cfg.linkage = parse_linkage(c.get_string("cluster", "linkage", "average"));
    cfg.pairwise_cap = c.get_size("cluster", "pairwise_cap", cfg.pairwise_cap);
    cfg.swap_max_n = c.get_size("cluster", "swap_max_n", cfg.swap_max_n);
    cfg.seed = derive_seed(ctx.seed, "cluster");
    return cfg;
}

void cmd_cluster(Context& ctx)
{
    const auto& c = ctx.config;
    c.check_keys("cluster", {"input", "blocks", "algo", "k", "metric", "init", "max_iter", "subsamples",
                             "subsample_size", "linkage", "pairwise_cap", "swap_max_n"});
    const Algorithm algo = parse_algorithm(c.get_string("cluster", "algo", "clara"));
    ClusteringConfig cfg = clustering_config(ctx);
    const auto path = input_path(ctx, "cluster", "input", {out_file(ctx, "prepared.csv")});
    const Dataset data = load_dataset(ctx, "cluster", path);
    try {
        cfg.validate(data.size());
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("[cluster] ") + e.what());
    }
    const auto result = run_clustering(algo, data.features(), cfg);
    spdlog::info("{} k={} cost={} iterations={}", algorithm_name(algo), cfg.k, format_real(result.cost),
                 result.iterations);
    ctx.outputs.add("clustering.csv", render([&](std::ostream& o) { write_clustering(o, result, data); }));
}

void cmd_select(Context& ctx)
{
    const auto& c = ctx.config;
    c.check_keys("select", {"features", "blocks", "clustering", "per_cluster", "per_source_quota", "sources", "topup",
                            "random_total", "metric"});
    SelectionPlan plan;
    plan.per_cluster = c.get_size("select", "per_cluster", plan.per_cluster);
    plan.per_source_quota = c.get_size("select", "per_source_quota", plan.per_source_quota);
    const std::string topup = c.get_string("select", "topup", "source_matched");
    if (topup == "source_matched")
        plan.topup = TopupMode::source_matched;
    else if (topup == "any_source")
        plan.topup = TopupMode::any_source;
    else
        throw ConfigError("[select] topup: expected source_matched or any_source, got '" + topup + "'");
    const std::size_t random_total = c.get_size("select", "random_total", 0);
    const Metric metric = metric_of(ctx, "select", metric_of(ctx, "cluster"));

    const auto fpath = input_path(ctx, "select", "features", {out_file(ctx, "prepared.csv")});
    const auto cpath = input_path(ctx, "select", "clustering", {out_file(ctx, "clustering.csv")});
    const Dataset data = load_dataset(ctx, "select", fpath);
    plan.sources = c.get_list("select", "sources");
    if (plan.sources.empty())
        plan.sources = data.sources();
    try {
        plan.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("[select] ") + e.what());
    }
    plan.random_topup_seed = derive_seed(ctx.seed, "select-topup");

    std::ifstream cin(cpath);
    ClusteringResult clustering = read_clustering(cin, data, cpath.string());
    if (clustering.medoids.empty()) {
        // Centroid-based clusterings carry no medoids; take each cluster's.
        const Distances d(data.features(), metric, 0);
        std::vector<std::vector<std::size_t>> members(clustering.k);
        for (std::size_t i = 0; i < data.size(); ++i)
            members[clustering.assignment[i]].push_back(i);
        std::vector<std::size_t> current(clustering.k), out(clustering.k);
        for (std::size_t k = 0; k < clustering.k; ++k) {
            if (members[k].empty())
                throw ValidationError("cluster " + std::to_string(k) + " in " + cpath.string() + " is empty");
            current[k] = members[k].front();
        }
        kernels::cluster_medoids(d, members, current, out);
        clustering.medoids = out;
    }

    SelectedSet mined = medoid_neighborhood_select(clustering, data, plan, metric);
    if (random_total > 0) {
        std::vector<std::pair<std::string, std::size_t>> quotas;
        const std::size_t s = plan.sources.size();
        for (std::size_t i = 0; i < s; ++i)
            quotas.emplace_back(plan.sources[i], random_total / s + (i < random_total % s ? 1 : 0));
        const auto random = random_select(data, quotas, derive_seed(ctx.seed, "select-random"), mined.indices());
        mined = combine(mined, random);
    }
    spdlog::info("selected {} samples", mined.size());
    ctx.outputs.add("selection.csv", render([&](std::ostream& o) { write_selection(o, mined); }));
}

std::vector<double> parse_grid(const std::string& text)
{
    // lo:step:hi
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            parts.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("[annostats] grid: bad number '" + item + "'");
        }
    }
    if (parts.size() != 3 || !(parts[1] > 0.0) || parts[2] < parts[0] || parts[0] < 0.0)
        throw ConfigError("[annostats] grid: expected lo:step:hi with 0 <= lo <= hi and step > 0");
    std::vector<double> grid;
    const auto steps = static_cast<std::size_t>(std::floor((parts[2] - parts[0]) / parts[1] + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i)
        grid.push_back(parts[0] + static_cast<double>(i) * parts[1]);
    return grid;
}

void cmd_annostats(Context& ctx)
{
    const auto& c = ctx.config;
    c.check_keys("annostats", {"annotations", "gs_ids", "threshold", "grid", "kappa_mode"});
    const auto apath = input_path(ctx, "annostats", "annotations",
                                  {optional_paths_entry(ctx, "annotations"), out_file(ctx, "annotations.csv")});
    const auto gpath =
        input_path(ctx, "annostats", "gs_ids", {optional_paths_entry(ctx, "gs_ids"), out_file(ctx, "gs_ids.txt")});
    const std::string threshold = c.get_string("annostats", "threshold", "optimize");
    const auto grid = parse_grid(c.get_string("annostats", "grid", "0:0.005:0.5"));
    const std::string mode_name = c.get_string("annostats", "kappa_mode", "vs_vote");
    KappaMode mode;
    if (mode_name == "vs_vote")
        mode = KappaMode::vs_vote;
    else if (mode_name == "all_pairs")
        mode = KappaMode::all_pairs;
    else
        throw ConfigError("[annostats] kappa_mode: expected vs_vote or all_pairs, got '" + mode_name + "'");
    std::optional<double> fixed;
    if (threshold != "optimize") {
        try {
            fixed = std::stod(threshold);
        } catch (const std::exception&) {
            throw ConfigError("[annostats] threshold: expected 'optimize' or a number, got '" + threshold + "'");
        }
        if (*fixed < 0.0)
            throw ConfigError("[annostats] threshold: must be >= 0");
    }

    const auto records = load_annotations(apath.string());
    const auto gs_ids = load_id_list(gpath.string());
    const auto normalized = normalize_ratings(records);
    aggregate_gs(normalized, gs_ids);
    const GoldMatrix gold = gold_matrix(normalized, gs_ids);

    std::optional<ThresholdSearch> search;
    double t = fixed.value_or(kDefaultValenceThreshold);
    if (!fixed) {
        search = optimize_valence_threshold(gold, grid, mode);
        t = search->best;
    }
    const AgreementReport report = agreement(gold, t);
    const auto scores = consensus_scores(normalized);
    std::vector<double> val, aro;
    for (const auto& s : scores) {
        val.push_back(s.valence);
        aro.push_back(s.arousal);
    }
    const auto vl = discretize(val, Dimension::valence, t).labels;
    const auto al = discretize(aro, Dimension::arousal).labels;
    std::size_t counts[5] = {0, 0, 0, 0, 0};
    for (int l : vl)
        ++counts[l];
    for (int l : al)
        ++counts[3 + l];

    ctx.outputs.add("annostats_report.txt", render([&](std::ostream& o) {
                        o << "annotators = " << normalized.annotators.size() << '\n'
                          << "ratings = " << records.size() << '\n'
                          << "gold_standard_samples = " << gs_ids.size() << '\n'
                          << "scored_samples = " << scores.size() << '\n'
                          << "threshold = " << format_real(t) << '\n'
                          << "threshold_source = " << (fixed ? "fixed" : "optimized") << '\n'
                          << "spearman_valence = " << format_real(report.spearman_valence) << '\n'
                          << "spearman_arousal = " << format_real(report.spearman_arousal) << '\n'
                          << "kappa_valence = " << format_real(report.kappa_valence) << '\n'
                          << "kappa_arousal = " << format_real(report.kappa_arousal) << '\n'
                          << "valence_negative = " << counts[0] << '\n'
                          << "valence_neutral = " << counts[1] << '\n'
                          << "valence_positive = " << counts[2] << '\n'
                          << "arousal_low = " << counts[3] << '\n'
                          << "arousal_high = " << counts[4] << '\n';
                    }));
    ctx.outputs.add("scores.csv", render([&](std::ostream& o) { write_scores(o, scores); }));
    ctx.outputs.add("normalized_annotations.csv",
                    render([&](std::ostream& o) { write_annotations(o, normalized.records); }));
    if (search)
        ctx.outputs.add("threshold_grid.csv", render([&](std::ostream& o) {
                            o << "threshold,mean_kappa\n";
                            for (std::size_t i = 0; i < search->grid.size(); ++i)
                                o << format_real(search->grid[i]) << ',' << format_real(search->mean_kappa[i])
                                  << '\n';
                        }));
}

std::pair<Dataset, std::vector<ScoreRecord>> scored_dataset(const Context& ctx, const std::string& section)
{
    const auto fpath = input_path(ctx, section, "features", {out_file(ctx, "prepared.csv")});
    const auto spath =
        input_path(ctx, section, "scores", {optional_paths_entry(ctx, "scores"), out_file(ctx, "scores.csv")});
    const Dataset data = load_dataset(ctx, section, fpath);
    return align_scores(data, load_scores(spath.string()));
}

void cmd_diversity(Context& ctx)
{
    const auto& c = ctx.config;
    c.check_keys("diversity", {"features", "blocks", "scores", "strategies", "sizes", "runs", "metric", "clara_init",
                               "feature_set", "max_iter", "pairwise_cap"});
    std::vector<Strategy> strategies;
    for (const auto& s : c.get_list("diversity", "strategies"))
        strategies.push_back(parse_strategy(s));
    if (strategies.empty())
        strategies.assign(std::begin(kAllStrategies), std::end(kAllStrategies));
    DiversitySpec base;
    base.runs = c.get_size("diversity", "runs", 0);
    base.metric = metric_of(ctx, "diversity");
    base.clara_init = parse_init(c.get_string("diversity", "clara_init", "heuristic"));
    base.max_iter = c.get_size("diversity", "max_iter", base.max_iter);
    base.pairwise_cap = c.get_size("diversity", "pairwise_cap", base.pairwise_cap);
    base.seed = derive_seed(ctx.seed, "diversity");
    const auto feature_blocks = c.get_list("diversity", "feature_set");
    base.sizes = c.get_size_list("diversity", "sizes");

    const auto [data, scores] = scored_dataset(ctx, "diversity");
    FeatureMatrix features = data.features();
    base.feature_set = "all";
    if (!feature_blocks.empty() && !(feature_blocks.size() == 1 && feature_blocks[0] == "all")) {
        features = data.features().select_blocks(feature_blocks);
        base.feature_set.clear();
        for (const auto& b : feature_blocks)
            base.feature_set += (base.feature_set.empty() ? "" : "+") + b;
    }
    if (base.sizes.empty()) {
        for (std::size_t m : default_diversity_sizes())
            if (m <= data.size())
                base.sizes.push_back(m);
        if (base.sizes.empty())
            base.sizes.push_back(data.size());
    }
    for (std::size_t m : base.sizes)
        if (m < 1 || m > data.size())
            throw ConfigError("[diversity] sizes: " + std::to_string(m) + " is outside 1.." +
                              std::to_string(data.size()));

    std::vector<DiversityCurve> curves;
    for (Strategy s : strategies) {
        DiversitySpec spec = base;
        spec.strategy = s;
        spdlog::info("diversity: {} over {} sizes", strategy_name(s), spec.sizes.size());
        for (auto& curve : diversity_curves(features, scores, spec))
            curves.push_back(std::move(curve));
    }
    ctx.outputs.add("curves.csv", render([&](std::ostream& o) { write_curves(o, curves); }));
}

void cmd_purity_grid(Context& ctx)
{
    const auto& c = ctx.config;
    c.check_keys("purity",
                 {"features", "blocks", "scores", "variants", "feature_sets", "k_values", "reps", "threshold", "max_iter"});
    GridSpec spec;
    const auto all = standard_variants();
    const auto ids = c.get_list("purity", "variants");
    if (ids.empty() || (ids.size() == 1 && ids[0] == "all")) {
        spec.variants = all;
    } else {
        for (std::size_t id : c.get_size_list("purity", "variants")) {
            if (id < 1 || id > all.size())
                throw ConfigError("[purity] variants: id " + std::to_string(id) + " is outside 1.." +
                                  std::to_string(all.size()));
            spec.variants.push_back(all[id - 1]);
        }
    }
    spec.k_values = c.get_size_list("purity", "k_values");
    if (spec.k_values.empty())
        spec.k_values = standard_k_values();
    spec.reps = c.get_size("purity", "reps", spec.reps);
    spec.valence_threshold = c.get_real("purity", "threshold", kDefaultValenceThreshold);
    if (spec.valence_threshold < 0.0)
        throw ConfigError("[purity] threshold: must be >= 0");
    spec.max_iter = c.get_size("purity", "max_iter", spec.max_iter);
    spec.seed = derive_seed(ctx.seed, "purity-grid");

    const auto [data, scores] = scored_dataset(ctx, "purity");
    const auto sets = c.get_list("purity", "feature_sets");
    if (sets.empty()) {
        spec.feature_sets = standard_feature_sets(data.blocks());
    } else {
        for (const auto& name : sets) {
            if (name == "all") {
                FeatureSet fs{"all", {}};
                for (const auto& b : data.blocks())
                    fs.blocks.push_back(b.name);
                spec.feature_sets.push_back(fs);
            } else {
                data.features().block(name);
                spec.feature_sets.push_back({name, {name}});
            }
        }
    }
    const GridResult grid = purity_grid(data, scores, spec);
    spdlog::info("purity grid: {} cells, {} failed", grid.cells, grid.failed_cells);
    ctx.outputs.add("purity.csv", render([&](std::ostream& o) { write_purity(o, grid.rows); }));
}

std::vector<std::pair<std::string, std::string>> read_selection_ids(const fs::path& path)
{
    std::ifstream in(path);
    std::vector<std::pair<std::string, std::string>> out;
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
            header = true;
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 4)
            throw ParseError(path.string(), lineno, "expected 4 fields");
        out.emplace_back(std::string(f[0]), std::string(f[1]));
    }
    return out;
}

void cmd_compare(Context& ctx)
{
    const auto& c = ctx.config;
    c.check_keys("compare",
                 {"mode", "input", "group_by", "dimension", "algorithm", "mwu", "scores", "selection", "center"});
    const std::string mode = c.get_string("compare", "mode", "purity");
    if (mode == "purity") {
        const GroupBy g = parse_group_by(c.get_string("compare", "group_by", "algorithm"));
        std::optional<Dimension> dim;
        const std::string d = c.get_string("compare", "dimension", "both");
        if (d == "valence")
            dim = Dimension::valence;
        else if (d == "arousal")
            dim = Dimension::arousal;
        else if (d != "both")
            throw ConfigError("[compare] dimension: expected valence, arousal or both, got '" + d + "'");
        const std::string mwu = c.get_string("compare", "mwu", "auto");
        MwuMode mm;
        if (mwu == "auto")
            mm = MwuMode::automatic;
        else if (mwu == "exact")
            mm = MwuMode::exact;
        else if (mwu == "normal")
            mm = MwuMode::normal;
        else
            throw ConfigError("[compare] mwu: expected auto, exact or normal, got '" + mwu + "'");
        const auto algo = c.get("compare", "algorithm");
        if (algo)
            parse_algorithm(*algo);
        const auto path = input_path(ctx, "compare", "input", {out_file(ctx, "purity.csv")});
        std::ifstream in(path);
        auto rows = read_purity(in, path.string());
        if (algo)
            std::erase_if(rows, [&](const PurityResult& r) { return group_key(r, GroupBy::algorithm) != *algo; });
        const auto tests = compare_variants(rows, g, dim, mm);
        ctx.outputs.add("tests.csv", render([&](std::ostream& o) { write_comparisons(o, tests); }));
    } else if (mode == "levene") {
        const std::string center_name = c.get_string("compare", "center", "mean");
        LeveneCenter center;
        if (center_name == "mean")
            center = LeveneCenter::mean;
        else if (center_name == "median")
            center = LeveneCenter::median;
        else
            throw ConfigError("[compare] center: expected mean or median, got '" + center_name + "'");
        const auto spath =
            input_path(ctx, "compare", "scores", {optional_paths_entry(ctx, "scores"), out_file(ctx, "scores.csv")});
        const auto selpath = input_path(ctx, "compare", "selection", {out_file(ctx, "selection.csv")});
        const auto scores = load_scores(spath.string());
        std::unordered_map<std::string, const ScoreRecord*> by_id;
        for (const auto& s : scores)
            by_id.emplace(s.sample_id, &s);
        std::vector<ScoreRecord> mined, random;
        std::size_t unscored = 0;
        for (const auto& [id, prov] : read_selection_ids(selpath)) {
            const auto it = by_id.find(id);
            if (it == by_id.end()) {
                ++unscored;
                continue;
            }
            (prov == provenance_name(Provenance::random_baseline) ? random : mined).push_back(*it->second);
        }
        if (unscored)
            spdlog::warn("{} selected samples have no score and are ignored", unscored);
        if (mined.size() < 2 || random.size() < 2)
            throw ValidationError("Levene comparison needs at least two scored mined and two scored random samples");
        const auto rows = compare_variances(mined, random, center);
        ctx.outputs.add("levene.csv", render([&](std::ostream& o) { write_levene(o, rows); }));
    } else {
        throw ConfigError("[compare] mode: expected purity or levene, got '" + mode + "'");
    }
}

// ---- plumbing --------------------------------------------------------------

struct FlagBinding {
    std::string flag;
    std::string section;
    std::string key;
    std::string help;
    bool is_path = false;
};

struct Command {
    std::string name;
    std::string help;
    std::function<void(Context&)> run;
    std::vector<FlagBinding> flags;
};

std::vector<Command> commands()
{
    return {
        {"synth", "generate a synthetic corpus with simulated ratings", cmd_synth,
         {{"--n", "synth", "n", "number of samples", false},
          {"--blocks", "synth", "blocks", "block widths, e.g. a:20,b:10", false}}},
        {"ingest", "load a feature table and apply metadata filters", cmd_ingest,
         {{"--input", "ingest", "input", "feature CSV", true}}},
        {"prep", "speaker z-score, PCA and block balancing", cmd_prep,
         {{"--input", "prep", "input", "feature CSV", true}}},
        {"cluster", "cluster the prepared features", cmd_cluster,
         {{"--input", "cluster", "input", "feature CSV", true},
          {"--algo", "cluster", "algo", "kmedoids|clara|kmeans|bisecting|agglomerative", false},
          {"--k", "cluster", "k", "number of clusters", false},
          {"--metric", "cluster", "metric", "euclidean|manhattan|chebyshev|cosine|pearson", false},
          {"--init", "cluster", "init", "faft|heuristic|kpp|random", false},
          {"--max-iter", "cluster", "max_iter", "iteration cap", false}}},
        {"select", "medoid-neighbourhood selection plus random baseline", cmd_select,
         {{"--features", "select", "features", "feature CSV", true},
          {"--clustering", "select", "clustering", "clustering CSV", true}}},
        {"annostats", "rating normalization, agreement and threshold search", cmd_annostats,
         {{"--annotations", "annostats", "annotations", "annotation CSV", true},
          {"--gs-ids", "annostats", "gs_ids", "gold-standard id list", true},
          {"--grid", "annostats", "grid", "threshold grid lo:step:hi", false},
          {"--threshold", "annostats", "threshold", "'optimize' or a fixed valence threshold", false}}},
        {"diversity", "label SD of selected subsets versus sample count", cmd_diversity,
         {{"--strategies", "diversity", "strategies", "comma list of random,faft,faft_kmedoids,clara", false},
          {"--sizes", "diversity", "sizes", "comma list of sample counts", false},
          {"--runs", "diversity", "runs", "runs per size (0: strategy default)", false}}},
        {"purity-grid", "cluster purity over variants, feature sets, k and repetitions", cmd_purity_grid,
         {{"--k-values", "purity", "k_values", "comma list of k", false},
          {"--reps", "purity", "reps", "repetitions per cell", false},
          {"--variants", "purity", "variants", "comma list of variant ids or 'all'", false}}},
        {"compare", "Mann-Whitney comparisons of purity or Levene test of selections", cmd_compare,
         {{"--mode", "compare", "mode", "purity|levene", false},
          {"--group-by", "compare", "group_by", "variant|algorithm|metric|init|feature_set", false},
          {"--input", "compare", "input", "purity CSV", true}}},
    };
}

std::string versions()
{
    return std::string("divmine ") + DIVMINE_VERSION + "; eigen " + std::to_string(EIGEN_WORLD_VERSION) + "." +
           std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION) + "; spdlog " +
           std::to_string(SPDLOG_VER_MAJOR) + "." + std::to_string(SPDLOG_VER_MINOR) + "." +
           std::to_string(SPDLOG_VER_PATCH) + "; boost " + BOOST_LIB_VERSION;
}

std::string timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void setup_logging(const std::string& level)
{
    auto logger = spdlog::get("divmine");
    if (!logger)
        logger = spdlog::stderr_logger_mt("divmine");
    spdlog::set_default_logger(logger);
    logger->set_pattern("%^%l%$: %v");
    spdlog::set_level(spdlog::level::from_str(level));
}

} // namespace

int run_cli(const std::vector<std::string>& args)
{
    CLI::App app{"divmine: affect-diverse sample mining and post-hoc evaluation"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    std::string out_dir;
    int threads = 0;
    std::string log_level = "info";
    app.add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed (overrides [run] seed)");
    app.add_option("--set", overrides, "override a config value, section.key=value (repeatable)");
    app.add_option("--out-dir", out_dir, "output directory (overrides [run] out_dir)");
    app.add_option("--threads", threads, "OpenMP threads (0: runtime default)")->check(CLI::NonNegativeNumber);
    app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

    std::string plan_file;
    auto cmds = commands();
    std::vector<std::vector<std::optional<std::string>>> flag_values(cmds.size());
    for (std::size_t i = 0; i < cmds.size(); ++i) {
        auto* sub = app.add_subcommand(cmds[i].name, cmds[i].help);
        flag_values[i].resize(cmds[i].flags.size());
        for (std::size_t f = 0; f < cmds[i].flags.size(); ++f) {
            const auto& b = cmds[i].flags[f];
            sub->add_option(b.flag, flag_values[i][f], b.help + " ([" + b.section + "] " + b.key + ")");
        }
        if (cmds[i].name == "select")
            sub->add_option("--plan", plan_file, "selection plan file of [select] keys");
    }

    // CLI11 wants argv order with the program name first.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    std::size_t which = cmds.size();
    for (std::size_t i = 0; i < cmds.size(); ++i)
        if (app.got_subcommand(cmds[i].name))
            which = i;
    const Command& cmd = cmds[which];

    try {
        setup_logging(log_level);
        Config config = config_path.empty() ? Config{} : Config::load(config_path);
        if (!plan_file.empty()) {
            const fs::path plan_path = fs::absolute(plan_file);
            std::ifstream in(plan_path);
            if (!in)
                throw ConfigError("--plan: cannot open '" + plan_path.string() + "'");
            const Config plan_cfg = Config::parse(in, plan_path.string(), plan_path.parent_path());
            // Keys outside any section belong to the plan itself.
            for (const auto& [section, keys] : plan_cfg.entries())
                for (const auto& [key, value] : keys)
                    config.set(section == "run" ? "select" : section, key, value);
        }
        for (std::size_t f = 0; f < cmd.flags.size(); ++f)
            if (const auto& v = flag_values[which][f]) {
                const auto& b = cmd.flags[f];
                config.set(b.section, b.key, b.is_path ? fs::absolute(*v).string() : *v);
            }
        for (const auto& o : overrides)
            config.apply_override(o);
        if (seed)
            config.set("run", "seed", std::to_string(*seed));
        if (!out_dir.empty())
            config.set("run", "out_dir", fs::absolute(out_dir).string());
        config.check_sections({"run", "paths", "synth", "ingest", "prep", "cluster", "select", "annostats",
                               "diversity", "purity", "compare"});
        config.check_keys("run", {"seed", "out_dir"});
        config.check_keys("paths", {"features", "blocks", "annotations", "gs_ids", "scores"});
        if (threads > 0)
            omp_set_num_threads(threads);

        const std::string hash = config.hash_hex();
        const std::uint64_t master = config.seed();
        const fs::path dir = config.get_path("run", "out_dir").value_or(fs::path("."));
        Context ctx{cmd.name, config, dir, master,
                    Outputs(dir, "# config_hash=" + hash + " command=" + cmd.name + "\n")};
        spdlog::info("{}: config hash {}, seed {}", cmd.name, hash, master);
        cmd.run(ctx);

        const auto names = ctx.outputs.names();
        ctx.outputs.add("manifest_" + cmd.name + ".txt", render([&](std::ostream& o) {
                            o << "command = " << cmd.name << '\n'
                              << "config_hash = " << hash << '\n'
                              << "seed = " << master << '\n'
                              << "versions = " << versions() << '\n'
                              << "created = " << timestamp() << '\n';
                            for (const auto& n : names)
                                o << "output = " << n << '\n';
                            o << "\n# effective configuration\n" << config.canonical();
                        }),
                        false);
        ctx.outputs.commit();
        spdlog::info("{}: wrote {} files to {}", cmd.name, names.size() + 1, dir.string());
        return kExitOk;
    } catch (const ConfigError& e) {
        spdlog::error("invalid configuration: {}", e.what());
        return kExitValidation;
    } catch (const ValidationError& e) {
        spdlog::error("validation failed: {}", e.what());
        return kExitValidation;
    } catch (const ParseError& e) {
        spdlog::error("bad input: {}", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitRuntime;
    }
}

int run_cli(int argc, const char* const* argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    return run_cli(args);
}

} // namespace divmine
