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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion outside --known-red fails.

#include "divmine/annostats.hpp"
#include "divmine/cli.hpp"
#include "divmine/cluster.hpp"
#include "divmine/dataio.hpp"
#include "divmine/featprep.hpp"
#include "divmine/posthoc.hpp"
#include "divmine/rng.hpp"
#include "divmine/select.hpp"
#include "divmine/stats.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>
#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace divmine;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string id;
    std::string title;
    std::function<Outcome()> run;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_real(double v, int digits = 4)
{
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

fs::path fresh_dir(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("divmine-acceptance-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> csv_rows(const fs::path& p)
{
    std::ifstream in(p);
    std::vector<std::string> rows;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        if (!header) {
            header = true;
            continue;
        }
        rows.push_back(line);
    }
    return rows;
}

int cli(const fs::path& cfg, const fs::path& out, std::vector<std::string> args)
{
    args.insert(args.end(), {"--config", cfg.string(), "--out-dir", out.string(), "--log-level", "off"});
    return run_cli(args);
}

const std::vector<BlockSpec> kBlocks{{"acoustic", 0, 42}, {"emotion", 42, 8}, {"text", 50, 1}};

// ---- 1 ---------------------------------------------------------------------

Outcome grid_combinatorics()
{
    GridSpec full;
    full.variants = standard_variants();
    full.feature_sets = standard_feature_sets(kBlocks);
    full.k_values = standard_k_values();
    full.reps = 10;
    const std::size_t full_cells = enumerate_cells(full).size();

    const auto dir = fresh_dir("grid");
    const auto cfg = dir / "grid.ini";
    std::ofstream(cfg) << "seed = 1\n[synth]\nn = 500\nblocks = a:12,b:6,c:3\n[purity]\nk_values = 5,10\nreps = 10\n";
    const auto t0 = Clock::now();
    const bool ran = cli(cfg, dir, {"synth"}) == 0 && cli(cfg, dir, {"prep"}) == 0 &&
                     cli(cfg, dir, {"annostats"}) == 0 && cli(cfg, dir, {"purity-grid"}) == 0;
    const double secs = seconds_since(t0);
    std::size_t rows = 0, failed = 0;
    std::set<std::string> cells;
    if (ran)
        for (const auto& r : csv_rows(dir / "purity.csv")) {
            ++rows;
            failed += r.ends_with(",failed");
            cells.insert(r.substr(0, r.find(",valence")).substr(0, r.find(",arousal")));
        }
    const std::size_t desk_expected = 16 * 4 * 2 * 10;
    Outcome o;
    o.pass = full_cells == 16000 && ran && rows == 2 * desk_expected && failed == 0 && cells.size() == desk_expected &&
             secs < 120.0;
    o.detail = std::to_string(full_cells) + " cells at full scale; desk grid " + std::to_string(cells.size()) +
               " cells, " + std::to_string(rows) + " rows, " + std::to_string(failed) + " failed, " +
               fmt_real(secs, 3) + " s";
    return o;
}

// ---- 2 ---------------------------------------------------------------------

Outcome selection_arithmetic()
{
    const auto dir = fresh_dir("select");
    const auto cfg = dir / "select.ini";
    std::ofstream(cfg) << "seed = 2\n[synth]\nn = 1200\n[cluster]\nalgo = clara\nk = 50\n[select]\nrandom_total = 100\n";
    bool ok = cli(cfg, dir, {"synth"}) == 0 && cli(cfg, dir, {"prep"}) == 0 && cli(cfg, dir, {"cluster"}) == 0 &&
              cli(cfg, dir, {"select"}) == 0;
    std::size_t desk = 0, desk_unique = 0;
    if (ok) {
        std::set<std::string> ids;
        for (const auto& r : csv_rows(dir / "selection.csv")) {
            ++desk;
            ids.insert(r.substr(0, r.find(',')));
        }
        desk_unique = ids.size();
    }

    // Full scale: 1500 clusters x 6 + 1000 random per source.
    const auto corpus = gen_synthetic(20000, kBlocks, MixtureConfig{.components = {{}}}, 3);
    ClusteringConfig cc;
    cc.k = 1500;
    cc.seed = 3;
    cc.clara_subsamples = 1;
    const auto cl = clara(corpus.data.features(), cc);
    SelectionPlan plan;
    plan.sources = corpus.data.sources();
    plan.random_topup_seed = 4;
    const auto mined = medoid_neighborhood_select(cl, corpus.data, plan, Metric::euclidean);
    std::vector<std::pair<std::string, std::size_t>> quotas;
    for (const auto& s : plan.sources)
        quotas.emplace_back(s, 1000);
    const auto all = combine(mined, random_select(corpus.data, quotas, 5, mined.indices()));
    std::set<std::string> ids;
    for (const auto& s : all.samples)
        ids.insert(s.sample_id);

    Outcome o;
    o.pass = ok && desk == 400 && desk_unique == 400 && mined.size() == 9000 && all.size() == 12000 &&
             ids.size() == 12000;
    o.detail = "desk " + std::to_string(desk) + " selected (" + std::to_string(desk_unique) +
               " unique); corpus scale " + std::to_string(mined.size()) + " mined + " +
               std::to_string(all.size() - mined.size()) + " random = " + std::to_string(ids.size()) + " unique";
    return o;
}

// ---- 3 ---------------------------------------------------------------------

double medoid_cost(const FeatureMatrix& m, const std::vector<std::size_t>& med, Metric metric)
{
    double total = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c : med)
            best = std::min(best, distance(m.row(i), m.row(c), metric));
        total += best;
    }
    return total;
}

void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& fn)
{
    std::vector<std::size_t> cur(k);
    for (std::size_t i = 0; i < k; ++i)
        cur[i] = i;
    while (true) {
        fn(cur);
        std::size_t i = k;
        while (i > 0 && cur[i - 1] == n - k + i - 1)
            --i;
        if (i == 0)
            return;
        ++cur[i - 1];
        for (std::size_t j = i; j < k; ++j)
            cur[j] = cur[j - 1] + 1;
    }
}

Outcome kmedoids_oracle()
{
    const auto t0 = Clock::now();
    std::size_t below = 0, off_local = 0;
    for (std::uint64_t inst = 0; inst < 200; ++inst) {
        Rng rng(derive_seed(3, "kmedoids-oracle", std::to_string(inst)));
        const std::size_t n = 4 + rng.index(9);
        const std::size_t k = 1 + rng.index(3);
        const Metric metric = kAllMetrics[inst % 5];
        const std::size_t d = 2 + rng.index(3);
        std::vector<double> v(n * d);
        for (auto& x : v)
            x = rng.normal();
        const FeatureMatrix m(n, d, v);
        ClusteringConfig cfg;
        cfg.k = k;
        cfg.metric = metric;
        cfg.seed = inst;
        cfg.init = static_cast<Init>(inst % 4);
        const auto r = kmedoids(m, cfg);

        double optimum = std::numeric_limits<double>::infinity();
        std::vector<double> local;
        for_each_subset(n, k, [&](const std::vector<std::size_t>& s) {
            const double c = medoid_cost(m, s, metric);
            optimum = std::min(optimum, c);
            for (std::size_t pos = 0; pos < k; ++pos)
                for (std::size_t x = 0; x < n; ++x) {
                    if (std::find(s.begin(), s.end(), x) != s.end())
                        continue;
                    auto t = s;
                    t[pos] = x;
                    if (medoid_cost(m, t, metric) < c - 1e-9)
                        return;
                }
            local.push_back(c);
        });
        below += r.cost < optimum - 1e-9;
        off_local += std::none_of(local.begin(), local.end(), [&](double c) { return std::abs(c - r.cost) <= 1e-9; });
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = below == 0 && off_local == 0 && secs < 60.0;
    o.detail = "200 instances: " + std::to_string(below) + " below optimum, " + std::to_string(off_local) +
               " not swap-local, " + fmt_real(secs, 3) + " s";
    return o;
}

// ---- 4 ---------------------------------------------------------------------

Outcome faft_oracle()
{
    std::size_t steps = 0, violations = 0;
    for (std::uint64_t inst = 0; inst < 100; ++inst) {
        Rng rng(derive_seed(4, "faft-oracle", std::to_string(inst)));
        const std::size_t n = 2 + rng.index(49);
        const std::size_t d = 2 + rng.index(3);
        std::vector<double> v(n * d);
        for (auto& x : v)
            x = std::round(rng.normal() * 4.0) / 4.0; // coarse grid: plenty of ties
        const FeatureMatrix m(n, d, v);
        const Metric metric = kAllMetrics[inst % 5];
        const std::size_t take = 1 + rng.index(n);
        const auto order = faft(m, take, metric, inst);
        for (std::size_t step = 1; step < order.size(); ++step) {
            double best = -1.0;
            std::size_t arg = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (std::find(order.begin(), order.begin() + static_cast<long>(step), i) !=
                    order.begin() + static_cast<long>(step))
                    continue;
                double mind = std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < step; ++j)
                    mind = std::min(mind, distance(m.row(i), m.row(order[j]), metric));
                if (mind > best) {
                    best = mind;
                    arg = i;
                }
            }
            ++steps;
            violations += order[step] != arg;
        }
    }
    Outcome o;
    o.pass = violations == 0;
    o.detail = "100 instances, " + std::to_string(steps) + " steps checked, " + std::to_string(violations) +
               " violations";
    return o;
}

// ---- 5 ---------------------------------------------------------------------

Outcome diversity_separation()
{
    const auto t0 = Clock::now();
    const std::vector<std::size_t> sizes{50, 100, 200, 500};
    const std::vector<BlockSpec> blocks{{"f", 0, 8}};
    std::size_t wins = 0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        const auto corpus = gen_synthetic(2000, blocks, MixtureConfig::extreme_tail(0.05), derive_seed(5, rep));
        std::vector<ScoreRecord> scores;
        for (std::size_t i = 0; i < corpus.data.size(); ++i)
            scores.push_back({corpus.data.meta(i).sample_id, corpus.valence[i], corpus.arousal[i]});
        std::map<Strategy, std::vector<DiversityCurve>> curves;
        for (Strategy st : {Strategy::random, Strategy::faft, Strategy::faft_kmedoids}) {
            DiversitySpec spec;
            spec.strategy = st;
            spec.sizes = sizes;
            spec.seed = derive_seed(5, "diversity", std::to_string(rep));
            curves[st] = diversity_curves(corpus.data.features(), scores, spec);
        }
        bool all = true;
        for (std::size_t dim = 0; dim < 2; ++dim)
            for (std::size_t p = 0; p < sizes.size(); ++p) {
                const double base = curves[Strategy::random][dim].points[p].sd_mean;
                all = all && curves[Strategy::faft][dim].points[p].sd_mean > base &&
                      curves[Strategy::faft_kmedoids][dim].points[p].sd_mean > base;
            }
        wins += all;
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = wins >= 95 && secs < 300.0;
    o.detail = std::to_string(wins) + "/100 replications beat random at every size and dimension, " +
               fmt_real(secs, 3) + " s";
    return o;
}

// ---- 6 ---------------------------------------------------------------------

Outcome mwu_all_small_cases()
{
    double worst = 0.0;
    std::size_t worst_x = 0, worst_y = 0, cases = 0;
    for (std::size_t n = 2; n <= kMwuExactMaxN; ++n)
        for (std::size_t nx = 1; nx < n; ++nx)
            for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
                if (static_cast<std::size_t>(__builtin_popcount(mask)) != nx)
                    continue;
                std::vector<double> x, y;
                for (std::size_t r = 0; r < n; ++r)
                    ((mask >> r) & 1u ? x : y).push_back(static_cast<double>(r));
                const double diff = std::abs(mann_whitney_u(x, y, MwuMode::normal).p -
                                             mann_whitney_u(x, y, MwuMode::exact).p);
                ++cases;
                if (diff > worst) {
                    worst = diff;
                    worst_x = nx;
                    worst_y = n - nx;
                }
            }
    Outcome o;
    o.pass = worst <= 0.02;
    o.detail = std::to_string(cases) + " rank configurations with n_x + n_y <= 12; worst |normal - exact| = " +
               fmt_real(worst) + " at " + std::to_string(worst_x) + "+" + std::to_string(worst_y);
    return o;
}

Outcome mwu_six_six()
{
    Rng rng(66);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> x(6), y(6);
        const double shift = 0.25 * (rep % 8);
        for (auto& v : x)
            v = rng.normal();
        for (auto& v : y)
            v = rng.normal() + shift;
        worst = std::max(worst, std::abs(mann_whitney_u(x, y, MwuMode::normal).p -
                                         mann_whitney_u(x, y, MwuMode::exact).p));
    }
    Outcome o;
    o.pass = worst <= 0.02;
    o.detail = "200 random 6+6 samples; worst |normal - exact| = " + fmt_real(worst);
    return o;
}

Outcome levene_identical()
{
    const std::vector<double> g{0.3, -1.2, 0.8, 2.5, 0.1, -0.4};
    const auto r = levene({g, g});
    Outcome o;
    o.pass = r.w == 0.0 && r.p == 1.0;
    o.detail = "W = " + fmt_real(r.w) + ", p = " + fmt_real(r.p);
    return o;
}

Outcome kappa_example()
{
    const std::vector<int> a{kPositive, kPositive, kNegative, kNegative};
    const std::vector<int> b{kPositive, kNegative, kNegative, kNegative};
    const double k = cohens_kappa(a, b);
    Outcome o;
    o.pass = std::abs(k - 0.5) <= 1e-12;
    o.detail = "kappa = " + fmt_real(k, 17);
    return o;
}

Outcome spearman_example()
{
    const std::vector<double> x{1, 2, 3, 4}, y{1, 3, 2, 4};
    const double r = spearman(x, y);
    Outcome o;
    o.pass = std::abs(r - 0.8) <= 1e-12;
    o.detail = "rho = " + fmt_real(r, 17);
    return o;
}

// ---- 7 ---------------------------------------------------------------------

Outcome normalization_contracts()
{
    const auto corpus = gen_synthetic(800, kBlocks, MixtureConfig::extreme_tail(0.05), 7);
    RatingSimulation sim;
    sim.gold_standard = 100;
    const auto ratings = simulate_ratings(corpus, sim, 8);
    const auto norm = normalize_ratings(ratings.records);
    std::map<std::string, std::pair<double, double>> max_abs;
    for (const auto& r : norm.records) {
        auto& m = max_abs[r.annotator_id];
        m.first = std::max(m.first, std::abs(r.valence));
        m.second = std::max(m.second, std::abs(r.arousal));
    }
    double worst_norm = 0.0;
    std::size_t checked = 0;
    for (const auto& a : norm.annotators) {
        if (!a.valence.degenerate) {
            worst_norm = std::max(worst_norm, std::abs(max_abs[a.annotator_id].first - 1.0));
            ++checked;
        }
        if (!a.arousal.degenerate) {
            worst_norm = std::max(worst_norm, std::abs(max_abs[a.annotator_id].second - 1.0));
            ++checked;
        }
    }

    const auto balanced = balance_blocks(corpus.data);
    double total = 0.0;
    std::vector<double> shares;
    for (const auto& b : balanced.data.blocks()) {
        shares.push_back(block_total_variance(balanced.data.features(), b));
        total += shares.back();
    }
    double worst_share = 0.0;
    for (double s : shares)
        worst_share = std::max(worst_share, std::abs(s / total - 1.0 / static_cast<double>(shares.size())));

    Outcome o;
    o.pass = checked == 2 * norm.annotators.size() && worst_norm <= 1e-9 && worst_share <= 1e-9;
    o.detail = std::to_string(checked) + " annotator-dimensions, max | max|score| - 1 | = " + fmt_real(worst_norm) +
               "; " + std::to_string(shares.size()) + " blocks, max |share - 1/B| = " + fmt_real(worst_share);
    return o;
}

// ---- 8 ---------------------------------------------------------------------

// Inner samples: every annotator inside (-0.079, 0.079). Outer samples: a
// shared sign, magnitudes in [0.121, 0.6]. Agreement is perfect exactly for
// 0.079 <= t < 0.121, so the optimal band on the default grid is [0.08, 0.12].
GoldMatrix banded_gold(std::uint64_t seed)
{
    Rng rng(seed);
    const std::size_t annotators = 5, samples = 150;
    GoldMatrix g;
    for (std::size_t s = 0; s < samples; ++s)
        g.sample_ids.push_back("g" + std::to_string(s));
    for (std::size_t a = 0; a < annotators; ++a)
        g.annotators.push_back("a" + std::to_string(a));
    g.valence.resize(annotators * samples);
    g.arousal.resize(annotators * samples);
    for (std::size_t s = 0; s < samples; ++s) {
        const bool inner = rng.uniform() < 0.4;
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        for (std::size_t a = 0; a < annotators; ++a) {
            const double u = rng.uniform();
            g.valence[a * samples + s] = inner ? (2.0 * u - 1.0) * 0.079 : sign * (0.121 + u * 0.479);
            g.arousal[a * samples + s] = sign * (0.1 + u);
        }
    }
    return g;
}

Outcome threshold_optimization()
{
    const auto grid = default_threshold_grid();
    std::size_t inside = 0;
    double lo = 1.0, hi = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto r = optimize_valence_threshold(banded_gold(derive_seed(8, seed)), grid);
        inside += r.best >= 0.08 - 1e-12 && r.best <= 0.12 + 1e-12;
        lo = std::min(lo, r.best);
        hi = std::max(hi, r.best);
    }
    Rng rng(88);
    std::vector<double> scores{-0.08, 0.08};
    for (int i = 0; i < 200; ++i)
        scores.push_back(2.0 * rng.uniform() - 1.0);
    const auto labels = discretize(scores, Dimension::valence, kDefaultValenceThreshold).labels;
    bool chain = labels[0] == kNegative && labels[1] == kNeutral;
    for (std::size_t i = 2; i < scores.size(); ++i) {
        const int want = scores[i] <= -0.08 ? kNegative : scores[i] > 0.08 ? kPositive : kNeutral;
        chain = chain && labels[i] == want;
    }
    Outcome o;
    o.pass = inside == 20 && chain;
    o.detail = std::to_string(inside) + "/20 seeds inside [0.08, 0.12] (t* range " + fmt_real(lo) + ".." +
               fmt_real(hi) + "); boundary labels at t = 0.08 " + (chain ? "correct" : "WRONG");
    return o;
}

// ---- 9 ---------------------------------------------------------------------

long peak_rss_kb()
{
    rusage u{};
    getrusage(RUSAGE_SELF, &u);
    return u.ru_maxrss;
}

Outcome clara_scale()
{
    const std::size_t n = 100000, d = 51;
    Rng rng(9);
    std::vector<double> v(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        const double centre = static_cast<double>(i % 40);
        for (std::size_t j = 0; j < d; ++j)
            v[i * d + j] = centre * (j % 2 ? 1.0 : -1.0) * 0.3 + rng.normal();
    }
    const FeatureMatrix m(n, d, std::move(v));
    ClusteringConfig cfg;
    cfg.k = 1500;
    cfg.clara_subsamples = 5;
    cfg.seed = 9;
    const auto t0 = Clock::now();
    const auto r = clara(m, cfg);
    const double secs = seconds_since(t0);
    const double gb = static_cast<double>(peak_rss_kb()) / (1024.0 * 1024.0);
    const bool shape = r.medoids.size() == 1500 &&
                       std::set<std::size_t>(r.medoids.begin(), r.medoids.end()).size() == 1500 &&
                       r.round_costs.size() == 5 && r.assignment.size() == n;
    Outcome o;
    o.pass = shape && secs < 600.0 && gb < 4.0;
    o.detail = "k = 1500, 5 x " + std::to_string(cfg.effective_subsample_size()) + " on " + std::to_string(n) + " x " +
               std::to_string(d) + ": " + fmt_real(secs, 3) + " s, peak RSS " + fmt_real(gb, 3) + " GB";
    return o;
}

// ---- 10 --------------------------------------------------------------------

// Manifests carry a creation timestamp; everything else must match.
std::string strip_created(const std::string& text)
{
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line))
        if (line.rfind("created = ", 0) != 0)
            out += line + '\n';
    return out;
}

Outcome determinism()
{
    const auto dir = fresh_dir("determinism");
    const auto cfg = dir / "run.ini";
    std::ofstream(cfg) << "seed = 10\n[synth]\nn = 700\nblocks = a:12,b:6,c:3\n[prep]\npca_block = a\n"
                          "pca_components = 6\n[cluster]\nk = 40\n[select]\nrandom_total = 90\n"
                          "[diversity]\nsizes = 10,60\nruns = 4\n[purity]\nk_values = 6,12\nreps = 2\n";
    const std::vector<std::vector<std::string>> steps{
        {"synth"},     {"ingest", "--input", ""}, {"prep"},        {"cluster"},
        {"select"},    {"annostats"},             {"diversity"},   {"purity-grid"},
        {"compare"},   {"compare", "--mode", "levene"},
    };
    // ingest reads one shared copy so its --input path, and hence the config
    // hash, is the same in every run.
    const auto source = dir / "source";
    bool ok = cli(cfg, source, {"synth"}) == 0;
    std::map<std::string, std::string> reference;
    std::size_t mismatches = 0, files = 0;
    for (int threads : {1, 2, 4}) {
        const auto out = dir / ("t" + std::to_string(threads));
        for (auto step : steps) {
            if (step[0] == "ingest")
                step[2] = (source / "features.csv").string();
            step.insert(step.end(), {"--threads", std::to_string(threads)});
            ok = ok && cli(cfg, out, step) == 0;
        }
        std::map<std::string, std::string> got;
        for (const auto& e : fs::directory_iterator(out))
            got[e.path().filename().string()] = strip_created(slurp(e.path()));
        if (reference.empty()) {
            reference = got;
            files = got.size();
            continue;
        }
        if (got.size() != reference.size())
            ++mismatches;
        for (const auto& [name, text] : got)
            mismatches += reference[name] != text;
    }
    Outcome o;
    o.pass = ok && mismatches == 0 && files >= 20;
    o.detail = std::to_string(files) + " files from 10 subcommand runs compared at 1, 2 and 4 threads; " +
               std::to_string(mismatches) + " differ" + (ok ? "" : "; a subcommand failed");
    return o;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"divmine acceptance checks"};
    std::vector<std::string> known_red, only;
    app.add_option("--known-red", known_red, "criteria expected to fail; they do not affect the exit code");
    app.add_option("--only", only, "run just these criteria");
    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::off);

    const std::vector<Criterion> criteria{
        {"1", "grid combinatorics", grid_combinatorics},
        {"2", "selection arithmetic", selection_arithmetic},
        {"3", "k-medoids exhaustive oracle", kmedoids_oracle},
        {"4", "farthest-first maximin oracle", faft_oracle},
        {"5", "diversity separation", diversity_separation},
        {"6a", "MWU normal vs exact, every case n_x + n_y <= 12", mwu_all_small_cases},
        {"6b", "MWU normal vs exact, 6 + 6 random data", mwu_six_six},
        {"6c", "Levene on identical groups", levene_identical},
        {"6d", "kappa worked example", kappa_example},
        {"6e", "Spearman worked example", spearman_example},
        {"7", "normalization contracts", normalization_contracts},
        {"8", "threshold optimization", threshold_optimization},
        {"9", "CLARA at corpus scale", clara_scale},
        {"10", "determinism across thread counts", determinism},
    };

    auto listed = [](const std::vector<std::string>& list, const std::string& id) {
        return std::find(list.begin(), list.end(), id) != list.end();
    };
    int unexpected = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !listed(only, c.id))
            continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const bool red = listed(known_red, c.id);
        std::printf("criterion %-3s %s  %s: %s%s\n", c.id.c_str(), o.pass ? "PASS" : "FAIL", c.title.c_str(),
                    o.detail.c_str(), !o.pass && red ? " [known red]" : "");
        std::fflush(stdout);
        if (!o.pass && !red)
            ++unexpected;
    }
    return unexpected == 0 ? 0 : 1;
}
