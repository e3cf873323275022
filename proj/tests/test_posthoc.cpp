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

#include "support.hpp"

#include "divmine/error.hpp"
#include "divmine/posthoc.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

using namespace divmine;

namespace {

const std::vector<BlockSpec> kBlocks{{"a", 0, 4}, {"b", 4, 3}, {"c", 7, 2}};

SyntheticCorpus corpus(std::size_t n, std::uint64_t seed)
{
    return gen_synthetic(n, kBlocks, MixtureConfig::extreme_tail(0.05), seed);
}

std::vector<ScoreRecord> latent_scores(const SyntheticCorpus& c)
{
    std::vector<ScoreRecord> out;
    for (std::size_t i = 0; i < c.data.size(); ++i)
        out.push_back({c.data.meta(i).sample_id, c.valence[i], c.arousal[i]});
    return out;
}

PurityResult row(const std::string& variant, double purity, const std::string& fs = "all")
{
    PurityResult r;
    r.variant = variant;
    r.feature_set = fs;
    r.purity = purity;
    r.k = 10;
    return r;
}

} // namespace

TEST_CASE("purity worked examples")
{
    const std::vector<std::size_t> a1{0, 0, 1, 1};
    const std::vector<int> single{2, 2, 0, 0};
    CHECK(purity(a1, single).purity == 1.0);

    const std::vector<std::size_t> a2{0, 0, 0, 1, 1};
    const std::vector<int> l2{0, 0, 1, 1, 1};
    CHECK(purity(a2, l2).purity == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(purity(a2, l2).n_excluded == 0);

    const std::vector<std::size_t> a3{0, 1, 1};
    const std::vector<int> l3{0, 0, 1};
    const auto p3 = purity(a3, l3);
    CHECK(p3.purity == 0.5);
    CHECK(p3.n_excluded == 1);

    const std::vector<std::size_t> lonely{0, 1, 2};
    CHECK_THROWS_AS(purity(lonely, l3), ValidationError);
}

TEST_CASE("purity ignores label and cluster names")
{
    Rng rng(3);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<std::size_t> assign(50);
        std::vector<int> labels(50);
        for (std::size_t i = 0; i < 50; ++i) {
            assign[i] = rng.index(8);
            labels[i] = static_cast<int>(rng.index(3));
        }
        const std::size_t cperm[8] = {5, 3, 7, 0, 1, 6, 2, 4};
        const int lperm[3] = {2, 0, 1};
        std::vector<std::size_t> a2(50);
        std::vector<int> l2(50);
        for (std::size_t i = 0; i < 50; ++i) {
            a2[i] = cperm[assign[i]];
            l2[i] = lperm[labels[i]];
        }
        const auto p = purity(assign, labels);
        CHECK(purity(a2, l2).purity == doctest::Approx(p.purity).epsilon(1e-15));
        CHECK(p.purity > 0.0);
        CHECK(p.purity <= 1.0);
    }
}

TEST_CASE("variant catalogue and grid combinatorics")
{
    const auto variants = standard_variants();
    REQUIRE(variants.size() == 16);
    std::set<std::string> names;
    std::size_t clara_n = 0, agglo_n = 0;
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(variants[i].id == i + 1);
        names.insert(variants[i].name());
        clara_n += variants[i].algorithm == Algorithm::clara;
        agglo_n += variants[i].algorithm == Algorithm::agglomerative;
    }
    CHECK(names.size() == 16);
    CHECK(clara_n == 10);
    CHECK(agglo_n == 4);
    CHECK(variants[0].name() == "kmeans");
    CHECK(variants[1].name() == "bisecting");

    const auto ks = standard_k_values();
    CHECK(ks.size() == 25);
    CHECK(ks.front() == 50);
    CHECK(ks.back() == 1500);

    const auto sets = standard_feature_sets(kBlocks);
    REQUIRE(sets.size() == 4);
    CHECK(sets.back().name == "all");

    GridSpec spec;
    spec.variants = variants;
    spec.feature_sets = sets;
    spec.k_values = ks;
    const auto cells = enumerate_cells(spec);
    CHECK(cells.size() == 16000);
    std::set<std::string> keys;
    std::set<std::uint64_t> seeds;
    for (const auto& c : cells) {
        keys.insert(c.key(spec));
        seeds.insert(cell_seed(spec, c));
    }
    CHECK(keys.size() == 16000);
    CHECK(seeds.size() == 16000);
}

TEST_CASE("purity grid runs cells and records failures")
{
    const auto c = corpus(120, 4);
    const auto scores = latent_scores(c);
    GridSpec spec;
    spec.variants = {standard_variants()[0], standard_variants()[6]};
    spec.feature_sets = standard_feature_sets(kBlocks);
    spec.k_values = {4, 500};
    spec.reps = 2;
    spec.seed = 9;
    const auto r = purity_grid(c.data, scores, spec);
    CHECK(r.cells == 2 * 4 * 2 * 2);
    CHECK(r.rows.size() == 2 * r.cells);
    CHECK(r.failed_cells == 2 * 4 * 2);
    for (const auto& x : r.rows) {
        if (x.k == 500) {
            CHECK(!x.ok);
            CHECK(!x.error.empty());
        } else {
            CHECK(x.ok);
            CHECK(x.purity > 0.0);
            CHECK(x.purity <= 1.0);
        }
    }

    const auto again = purity_grid(c.data, scores, spec);
    std::stringstream s1, s2;
    write_purity(s1, r.rows);
    write_purity(s2, again.rows);
    CHECK(s1.str() == s2.str());

    std::stringstream copy(s1.str());
    const auto back = read_purity(copy);
    REQUIRE(back.size() == r.rows.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].variant == r.rows[i].variant);
        CHECK(back[i].ok == r.rows[i].ok);
        CHECK(back[i].k == r.rows[i].k);
        if (back[i].ok)
            CHECK(back[i].purity == doctest::Approx(r.rows[i].purity).epsilon(1e-8));
    }

    GridSpec one = spec;
    one.variants = {spec.variants[1]};
    one.feature_sets = {spec.feature_sets[0]};
    one.k_values = {3};
    one.reps = 1;
    CHECK(purity_grid(c.data, scores, one).rows.size() == 2);
}

TEST_CASE("variant comparisons")
{
    Rng rng(5);
    std::vector<PurityResult> rows;
    for (const std::string v : {"alpha", "beta", "gamma"})
        for (int i = 0; i < 30; ++i)
            rows.push_back(row(v, 0.5 + 0.05 * rng.normal() + (v == "gamma" ? 0.2 : 0.0)));
    PurityResult failed = row("alpha", 0.0);
    failed.ok = false;
    rows.push_back(failed);

    const auto cmp = compare_variants(rows, GroupBy::variant);
    REQUIRE(cmp.size() == 3);
    for (const auto& c : cmp) {
        CHECK(c.n_a == 30);
        CHECK(c.n_b == 30);
        CHECK(c.a < c.b);
        if (c.b == "gamma") {
            CHECK(c.p < 0.05);
            CHECK(c.median_b > c.median_a);
        }
    }

    // Swapping group names leaves p unchanged.
    auto swapped = rows;
    for (auto& r : swapped)
        r.variant = r.variant == "alpha" ? "beta" : r.variant == "beta" ? "alpha" : r.variant;
    const auto cmp2 = compare_variants(swapped, GroupBy::variant);
    CHECK(cmp2[0].p == doctest::Approx(cmp[0].p).epsilon(1e-12));
    CHECK(cmp2[0].u == doctest::Approx(900.0 - cmp[0].u));

    // Identical groups.
    std::vector<PurityResult> twin;
    for (double v : {0.4, 0.5, 0.5, 0.6}) {
        twin.push_back(row("x", v));
        twin.push_back(row("y", v));
    }
    CHECK(compare_variants(twin, GroupBy::variant)[0].p == 1.0);

    // A group with one value is dropped; then too few groups remain.
    std::vector<PurityResult> thin{row("x", 0.1), row("x", 0.2), row("y", 0.3)};
    CHECK_THROWS_AS(compare_variants(thin, GroupBy::variant), ValidationError);

    CHECK(group_key(row("clara-cosine-kpp", 0.5), GroupBy::algorithm) == "clara");
    CHECK(group_key(row("clara-cosine-kpp", 0.5), GroupBy::metric) == "cosine");
    CHECK(group_key(row("clara-cosine-kpp", 0.5), GroupBy::init) == "kpp");
    CHECK(group_key(row("kmeans", 0.5), GroupBy::metric) == "euclidean");
    CHECK(group_key(row("kmeans", 0.5, "b"), GroupBy::feature_set) == "b");
    CHECK(parse_group_by("metric") == GroupBy::metric);
}

TEST_CASE("variance comparison")
{
    Rng rng(6);
    std::vector<ScoreRecord> mined, random;
    for (int i = 0; i < 300; ++i) {
        mined.push_back({"m", 0.6 * rng.normal(), 0.6 * rng.normal()});
        random.push_back({"r", 0.2 * rng.normal(), 0.6 * rng.normal()});
    }
    const auto r = compare_variances(mined, random);
    REQUIRE(r.size() == 2);
    CHECK(r[0].dimension == Dimension::valence);
    CHECK(r[0].test.p < 1e-6);
    CHECK(r[0].sd_mined > r[0].sd_random);
    CHECK(r[1].test.p > 1e-3);
    CHECK(r[0].n_mined == 300);
}

TEST_CASE("diversity sizes")
{
    const auto s = default_diversity_sizes();
    CHECK(s.front() == 10);
    CHECK(s.back() == 1500);
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
    CHECK(log_spaced_sizes(3, 3, 5) == std::vector<std::size_t>{3});
    CHECK(default_runs(Strategy::random) == 100);
    CHECK(default_runs(Strategy::clara) == 5);
    CHECK(parse_strategy("faft_kmedoids") == Strategy::faft_kmedoids);
}

TEST_CASE("diversity selections")
{
    const auto m = support::random_matrix(80, 3, 7);
    for (Strategy st : kAllStrategies) {
        DiversitySpec spec;
        spec.strategy = st;
        spec.sizes = {5, 12, 30};
        spec.seed = 2;
        const auto sel = diversity_selections(m, spec, 0);
        REQUIRE(sel.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(sel[i].size() == spec.sizes[i]);
            CHECK(std::set<std::size_t>(sel[i].begin(), sel[i].end()).size() == spec.sizes[i]);
        }
        if (st == Strategy::random || st == Strategy::faft)
            CHECK(std::equal(sel[0].begin(), sel[0].end(), sel[2].begin()));
        CHECK(diversity_selections(m, spec, 0) == sel);
        spec.sizes = {81};
        CHECK_THROWS(diversity_selections(m, spec, 0));
    }
}

TEST_CASE("diversity curves")
{
    const auto m = support::random_matrix(60, 2, 8);
    std::vector<double> flat(60, 0.3);
    DiversitySpec spec;
    spec.sizes = {5, 20, 60};
    spec.runs = 7;
    for (Strategy st : kAllStrategies) {
        spec.strategy = st;
        const auto c = diversity_curve(m, flat, spec);
        for (const auto& p : c.points)
            CHECK(p.sd_mean == 0.0);
    }

    Rng rng(9);
    std::vector<double> v(60);
    for (auto& x : v)
        x = rng.normal();
    spec.strategy = Strategy::random;
    const auto c = diversity_curve(m, v, spec);
    CHECK(c.runs == 7);
    CHECK(c.points.back().n_samples == 60);
    CHECK(c.points.back().sd_mean == doctest::Approx(population_sd(v)).epsilon(1e-12));
    CHECK(c.points.back().sd_stderr == doctest::Approx(0.0).epsilon(1e-12));
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        double mu = 0.0, var = 0.0;
        for (double x : c.run_sd[i])
            mu += x / 7;
        for (double x : c.run_sd[i])
            var += (x - mu) * (x - mu) / 6;
        CHECK(c.points[i].sd_mean == doctest::Approx(mu).epsilon(1e-12));
        CHECK(c.points[i].sd_stderr == doctest::Approx(std::sqrt(var / 7)).epsilon(1e-9));
    }
}

TEST_CASE("random diversity matches a direct Monte Carlo")
{
    const auto m = support::random_matrix(200, 2, 10);
    Rng rng(11);
    std::vector<double> v(200);
    for (auto& x : v)
        x = rng.uniform() < 0.05 ? 3.0 * rng.normal() : rng.normal();
    DiversitySpec spec;
    spec.strategy = Strategy::random;
    spec.sizes = {10, 40};
    spec.runs = 100;
    spec.seed = 12;
    const auto c = diversity_curve(m, v, spec);

    Rng mc(999);
    for (std::size_t p = 0; p < 2; ++p) {
        const std::size_t size = spec.sizes[p];
        double total = 0.0;
        for (int r = 0; r < 1000; ++r) {
            std::vector<double> pick;
            for (std::size_t i : mc.sample_without_replacement(200, size))
                pick.push_back(v[i]);
            total += population_sd(pick);
        }
        const double direct = total / 1000;
        CHECK(std::abs(c.points[p].sd_mean - direct) <= 3.0 * c.points[p].sd_stderr);
    }
}

TEST_CASE("farthest-first selections are more diverse on a planted tail")
{
    const auto c = corpus(1000, 13);
    const auto scores = latent_scores(c);
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        DiversitySpec spec;
        spec.sizes = {50, 200};
        spec.seed = seed;
        spec.runs = 5;
        spec.strategy = Strategy::random;
        const auto rnd = diversity_curves(c.data.features(), scores, spec);
        spec.strategy = Strategy::faft;
        const auto ff = diversity_curves(c.data.features(), scores, spec);
        bool all = true;
        for (std::size_t p = 0; p < 2; ++p)
            all = all && ff[0].points[p].sd_mean > rnd[0].points[p].sd_mean;
        wins += all;
    }
    CHECK(wins >= 4);
}

TEST_CASE("CSV writers")
{
    Comparison cmp{"a", "b", 3, 4, 2.0, 0.5, 0.1, 0.2};
    std::stringstream s;
    write_comparisons(s, std::vector<Comparison>{cmp});
    CHECK(s.str().rfind("comparison,U,p,n_a,n_b,median_a,median_b\na vs b,", 0) == 0);

    DiversityCurve curve;
    curve.runs = 5;
    curve.points = {{10, 0.5, 0.01}};
    std::stringstream t;
    write_curves(t, std::vector<DiversityCurve>{curve});
    CHECK(t.str().rfind("strategy,feature_set,dimension,n_samples,sd_mean,sd_stderr,runs\nrandom,all,valence,10,", 0) == 0);

    std::stringstream bad("variant,feature_set,k,rep,dimension,purity,n_excluded,variant_id,status\nx,all,zz,0,valence,0.5,0,1,ok\n");
    CHECK_THROWS_AS(read_purity(bad), ParseError);
}
