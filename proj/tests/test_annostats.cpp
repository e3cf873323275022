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

#include "divmine/annostats.hpp"
#include "divmine/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

using namespace divmine;

namespace {

std::vector<AnnotationRecord> one_annotator(const std::string& who, const std::vector<double>& v,
                                            const std::vector<double>& a)
{
    std::vector<AnnotationRecord> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back({"s" + std::to_string(i), who, v[i], a[i]});
    return out;
}

GoldMatrix empty_gold(std::size_t annotators, std::size_t samples)
{
    GoldMatrix g;
    for (std::size_t s = 0; s < samples; ++s)
        g.sample_ids.push_back("s" + std::to_string(s));
    for (std::size_t a = 0; a < annotators; ++a)
        g.annotators.push_back("a" + std::to_string(a));
    g.valence.assign(annotators * samples, 0.0);
    g.arousal.assign(annotators * samples, 0.0);
    return g;
}

// Inner samples: everyone rates inside (-0.079, 0.079). Outer samples share
// a sign with magnitudes in [0.121, 0.6]. Perfect agreement exactly when
// 0.079 <= t < 0.121.
GoldMatrix banded_gold(std::uint64_t seed)
{
    Rng rng(seed);
    const std::size_t annotators = 5, samples = 120;
    auto g = empty_gold(annotators, samples);
    for (std::size_t s = 0; s < samples; ++s) {
        const bool inner = s % 3 == 0;
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        for (std::size_t a = 0; a < annotators; ++a) {
            const double u = rng.uniform();
            g.valence[a * samples + s] = inner ? (2 * u - 1) * 0.079 : sign * (0.121 + u * (0.6 - 0.121));
            g.arousal[a * samples + s] = sign;
        }
    }
    return g;
}

} // namespace

TEST_CASE("normalize_ratings")
{
    const auto recs = one_annotator("x", {-0.5, 0.0, 1.0}, {0.3, 0.3, 0.3});
    const auto n = normalize_ratings(recs);
    CHECK(n.records[0].valence == doctest::Approx(-0.8).epsilon(1e-12));
    CHECK(n.records[1].valence == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK(n.records[2].valence == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& r : n.records)
        CHECK(r.arousal == 0.0);
    REQUIRE(n.annotators.size() == 1);
    CHECK(n.annotators[0].arousal.degenerate);
    CHECK(!n.annotators[0].valence.degenerate);

    // Twin annotators, rank preservation and the max-abs contract.
    Rng rng(5);
    std::vector<double> v(30), a(30);
    for (std::size_t i = 0; i < 30; ++i) {
        v[i] = rng.uniform() * 2 - 1;
        a[i] = rng.normal();
    }
    auto both = one_annotator("p", v, a);
    const auto twin = one_annotator("q", v, a);
    both.insert(both.end(), twin.begin(), twin.end());
    const auto nn = normalize_ratings(both);
    double max_v = 0.0;
    for (std::size_t i = 0; i < 30; ++i) {
        CHECK(nn.records[i].valence == nn.records[30 + i].valence);
        max_v = std::max(max_v, std::abs(nn.records[i].valence));
        for (std::size_t j = 0; j < 30; ++j)
            if (v[i] < v[j])
                CHECK(nn.records[i].valence < nn.records[j].valence);
    }
    CHECK(max_v == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("aggregate_gs and consensus")
{
    std::vector<AnnotationRecord> recs{{"g", "a", 0.2, 0.0}, {"g", "b", 0.4, 1.0}, {"h", "a", 0.0, 0.0},
                                       {"lone", "a", 0.9, 0.9}};
    NormalizedRatings n;
    n.records = recs;
    const std::vector<std::string> gs{"g"};
    const auto m = aggregate_gs(n, gs);
    REQUIRE(m.size() == 1);
    CHECK(m[0].valence == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(m[0].arousal == doctest::Approx(0.5).epsilon(1e-12));

    const std::vector<std::string> bad{"g", "h", "lone"};
    try {
        aggregate_gs(n, bad);
        FAIL("expected a ValidationError");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("h") != std::string::npos);
        CHECK(msg.find("lone") != std::string::npos);
    }

    NormalizedRatings five;
    const std::vector<double> vals{0.1, -0.3, 0.7, 0.2, 0.05};
    for (std::size_t i = 0; i < 5; ++i)
        five.records.push_back({"z", "a" + std::to_string(i), vals[i], 0.25});
    const auto z = aggregate_gs(five, std::vector<std::string>{"z"});
    CHECK(z[0].valence == doctest::Approx(std::accumulate(vals.begin(), vals.end(), 0.0) / 5).epsilon(1e-12));
    CHECK(z[0].arousal == 0.25);

    const auto c = consensus_scores(n);
    REQUIRE(c.size() == 3);
    CHECK(c[0].sample_id == "g");
    CHECK(c[2].sample_id == "lone");
    CHECK(c[2].valence == 0.9);
}

TEST_CASE("discretize boundaries")
{
    CHECK(arousal_class(0.0) == kLow);
    CHECK(arousal_class(1e-12) == kHigh);
    CHECK(valence_class(-0.08, 0.08) == kNegative);
    CHECK(valence_class(0.08, 0.08) == kNeutral);
    CHECK(valence_class(0.5, 0.08) == kPositive);
    CHECK(valence_class(-0.0799, 0.08) == kNeutral);
    CHECK(valence_class(0.0801, 0.08) == kPositive);
    CHECK(valence_class(0.0, 0.0) == kNegative); // neutral is empty at t = 0

    const std::vector<double> s{-0.08, 0.08, 0.0, 0.3};
    const auto d = discretize(s, Dimension::valence);
    CHECK(d.threshold == kDefaultValenceThreshold);
    CHECK(d.labels == std::vector<int>{kNegative, kNeutral, kNeutral, kPositive});
    CHECK(discretize(s, Dimension::arousal).labels == std::vector<int>{kLow, kHigh, kLow, kHigh});
    CHECK_THROWS_AS(discretize(s, Dimension::valence, -0.01), ConfigError);

    // Labels written back as canonical scores are fixed points for 0 < t < 1.
    const std::vector<double> canon{-1.0, 0.0, 1.0};
    for (double t : {0.001, 0.08, 0.5, 0.99})
        CHECK(discretize(canon, Dimension::valence, t).labels == std::vector<int>{kNegative, kNeutral, kPositive});
    const std::vector<double> canon_a{0.0, 1.0};
    CHECK(discretize(canon_a, Dimension::arousal).labels == std::vector<int>{kLow, kHigh});
}

TEST_CASE("majority vote")
{
    const std::vector<std::vector<int>> valence{{kNegative, kPositive}, {kNeutral, kPositive}, {kPositive, kNegative}};
    CHECK(majority_vote(valence, Dimension::valence) == std::vector<int>{kNeutral, kPositive});
    const std::vector<std::vector<int>> arousal{{kHigh}, {kHigh}, {kLow}, {kLow}};
    CHECK(majority_vote(arousal, Dimension::arousal) == std::vector<int>{kLow});
    const std::vector<std::vector<int>> unrated{{kHigh, -1}, {-1, kLow}, {kHigh, kLow}};
    CHECK(majority_vote(unrated, Dimension::arousal) == std::vector<int>{kHigh, kLow});

    Rng rng(2);
    std::vector<std::vector<int>> odd(5, std::vector<int>(50));
    for (auto& a : odd)
        for (auto& x : a)
            x = static_cast<int>(rng.index(2));
    const auto vote = majority_vote(odd, Dimension::arousal);
    for (std::size_t s = 0; s < 50; ++s) {
        int high = 0;
        for (const auto& a : odd)
            high += a[s];
        CHECK(vote[s] == (high >= 3 ? kHigh : kLow));
    }
}

TEST_CASE("Cohen's kappa")
{
    const std::vector<int> a{kPositive, kPositive, kNegative, kNegative};
    const std::vector<int> b{kPositive, kNegative, kNegative, kNegative};
    CHECK(std::abs(cohens_kappa(a, b) - 0.5) <= 1e-12);
    CHECK(cohens_kappa(a, a) == 1.0);
    const std::vector<int> flat{kNeutral, kNeutral};
    CHECK(cohens_kappa(flat, flat) == 1.0);
    CHECK_THROWS_AS(cohens_kappa(a, flat), ConfigError);

    Rng rng(8);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<int> x(40), y(40);
        for (std::size_t i = 0; i < 40; ++i) {
            x[i] = static_cast<int>(rng.index(3));
            y[i] = rng.uniform() < 0.6 ? x[i] : static_cast<int>(rng.index(3));
        }
        const int perm[3] = {2, 0, 1};
        std::vector<int> px(40), py(40);
        for (std::size_t i = 0; i < 40; ++i) {
            px[i] = perm[x[i]];
            py[i] = perm[y[i]];
        }
        CHECK(cohens_kappa(px, py) == doctest::Approx(cohens_kappa(x, y)).epsilon(1e-12));
        CHECK(cohens_kappa(x, y) <= 1.0);
    }

    std::vector<int> x(10000), y(10000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = static_cast<int>(rng.index(3));
        y[i] = static_cast<int>(rng.index(3));
    }
    CHECK(std::abs(cohens_kappa(x, y)) <= 0.03);
}

TEST_CASE("Spearman")
{
    const std::vector<double> x{1, 2, 3, 4}, y{1, 3, 2, 4};
    CHECK(std::abs(spearman(x, y) - 0.8) <= 1e-12);
    CHECK(spearman(x, x) == doctest::Approx(1.0).epsilon(1e-15));
    const std::vector<double> neg{-1, -2, -3, -4};
    CHECK(spearman(x, neg) == doctest::Approx(-1.0).epsilon(1e-15));

    Rng rng(4);
    std::vector<double> u(25), v(25), ev(25), cube(25);
    for (std::size_t i = 0; i < 25; ++i) {
        u[i] = rng.normal();
        v[i] = u[i] + rng.normal();
        ev[i] = std::exp(v[i]);
        cube[i] = u[i] * u[i] * u[i];
    }
    CHECK(std::abs(spearman(u, ev) - spearman(u, v)) <= 1e-12);
    CHECK(std::abs(spearman(cube, v) - spearman(u, v)) <= 1e-12);
    const std::vector<double> c{2, 2, 2, 2};
    CHECK(spearman(x, c) == 0.0);

    // Ties use mid-ranks: Pearson of [1.5,1.5,3,4] and [1,2,3,4].
    const std::vector<double> tied{5, 5, 6, 7};
    const std::vector<double> rx{1.5, 1.5, 3, 4}, ry{1, 2, 3, 4};
    const double mx = 2.5;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - mx);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - mx) * (ry[i] - mx);
    }
    CHECK(spearman(tied, x) == doctest::Approx(sxy / std::sqrt(sxx * syy)).epsilon(1e-12));
}

TEST_CASE("threshold search recovers a planted band")
{
    const auto grid = default_threshold_grid();
    REQUIRE(grid.size() == 101);
    CHECK(grid.front() == 0.0);
    CHECK(grid.back() == doctest::Approx(0.5));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto gold = banded_gold(seed);
        const auto r = optimize_valence_threshold(gold, grid);
        CHECK(r.best >= 0.08 - 1e-12);
        CHECK(r.best <= 0.12 + 1e-12);
        CHECK(std::find(grid.begin(), grid.end(), r.best) != grid.end());
        // Independent scan: the first grid point reaching the maximum.
        double top = -2.0;
        double arg = 0.0;
        for (double t : grid) {
            const double k = mean_kappa(gold, Dimension::valence, t);
            if (k > top) {
                top = k;
                arg = t;
            }
        }
        CHECK(r.best == arg);
        CHECK(top == doctest::Approx(1.0));
    }
}

TEST_CASE("threshold search tie rule and errors")
{
    auto gold = empty_gold(5, 40);
    Rng rng(1);
    for (std::size_t s = 0; s < 40; ++s) {
        const double v = rng.uniform() * 2 - 1, a = rng.normal();
        for (std::size_t k = 0; k < 5; ++k) {
            gold.valence[k * 40 + s] = v;
            gold.arousal[k * 40 + s] = a;
        }
    }
    const std::vector<double> grid{0.3, 0.1, 0.2};
    const auto r = optimize_valence_threshold(gold, grid);
    CHECK(r.best == 0.1);
    for (double k : r.mean_kappa)
        CHECK(k == 1.0);
    CHECK(optimize_valence_threshold(gold, grid, KappaMode::all_pairs).best == 0.1);
    CHECK_THROWS_AS(optimize_valence_threshold(gold, std::vector<double>{}), ConfigError);
    CHECK_THROWS_AS(optimize_valence_threshold(gold, std::vector<double>{0.1, -0.1}), ConfigError);

    const auto rep = agreement(gold, 0.08);
    CHECK(rep.spearman_valence == doctest::Approx(1.0));
    CHECK(rep.spearman_arousal == doctest::Approx(1.0));
    CHECK(rep.kappa_valence == 1.0);
    CHECK(rep.kappa_arousal == 1.0);

    const auto single = empty_gold(1, 10);
    CHECK_THROWS(optimize_valence_threshold(single, grid));
}

TEST_CASE("gold matrix from normalized ratings")
{
    std::vector<AnnotationRecord> recs{{"g1", "a", 0.1, 0.2}, {"g1", "b", 0.3, 0.4}, {"g2", "a", -0.5, 0.0},
                                       {"x", "a", 1.0, 1.0}};
    NormalizedRatings n;
    n.records = recs;
    const std::vector<std::string> ids{"g1", "g2"};
    const auto g = gold_matrix(n, ids);
    CHECK(g.sample_ids == ids);
    CHECK(g.annotators == std::vector<std::string>{"a", "b"});
    CHECK(g.at(Dimension::valence, 1, 0) == 0.3);
    CHECK(g.at(Dimension::arousal, 0, 1) == 0.0);
    CHECK(std::isnan(g.at(Dimension::valence, 1, 1)));
}
