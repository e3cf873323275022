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

#include "divmine/select.hpp"

#include "divmine/error.hpp"
#include "divmine/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <exception>
#include <charconv>
#include <istream>
#include <ostream>

namespace divmine {

namespace {

struct ClusterPick {
    std::vector<SelectedSample> picks;
    std::vector<std::size_t> source_shortfall; // per plan source
    std::size_t open_shortfall = 0;            // cluster simply too small
};

ClusterPick pick_cluster(std::size_t cluster, std::size_t medoid, const std::vector<std::size_t>& members,
                         const Dataset& data, const SelectionPlan& plan, Metric metric)
{
    ClusterPick out;
    out.source_shortfall.assign(plan.sources.size(), 0);

    std::vector<std::pair<double, std::size_t>> ranked;
    ranked.reserve(members.size());
    const auto centre = data.features().row(medoid);
    for (std::size_t i : members)
        if (i != medoid)
            ranked.emplace_back(distance(data.features().row(i), centre, metric), i);
    std::sort(ranked.begin(), ranked.end());

    std::vector<char> taken(ranked.size(), 0);
    auto add = [&](std::size_t idx, Provenance p) {
        out.picks.push_back({idx, data.meta(idx).sample_id, p, cluster, data.meta(idx).source});
    };
    add(medoid, Provenance::medoid);

    std::size_t reserved = 0;
    for (std::size_t s = 0; s < plan.sources.size(); ++s) {
        const std::string& source = plan.sources[s];
        std::size_t have = 0;
        for (const auto& p : out.picks)
            have += p.source == source;
        for (std::size_t r = 0; r < ranked.size() && have < plan.per_source_quota; ++r) {
            if (taken[r] || data.meta(ranked[r].second).source != source)
                continue;
            taken[r] = 1;
            add(ranked[r].second, Provenance::neighbor);
            ++have;
        }
        if (have < plan.per_source_quota) {
            out.source_shortfall[s] = plan.per_source_quota - have;
            reserved += out.source_shortfall[s];
        }
    }

    const std::size_t target = plan.per_cluster - std::min(plan.per_cluster, reserved);
    for (std::size_t r = 0; r < ranked.size() && out.picks.size() < target; ++r) {
        if (taken[r])
            continue;
        taken[r] = 1;
        add(ranked[r].second, Provenance::neighbor);
    }
    out.open_shortfall = target > out.picks.size() ? target - out.picks.size() : 0;
    return out;
}

// Draws `count` unselected samples (optionally of one source) uniformly.
std::vector<std::size_t> draw_unselected(const Dataset& data, const std::vector<char>& selected, const std::string* source,
                                         std::size_t count, Rng& rng)
{
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (!selected[i] && (!source || data.meta(i).source == *source))
            pool.push_back(i);
    if (pool.size() < count)
        throw ValidationError("top-up needs " + std::to_string(count) + " unselected samples" +
                              (source ? " of source '" + *source + "'" : std::string()) + " but only " +
                              std::to_string(pool.size()) + " remain (deficit " + std::to_string(count - pool.size()) +
                              ")");
    std::vector<std::size_t> out;
    for (std::size_t j : rng.sample_without_replacement(pool.size(), count))
        out.push_back(pool[j]);
    return out;
}

std::string_view trim(std::string_view s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos)
        return {};
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

bool read_row(std::istream& in, std::string& line, std::size_t& lineno)
{
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (trim(line).empty() || line[0] == '#')
            continue;
        return true;
    }
    return false;
}

std::size_t parse_index(std::string_view text, const std::string& origin, std::size_t lineno)
{
    text = trim(text);
    std::size_t v = 0;
    const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    if (r.ec != std::errc() || r.ptr != text.data() + text.size())
        throw ParseError(origin, lineno, "bad integer '" + std::string(text) + "'");
    return v;
}

} // namespace

std::string_view provenance_name(Provenance p)
{
    switch (p) {
    case Provenance::medoid: return "medoid";
    case Provenance::neighbor: return "neighbor";
    case Provenance::topup: return "topup";
    case Provenance::random_baseline: return "random_baseline";
    }
    return "?";
}

void SelectionPlan::validate() const
{
    if (per_cluster < 1)
        throw ConfigError("per_cluster must be >= 1");
    if (per_source_quota * sources.size() > per_cluster)
        throw ConfigError("per-source quota " + std::to_string(per_source_quota) + " x " +
                          std::to_string(sources.size()) + " sources exceeds per_cluster = " +
                          std::to_string(per_cluster));
}

std::map<std::string, std::size_t> SelectedSet::per_source_counts() const
{
    std::map<std::string, std::size_t> out;
    for (const auto& s : samples)
        ++out[s.source];
    return out;
}

std::size_t SelectedSet::count(Provenance p) const
{
    return static_cast<std::size_t>(
        std::count_if(samples.begin(), samples.end(), [p](const SelectedSample& s) { return s.provenance == p; }));
}

std::unordered_set<std::size_t> SelectedSet::indices() const
{
    std::unordered_set<std::size_t> out;
    for (const auto& s : samples)
        out.insert(s.index);
    return out;
}

SelectedSet medoid_neighborhood_select(const ClusteringResult& clustering, const Dataset& data,
                                       const SelectionPlan& plan, Metric metric)
{
    plan.validate();
    if (clustering.medoids.empty())
        throw ConfigError("selection needs a medoid-based clustering");
    if (clustering.assignment.size() != data.size())
        throw ConfigError("clustering covers " + std::to_string(clustering.assignment.size()) +
                          " samples but the dataset has " + std::to_string(data.size()));
    const std::size_t k = clustering.medoids.size();
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < data.size(); ++i)
        members.at(clustering.assignment[i]).push_back(i);

    std::vector<ClusterPick> per_cluster(k);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(k); ++c) {
        const auto cc = static_cast<std::size_t>(c);
        try {
            per_cluster[cc] = pick_cluster(cc, clustering.medoids[cc], members[cc], data, plan, metric);
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
    if (failure)
        std::rethrow_exception(failure);

    SelectedSet out;
    std::vector<char> selected(data.size(), 0);
    for (const auto& cp : per_cluster)
        for (const auto& p : cp.picks) {
            if (selected[p.index])
                throw ValidationError("sample '" + p.sample_id + "' selected twice");
            selected[p.index] = 1;
            out.samples.push_back(p);
        }

    // Global top-up: one seeded stream, sources in plan order, then the
    // open (source-free) shortfalls.
    Rng rng(plan.random_topup_seed);
    auto fill = [&](const std::string* source, const std::vector<std::size_t>& owners) {
        if (owners.empty())
            return;
        const auto drawn = draw_unselected(data, selected, source, owners.size(), rng);
        for (std::size_t j = 0; j < drawn.size(); ++j) {
            const std::size_t idx = drawn[j];
            selected[idx] = 1;
            out.samples.push_back({idx, data.meta(idx).sample_id, Provenance::topup, owners[j], data.meta(idx).source});
        }
    };
    std::vector<std::size_t> open_owners;
    if (plan.topup == TopupMode::source_matched) {
        for (std::size_t s = 0; s < plan.sources.size(); ++s) {
            std::vector<std::size_t> owners;
            for (std::size_t c = 0; c < k; ++c)
                owners.insert(owners.end(), per_cluster[c].source_shortfall[s], c);
            fill(&plan.sources[s], owners);
        }
    } else {
        for (std::size_t c = 0; c < k; ++c) {
            std::size_t total = 0;
            for (std::size_t v : per_cluster[c].source_shortfall)
                total += v;
            open_owners.insert(open_owners.end(), total, c);
        }
    }
    for (std::size_t c = 0; c < k; ++c)
        open_owners.insert(open_owners.end(), per_cluster[c].open_shortfall, c);
    fill(nullptr, open_owners);
    return out;
}

SelectedSet random_select(const Dataset& data, const std::vector<std::pair<std::string, std::size_t>>& quotas,
                          std::uint64_t seed, const std::unordered_set<std::size_t>& exclude)
{
    Rng rng(seed);
    SelectedSet out;
    for (const auto& [source, quota] : quotas) {
        std::vector<std::size_t> pool;
        for (std::size_t i = 0; i < data.size(); ++i)
            if (data.meta(i).source == source && !exclude.contains(i))
                pool.push_back(i);
        if (quota > pool.size())
            throw ValidationError("random quota " + std::to_string(quota) + " for source '" + source +
                                  "' exceeds its available population of " + std::to_string(pool.size()));
        std::vector<std::size_t> drawn;
        for (std::size_t j : rng.sample_without_replacement(pool.size(), quota))
            drawn.push_back(pool[j]);
        std::sort(drawn.begin(), drawn.end());
        for (std::size_t idx : drawn)
            out.samples.push_back({idx, data.meta(idx).sample_id, Provenance::random_baseline, kNoCluster, source});
    }
    return out;
}

SelectedSet combine(const SelectedSet& a, const SelectedSet& b)
{
    SelectedSet out = a;
    auto seen = a.indices();
    for (const auto& s : b.samples) {
        if (!seen.insert(s.index).second)
            throw ValidationError("sample '" + s.sample_id + "' appears in both selections");
        out.samples.push_back(s);
    }
    return out;
}

void write_selection(std::ostream& out, const SelectedSet& set)
{
    out << "sample_id,provenance,cluster,source\n";
    for (const auto& s : set.samples) {
        out << s.sample_id << ',' << provenance_name(s.provenance) << ',';
        if (s.cluster != kNoCluster)
            out << s.cluster;
        out << ',' << s.source << '\n';
    }
}

SelectedSet read_selection(std::istream& in, const Dataset& data, const std::string& origin)
{
    std::string line;
    std::size_t lineno = 0;
    if (!read_row(in, line, lineno) || trim(line) != "sample_id,provenance,cluster,source")
        throw ParseError(origin, lineno, "header must be 'sample_id,provenance,cluster,source'");
    SelectedSet out;
    while (read_row(in, line, lineno)) {
        const auto f = split_csv(line);
        if (f.size() != 4)
            throw ParseError(origin, lineno, "expected 4 fields");
        SelectedSample s;
        s.sample_id = std::string(trim(f[0]));
        const auto idx = data.index_of(s.sample_id);
        if (!idx)
            throw ParseError(origin, lineno, "unknown sample '" + s.sample_id + "'");
        s.index = *idx;
        const auto prov = trim(f[1]);
        bool known = false;
        for (Provenance p : {Provenance::medoid, Provenance::neighbor, Provenance::topup, Provenance::random_baseline})
            if (provenance_name(p) == prov) {
                s.provenance = p;
                known = true;
            }
        if (!known)
            throw ParseError(origin, lineno, "unknown provenance '" + std::string(prov) + "'");
        s.cluster = trim(f[2]).empty() ? kNoCluster : parse_index(f[2], origin, lineno);
        s.source = std::string(trim(f[3]));
        out.samples.push_back(std::move(s));
    }
    return out;
}

void write_clustering(std::ostream& out, const ClusteringResult& result, const Dataset& data)
{
    std::vector<char> is_medoid(data.size(), 0);
    for (std::size_t m : result.medoids)
        is_medoid[m] = 1;
    out << "sample_id,cluster,is_medoid\n";
    for (std::size_t i = 0; i < data.size(); ++i)
        out << data.meta(i).sample_id << ',' << result.assignment[i] << ',' << (is_medoid[i] ? 1 : 0) << '\n';
}

ClusteringResult read_clustering(std::istream& in, const Dataset& data, const std::string& origin)
{
    std::string line;
    std::size_t lineno = 0;
    if (!read_row(in, line, lineno) || trim(line) != "sample_id,cluster,is_medoid")
        throw ParseError(origin, lineno, "header must be 'sample_id,cluster,is_medoid'");
    ClusteringResult r;
    r.assignment.assign(data.size(), kNoCluster);
    std::map<std::size_t, std::size_t> medoid_of;
    while (read_row(in, line, lineno)) {
        const auto f = split_csv(line);
        if (f.size() != 3)
            throw ParseError(origin, lineno, "expected 3 fields");
        const auto idx = data.index_of(trim(f[0]));
        if (!idx)
            throw ParseError(origin, lineno, "unknown sample '" + std::string(trim(f[0])) + "'");
        if (r.assignment[*idx] != kNoCluster)
            throw ParseError(origin, lineno, "sample listed twice");
        const std::size_t c = parse_index(f[1], origin, lineno);
        r.assignment[*idx] = c;
        r.k = std::max(r.k, c + 1);
        const auto flag = trim(f[2]);
        if (flag == "1") {
            if (!medoid_of.emplace(c, *idx).second)
                throw ParseError(origin, lineno, "cluster " + std::to_string(c) + " has two medoids");
        } else if (flag != "0") {
            throw ParseError(origin, lineno, "is_medoid must be 0 or 1");
        }
    }
    for (std::size_t i = 0; i < data.size(); ++i)
        if (r.assignment[i] == kNoCluster)
            throw ParseError(origin, lineno, "sample '" + data.meta(i).sample_id + "' missing from clustering");
    if (!medoid_of.empty()) {
        if (medoid_of.size() != r.k)
            throw ParseError(origin, lineno, "some clusters have no medoid");
        for (const auto& [c, m] : medoid_of)
            r.medoids.push_back(m);
    }
    return r;
}

} // namespace divmine
