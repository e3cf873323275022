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

#ifndef DIVMINE_SELECT_HPP
#define DIVMINE_SELECT_HPP

#include "divmine/cluster.hpp"
#include "divmine/dataio.hpp"
#include "divmine/metric.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace divmine {

enum class Provenance { medoid, neighbor, topup, random_baseline };
std::string_view provenance_name(Provenance p);

enum class TopupMode {
    source_matched, // a shortfall in source S is filled from S
    any_source,     // shortfalls are filled from the whole pool
};

struct SelectionPlan {
    std::size_t per_cluster = 6;
    std::size_t per_source_quota = 2;
    std::vector<std::string> sources;
    std::uint64_t random_topup_seed = 0;
    TopupMode topup = TopupMode::source_matched;

    void validate() const;
};

inline constexpr std::size_t kNoCluster = std::numeric_limits<std::size_t>::max();

struct SelectedSample {
    std::size_t index = 0;
    std::string sample_id;
    Provenance provenance = Provenance::medoid;
    std::size_t cluster = kNoCluster; // for top-ups: the cluster whose shortfall it fills
    std::string source;
};

struct SelectedSet {
    std::vector<SelectedSample> samples;

    std::size_t size() const noexcept { return samples.size(); }
    std::map<std::string, std::size_t> per_source_counts() const;
    std::size_t count(Provenance p) const;
    std::unordered_set<std::size_t> indices() const;
};

/// Mining selection. Per cluster: the medoid, then each source's quota from
/// that source's members nearest the medoid (the medoid counts toward its
/// own source), then the nearest remaining members. Slots a source could not
/// fill inside the cluster are drawn at random from unselected samples
/// across all clusters after every cluster is processed.
SelectedSet medoid_neighborhood_select(const ClusteringResult& clustering, const Dataset& data,
                                       const SelectionPlan& plan, Metric metric);

/// Uniform draws without replacement within each source. `quotas` is
/// processed in order; samples in `exclude` are never drawn.
SelectedSet random_select(const Dataset& data, const std::vector<std::pair<std::string, std::size_t>>& quotas,
                          std::uint64_t seed, const std::unordered_set<std::size_t>& exclude = {});

/// Concatenation; throws ValidationError on a duplicate sample id.
SelectedSet combine(const SelectedSet& a, const SelectedSet& b);

/// CSV `sample_id,provenance,cluster,source`.
void write_selection(std::ostream& out, const SelectedSet& set);
SelectedSet read_selection(std::istream& in, const Dataset& data, const std::string& origin = "<selection>");

/// CSV `sample_id,cluster,is_medoid`.
void write_clustering(std::ostream& out, const ClusteringResult& result, const Dataset& data);
ClusteringResult read_clustering(std::istream& in, const Dataset& data, const std::string& origin = "<clustering>");

} // namespace divmine

#endif
