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

// Parallel kernels against their serial references. Thread count comes from
// OMP_NUM_THREADS.

#include "divmine/cluster.hpp"
#include "divmine/kernels.hpp"
#include "divmine/rng.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace divmine;

namespace {

FeatureMatrix make_data(std::size_t n, std::size_t d)
{
    Rng rng(1);
    std::vector<double> v(n * d);
    for (auto& x : v)
        x = rng.normal();
    return FeatureMatrix(n, d, std::move(v));
}

std::vector<std::size_t> spread(std::size_t n, std::size_t k)
{
    std::vector<std::size_t> out(k);
    for (std::size_t c = 0; c < k; ++c)
        out[c] = c * (n / k);
    return out;
}

template <bool Parallel>
void pairwise(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto data = make_data(n, 51);
    DistanceTable table(n);
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::pairwise_fill(data, Metric::euclidean, table);
        else
            kernels::serial::pairwise_fill(data, Metric::euclidean, table);
        benchmark::DoNotOptimize(table(0, n - 1));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * (n - 1) / 2));
}

template <bool Parallel>
void assign_medoids(benchmark::State& state)
{
    const std::size_t n = 100000;
    const auto k = static_cast<std::size_t>(state.range(0));
    const auto data = make_data(n, 51);
    const auto medoids = spread(n, k);
    std::vector<std::size_t> assign(n);
    std::vector<double> dist(n);
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::assign_to_medoids(data, medoids, Metric::euclidean, assign, dist);
        else
            kernels::serial::assign_to_medoids(data, medoids, Metric::euclidean, assign, dist);
        benchmark::DoNotOptimize(dist.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * k));
}

template <bool Parallel>
void medoid_update(benchmark::State& state)
{
    const std::size_t n = 3040, k = 1500;
    const auto data = make_data(n, 51);
    const Distances d(data, Metric::euclidean);
    std::vector<std::vector<std::size_t>> members(k / 10);
    for (std::size_t i = 0; i < n; ++i)
        members[i % members.size()].push_back(i);
    std::vector<std::size_t> current(members.size()), out(members.size());
    for (std::size_t c = 0; c < members.size(); ++c)
        current[c] = members[c][0];
    for (auto _ : state) {
        if constexpr (Parallel)
            kernels::cluster_medoids(d, members, current, out);
        else
            kernels::serial::cluster_medoids(d, members, current, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void clara_end_to_end(benchmark::State& state)
{
    const auto data = make_data(20000, 51);
    ClusteringConfig cfg;
    cfg.k = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        const auto r = clara(data, cfg);
        benchmark::DoNotOptimize(r.cost);
    }
}

} // namespace

BENCHMARK(pairwise<false>)->Name("pairwise/serial")->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK(pairwise<true>)->Name("pairwise/parallel")->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK(assign_medoids<false>)->Name("assign_medoids/serial")->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(assign_medoids<true>)->Name("assign_medoids/parallel")->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(medoid_update<false>)->Name("medoid_update/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(medoid_update<true>)->Name("medoid_update/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(clara_end_to_end)->Name("clara/n=20000")->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
