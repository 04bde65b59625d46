// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "air/jacobian.hpp"
#include "air/loss.hpp"
#include "air/optimize.hpp"
#include "air/warp.hpp"

namespace {

air::Volume textured(const air::GridSpec& g, double period) {
    air::Volume v(g);
    std::int64_t i = 0;
    for (std::int64_t z = 0; z < g.dims[2]; ++z)
        for (std::int64_t y = 0; y < g.dims[1]; ++y)
            for (std::int64_t x = 0; x < g.dims[0]; ++x, ++i)
                v.data[static_cast<std::size_t>(i)] = static_cast<float>(
                    0.5 + 0.35 * std::sin(2 * M_PI * x / period) *
                              std::sin(2 * M_PI * (y + 1.3) / period) *
                              std::sin(2 * M_PI * (z + 0.7) / period));
    return v;
}

air::DisplacementField random_field(const air::GridSpec& g, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    air::DisplacementField f(g);
    for (auto& u : f.u)
        u = 0.8 * ((static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53 - 0.5);
    return f;
}

void BM_Warp(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    const air::GridSpec g(n, n, n);
    const air::Volume v = textured(g, 9.0);
    const air::DisplacementField f = random_field(g, 1);
    for (auto _ : state) {
        auto out = air::warp(v, f);
        benchmark::DoNotOptimize(out.data.data());
    }
    state.SetItemsProcessed(state.iterations() * g.voxel_count());
}
BENCHMARK(BM_Warp)->Arg(32)->Arg(64)->Arg(96);

void BM_TotalLoss(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    const air::GridSpec g(n, n, n);
    const air::Volume a = textured(g, 9.0);
    const air::Volume b = textured(g, 11.0);
    const air::DisplacementField f = random_field(g, 2);
    const air::LossConfig cfg;
    for (auto _ : state) {
        auto out = air::total_loss(a, b, f, cfg);
        benchmark::DoNotOptimize(out.total);
    }
    state.SetItemsProcessed(state.iterations() * g.voxel_count());
}
BENCHMARK(BM_TotalLoss)->Arg(32)->Arg(64);

void BM_LossAndGradient(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    const air::GridSpec g(n, n, n);
    const air::Volume a = textured(g, 9.0);
    const air::Volume b = textured(g, 11.0);
    const air::DisplacementField f = random_field(g, 3);
    const air::LossConfig cfg;
    for (auto _ : state) {
        auto out = air::loss_and_gradient(a, b, f, cfg);
        benchmark::DoNotOptimize(out.gradient.u.data());
    }
    state.SetItemsProcessed(state.iterations() * g.voxel_count());
}
BENCHMARK(BM_LossAndGradient)->Arg(32)->Arg(64);

void BM_JacobianDeterminants(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    const air::GridSpec g(n, n, n);
    const air::DisplacementField f = random_field(g, 4);
    for (auto _ : state) {
        auto out = air::jacobian_determinants(f);
        benchmark::DoNotOptimize(out.data.data());
    }
    state.SetItemsProcessed(state.iterations() * g.voxel_count());
}
BENCHMARK(BM_JacobianDeterminants)->Arg(64)->Arg(96);

void BM_OptimizeStep(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    const air::GridSpec g(n, n, n);
    const air::Volume moving = textured(g, 9.0);
    const air::Volume fixed = textured(g, 9.5);
    for (auto _ : state) {
        auto out = air::optimize_pair(moving, fixed, air::DisplacementField(g), 1, 0.1,
                                      air::LossConfig{});
        benchmark::DoNotOptimize(out.field.u.data());
    }
}
BENCHMARK(BM_OptimizeStep)->Arg(32);

} // namespace

BENCHMARK_MAIN();
