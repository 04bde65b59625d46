// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "air/error.hpp"
#include "air/field.hpp"

namespace air {

/// Standard Adam state over a flat parameter vector. A fresh state is built
/// per optimization run; moments are never shared across pairs.
struct AdamState {
    std::vector<double> m, v;
    std::int64_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double lr = 0.1;

    AdamState(std::size_t n, double learning_rate)
        : m(n, 0.0), v(n, 0.0), lr(learning_rate) {
        constructions_.fetch_add(1, std::memory_order_relaxed);
    }

    /// Test hook: lets inference paths prove they never built optimizer state.
    static std::uint64_t construction_count() {
        return constructions_.load(std::memory_order_relaxed);
    }

private:
    inline static std::atomic<std::uint64_t> constructions_{0};
};

/// One Adam update: m <- b1 m + (1-b1) g; v <- b2 v + (1-b2) g^2; bias-correct
/// both; params <- params - lr * m^ / (sqrt(v^) + eps). Throws NumericError on
/// a non-finite gradient.
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state);

void adam_step(DisplacementField& params, const DisplacementField& grad, AdamState& state);

} // namespace air
