// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#include "air/adam.hpp"

#include <cmath>

namespace air {

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state) {
    if (params.size() != grad.size() || params.size() != state.m.size())
        throw DataError("adam_step: parameter/gradient/state shape mismatch");
    for (double g : grad)
        if (!std::isfinite(g))
            throw NumericError("adam_step: non-finite gradient");

    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(params.size()); ++i) {
        const double g = grad[static_cast<std::size_t>(i)];
        double& m = state.m[static_cast<std::size_t>(i)];
        double& v = state.v[static_cast<std::size_t>(i)];
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g * g;
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        params[static_cast<std::size_t>(i)] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

void adam_step(DisplacementField& params, const DisplacementField& grad, AdamState& state) {
    if (!(params.grid == grad.grid))
        throw DataError("adam_step: field grids differ");
    adam_step(params.flat(), grad.flat(), state);
}

} // namespace air
