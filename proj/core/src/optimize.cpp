// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#include "air/optimize.hpp"

#include <cmath>

#include <json.hpp>

#include "air/adam.hpp"
#include "air/warp.hpp"

namespace air {

std::string OptimizeReport::to_json_string() const {
    nlohmann::json j;
    j["steps_run"] = steps_run;
    j["initial_total"] = initial_total;
    j["final_total"] = final_total;
    auto& trace = j["loss_trace"] = nlohmann::json::array();
    for (const auto& b : loss_trace)
        trace.push_back({{"sim", b.sim}, {"reg", b.reg}, {"total", b.total}});
    return j.dump();
}

OptimizeResult optimize_pair(const Volume& moving, const Volume& fixed,
                             const DisplacementField& init_field, int n, double lr,
                             const LossConfig& cfg) {
    if (n < 1)
        throw DataError("optimize_pair: n must be >= 1");
    if (!(lr > 0.0))
        throw DataError("optimize_pair: lr must be > 0");

    OptimizeResult res;
    res.field = init_field;
    res.report.loss_trace.reserve(static_cast<std::size_t>(n) + 1);

    AdamState state(res.field.u.size(), lr);
    for (int step = 0; step < n; ++step) {
        auto lg = loss_and_gradient(moving, fixed, res.field, cfg);
        if (!std::isfinite(lg.loss.total))
            throw NumericError("optimize_pair: non-finite loss at step " + std::to_string(step));
        res.report.loss_trace.push_back(lg.loss);
        adam_step(res.field, lg.gradient, state);
    }

    res.warped = warp(moving, res.field);
    LossBreakdown last = total_loss(res.warped, fixed, res.field, cfg);
    if (!std::isfinite(last.total))
        throw NumericError("optimize_pair: non-finite loss at step " + std::to_string(n));
    res.report.loss_trace.push_back(last);

    res.report.steps_run = n;
    res.report.initial_total = res.report.loss_trace.front().total;
    res.report.final_total = res.report.loss_trace.back().total;
    return res;
}

} // namespace air
