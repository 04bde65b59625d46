// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#include "air/decision.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace air {

const char* to_string(DecisionReason r) {
    switch (r) {
    case DecisionReason::loss: return "loss";
    case DecisionReason::random: return "random";
    case DecisionReason::declined: return "declined";
    }
    return "?";
}

double quantile_linear(std::vector<double> values, double q) {
    if (values.empty())
        throw DataError("quantile of empty set");
    std::sort(values.begin(), values.end());
    if (values.size() == 1)
        return values.front();
    const double h = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::string EpochStats::to_json_string() const {
    nlohmann::json j;
    j["type"] = "epoch";
    j["epoch"] = epoch;
    j["count"] = count;
    j["mean"] = mean;
    if (quantile)
        j["quantile"] = *quantile;
    else
        j["quantile"] = nullptr;
    j["by_loss"] = by_loss;
    j["by_random"] = by_random;
    j["declined"] = declined;
    return j.dump();
}

EpochStats EpochLossTracker::end_epoch(const DecisionPolicy& policy) {
    EpochStats s;
    s.epoch = epoch_;
    s.count = losses_.size();
    if (!losses_.empty()) {
        double sum = 0.0;
        for (double v : losses_)
            sum += v;
        s.mean = sum / static_cast<double>(losses_.size());
        s.quantile = quantile_linear(losses_, policy.loss_quantile);
    }
    s.by_loss = by_loss_;
    s.by_random = by_random_;
    s.declined = declined_;

    losses_.clear();
    by_loss_ = by_random_ = declined_ = 0;
    ++epoch_;
    return s;
}

Decision should_optimize(EpochLossTracker& tracker, const DecisionPolicy& policy,
                         double pair_loss, double rng_draw) {
    policy.validate();
    if (!std::isfinite(pair_loss))
        throw NumericError("should_optimize: non-finite pair loss");

    Decision d;
    if (tracker.count() >= std::max<std::size_t>(policy.warmup_pairs, 1) &&
        pair_loss >= quantile_linear(tracker.losses_seen(), policy.loss_quantile)) {
        d = {true, DecisionReason::loss};
    } else if (rng_draw > policy.random_threshold) {
        d = {true, DecisionReason::random};
    } else {
        d = {false, DecisionReason::declined};
    }
    tracker.record_decision(d.reason);
    return d;
}

} // namespace air
