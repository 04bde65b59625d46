// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#include "air/metrics.hpp"

#include <json.hpp>

#include "air/jacobian.hpp"
#include "air/warp.hpp"

namespace air {

std::string EvalReport::to_json_string() const {
    nlohmann::json j;
    auto& d = j["per_label_dice"] = nlohmann::json::object();
    for (const auto& [label, value] : per_label_dice)
        d[std::to_string(label)] = value;
    j["mean_dice"] = mean_dice;
    j["neg_jacobian_pct"] = neg_jacobian_pct;
    j["inference_seconds"] = inference_seconds;
    return j.dump();
}

double dice(const LabelMap& a, const LabelMap& b, std::int32_t label) {
    if (!(a.grid == b.grid))
        throw DataError("dice: grids differ");
    std::int64_t in_a = 0, in_b = 0, in_both = 0;
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        const bool pa = a.labels[i] == label;
        const bool pb = b.labels[i] == label;
        in_a += pa;
        in_b += pb;
        in_both += pa && pb;
    }
    if (in_a + in_b == 0)
        return 1.0;
    return 2.0 * static_cast<double>(in_both) / static_cast<double>(in_a + in_b);
}

EvalReport evaluate_pair(const LabelMap& moving_labels, const LabelMap& fixed_labels,
                         const DisplacementField& field, double elapsed_seconds) {
    if (!(moving_labels.grid == fixed_labels.grid) || !(moving_labels.grid == field.grid))
        throw DataError("evaluate_pair: grids differ");

    const LabelMap warped = warp_labels(moving_labels, field);
    EvalReport r;
    const auto fixed_ids = fixed_labels.label_ids();
    double sum = 0.0;
    for (std::int32_t id : fixed_ids) {
        const double d = dice(warped, fixed_labels, id);
        r.per_label_dice[id] = d;
        sum += d;
    }
    r.mean_dice = fixed_ids.empty() ? 1.0 : sum / static_cast<double>(fixed_ids.size());
    r.neg_jacobian_pct = negative_jacobian_fraction(field);
    r.inference_seconds = elapsed_seconds;
    return r;
}

} // namespace air
