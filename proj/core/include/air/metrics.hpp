// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include "air/field.hpp"
#include "air/volume.hpp"

namespace air {

struct EvalReport {
    std::map<std::int32_t, double> per_label_dice;
    double mean_dice = 0.0; // unweighted over labels present in the fixed map
    double neg_jacobian_pct = 0.0;
    double inference_seconds = 0.0;

    std::string to_json_string() const;
};

/// 2|A∩B| / (|A|+|B|) over the voxel sets carrying `label`. Both sets empty
/// counts as perfect vacuous agreement (1); exactly one empty is 0.
double dice(const LabelMap& a, const LabelMap& b, std::int32_t label);

/// Transports the moving labels through the field (nearest neighbor), then
/// scores Dice against the fixed labels and the folding fraction of the field.
EvalReport evaluate_pair(const LabelMap& moving_labels, const LabelMap& fixed_labels,
                         const DisplacementField& field, double elapsed_seconds);

} // namespace air
