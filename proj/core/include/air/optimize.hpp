// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "air/field.hpp"
#include "air/loss.hpp"
#include "air/volume.hpp"

namespace air {

struct OptimizeReport {
    int steps_run = 0;
    std::vector<LossBreakdown> loss_trace; // steps_run + 1 entries, [0] at the init field
    double initial_total = 0.0;
    double final_total = 0.0;

    std::string to_json_string() const;
};

struct OptimizeResult {
    DisplacementField field; // phi_opt
    Volume warped;           // moving resampled through phi_opt
    OptimizeReport report;
};

/// Instance refinement of one pair: n full-gradient Adam steps on the
/// displacement field, fresh optimizer state, fixed step count.
OptimizeResult optimize_pair(const Volume& moving, const Volume& fixed,
                             const DisplacementField& init_field, int n, double lr,
                             const LossConfig& cfg);

} // namespace air
