// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "air/field.hpp"
#include "air/volume.hpp"

namespace air {

struct LossConfig {
    int window = 9;          // cubic local-NCC window edge length, odd, >= 3
    double epsilon = 1e-5;   // added to the variance product in the denominator
    double lambda_reg = 1.0; // weight on the smoothness term
    bool reg_raw_sum = false; // literal per-voxel sum instead of the mean-normalized term

    void validate() const {
        if (window < 3 || window % 2 == 0)
            throw DataError("loss window must be odd and >= 3");
        if (!(epsilon > 0.0))
            throw DataError("loss epsilon must be > 0");
        if (lambda_reg < 0.0)
            throw DataError("lambda_reg must be >= 0");
    }
};

struct LossBreakdown {
    double sim = 0.0;
    double reg = 0.0;
    double total = 0.0;
};

/// Per-voxel squared local normalized cross correlation over the clipped
/// cubic window centered at each voxel:
///   [sum (Iw - mw)(If - mf)]^2 / ([sum (Iw - mw)^2][sum (If - mf)^2] + eps)
/// with window-local means mw, mf. Degenerate constant windows map to 0.
Volume lncc(const Volume& warped, const Volume& fixed, const LossConfig& cfg);

/// Similarity loss: minus the mean of the lncc map; in (-1, 0].
double sim_loss(const Volume& warped, const Volume& fixed, const LossConfig& cfg);

/// Diffusion smoothness term: sum over voxels and components of the squared
/// forward differences of u, divided by the voxel count N (raw sum behind
/// cfg.reg_raw_sum).
double reg_loss(const DisplacementField& field, const LossConfig& cfg = {});

/// sim + lambda_reg * reg, with the parts reported separately.
LossBreakdown total_loss(const Volume& warped, const Volume& fixed,
                         const DisplacementField& field, const LossConfig& cfg);

struct LossAndGradient {
    LossBreakdown loss;        // identical to total_loss(warp(moving, field), ...)
    DisplacementField gradient; // d total / d u, per voxel and component
};

/// Evaluates the loss at `field` and its analytic gradient with respect to
/// the displacement: the similarity part chains through the trilinear warp
/// of `moving` (stencil derivative at p + u(p)); the smoothness part is the
/// exact derivative of the forward-difference penalty.
LossAndGradient loss_and_gradient(const Volume& moving, const Volume& fixed,
                                  const DisplacementField& field, const LossConfig& cfg);

DisplacementField total_loss_gradient(const Volume& moving, const Volume& fixed,
                                      const DisplacementField& field, const LossConfig& cfg);

/// Same functional evaluated end-to-end in f64 (the warped image is kept at
/// full precision instead of rounding to f32). This is the smooth reference
/// used by finite-difference probes of the gradient.
double total_loss_f64(const Volume& moving, const Volume& fixed,
                      const DisplacementField& field, const LossConfig& cfg);

} // namespace air
