// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "air/field.hpp"
#include "air/volume.hpp"

namespace air {

/// Backward (pull) warp: output voxel p reads the moving image at p + u(p)
/// with trilinear interpolation and replicate padding.
Volume warp(const Volume& moving, const DisplacementField& field);

/// Label transport: nearest-neighbor sampling at p + u(p), identities kept.
LabelMap warp_labels(const LabelMap& moving, const DisplacementField& field);

/// Field v with p + v(p) = (p + inner(p)) + outer(p + inner(p)), i.e. the
/// single field equivalent to warping by `outer` first and `inner` second.
DisplacementField compose(const DisplacementField& outer, const DisplacementField& inner);

} // namespace air
