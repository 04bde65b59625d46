// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "air/field.hpp"
#include "air/volume.hpp"

namespace air {

/// Per-voxel det(grad phi) with grad phi = I + grad u. Central differences in
/// the interior, one-sided on the boundary faces. Needs dims >= 3 per axis.
Volume jacobian_determinants(const DisplacementField& field);

/// Percentage of voxels with det(grad phi) <= 0 (folding, counted
/// conservatively: exactly-zero determinants are included).
double negative_jacobian_fraction(const DisplacementField& field);

} // namespace air
