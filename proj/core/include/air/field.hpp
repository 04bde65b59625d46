// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "air/volume.hpp"

namespace air {

/// Per-voxel displacement u in voxel units; the deformation is
/// phi(p) = p + u(p). Components are stored planar (all dx, all dy, all dz)
/// to match the on-disk field layout. Kept in f64 so optimizer updates and
/// loss gradients accumulate at full precision; files round to f32.
struct DisplacementField {
    GridSpec grid;
    std::vector<double> u; // size 3*N, planar

    DisplacementField() = default;
    explicit DisplacementField(GridSpec g)
        : grid(g), u(static_cast<std::size_t>(3 * g.voxel_count()), 0.0) {}
    DisplacementField(GridSpec g, std::vector<double> values)
        : grid(g), u(std::move(values)) {
        if (static_cast<std::int64_t>(u.size()) != 3 * grid.voxel_count())
            throw DataError("field data length mismatch");
    }

    std::int64_t voxel_count() const { return grid.voxel_count(); }

    double& comp(int c, std::int64_t i) { return u[static_cast<std::size_t>(c) * voxel_count() + i]; }
    double comp(int c, std::int64_t i) const { return u[static_cast<std::size_t>(c) * voxel_count() + i]; }

    double& dx(std::int64_t i) { return comp(0, i); }
    double& dy(std::int64_t i) { return comp(1, i); }
    double& dz(std::int64_t i) { return comp(2, i); }
    double dx(std::int64_t i) const { return comp(0, i); }
    double dy(std::int64_t i) const { return comp(1, i); }
    double dz(std::int64_t i) const { return comp(2, i); }

    std::span<double> flat() { return {u.data(), u.size()}; }
    std::span<const double> flat() const { return {u.data(), u.size()}; }
};

} // namespace air
