// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#include "air/warp.hpp"

#include "air/interp.hpp"

namespace air {

Volume warp(const Volume& moving, const DisplacementField& field) {
    if (!(moving.grid == field.grid))
        throw DataError("warp: moving and field grids differ");
    const GridSpec& g = moving.grid;
    Volume out(g);
    const float* src = moving.data.data();

#pragma omp parallel for schedule(static)
    for (std::int64_t z = 0; z < g.dims[2]; ++z) {
        for (std::int64_t y = 0; y < g.dims[1]; ++y) {
            std::int64_t i = g.index(0, y, z);
            for (std::int64_t x = 0; x < g.dims[0]; ++x, ++i) {
                const auto s = sample_trilinear(src, g,
                                                static_cast<double>(x) + field.dx(i),
                                                static_cast<double>(y) + field.dy(i),
                                                static_cast<double>(z) + field.dz(i));
                out.data[static_cast<std::size_t>(i)] = static_cast<float>(s.value);
            }
        }
    }
    return out;
}

LabelMap warp_labels(const LabelMap& moving, const DisplacementField& field) {
    if (!(moving.grid == field.grid))
        throw DataError("warp_labels: label and field grids differ");
    const GridSpec& g = moving.grid;
    LabelMap out(g);
    const std::int32_t* src = moving.labels.data();

#pragma omp parallel for schedule(static)
    for (std::int64_t z = 0; z < g.dims[2]; ++z) {
        for (std::int64_t y = 0; y < g.dims[1]; ++y) {
            std::int64_t i = g.index(0, y, z);
            for (std::int64_t x = 0; x < g.dims[0]; ++x, ++i) {
                out.labels[static_cast<std::size_t>(i)] =
                    sample_nearest(src, g,
                                   static_cast<double>(x) + field.dx(i),
                                   static_cast<double>(y) + field.dy(i),
                                   static_cast<double>(z) + field.dz(i));
            }
        }
    }
    return out;
}

DisplacementField compose(const DisplacementField& outer, const DisplacementField& inner) {
    if (!(outer.grid == inner.grid))
        throw DataError("compose: field grids differ");
    const GridSpec& g = outer.grid;
    const std::int64_t N = g.voxel_count();
    DisplacementField out(g);

#pragma omp parallel for schedule(static)
    for (std::int64_t z = 0; z < g.dims[2]; ++z) {
        for (std::int64_t y = 0; y < g.dims[1]; ++y) {
            std::int64_t i = g.index(0, y, z);
            for (std::int64_t x = 0; x < g.dims[0]; ++x, ++i) {
                const double sx = static_cast<double>(x) + inner.dx(i);
                const double sy = static_cast<double>(y) + inner.dy(i);
                const double sz = static_cast<double>(z) + inner.dz(i);
                for (int c = 0; c < 3; ++c) {
                    const auto s = sample_trilinear(outer.u.data() + c * N, g, sx, sy, sz);
                    out.comp(c, i) = inner.comp(c, i) + s.value;
                }
            }
        }
    }
    return out;
}

} // namespace air
