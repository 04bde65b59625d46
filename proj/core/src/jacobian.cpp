// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#include "air/jacobian.hpp"

namespace air {
namespace {

// d/d(axis) of field component c at linear index i, central in the interior,
// one-sided on faces. Steps along `axis` change the linear index by `stride`.
inline double partial(const DisplacementField& f, int c, std::int64_t i,
                      std::int64_t pos, std::int64_t n, std::int64_t stride) {
    if (pos == 0)
        return f.comp(c, i + stride) - f.comp(c, i);
    if (pos == n - 1)
        return f.comp(c, i) - f.comp(c, i - stride);
    return 0.5 * (f.comp(c, i + stride) - f.comp(c, i - stride));
}

} // namespace

Volume jacobian_determinants(const DisplacementField& field) {
    const GridSpec& g = field.grid;
    for (int a = 0; a < 3; ++a)
        if (g.dims[a] < 3)
            throw DataError("jacobian_determinants: dims must be >= 3 per axis");

    const std::int64_t W = g.dims[0], H = g.dims[1], D = g.dims[2];
    const std::int64_t sx = 1, sy = W, sz = W * H;
    Volume out(g);

#pragma omp parallel for schedule(static)
    for (std::int64_t z = 0; z < D; ++z) {
        for (std::int64_t y = 0; y < H; ++y) {
            std::int64_t i = g.index(0, y, z);
            for (std::int64_t x = 0; x < W; ++x, ++i) {
                // J[c][a] = d(phi_c)/d(axis a) = delta(c,a) + d(u_c)/d(a)
                double J[3][3];
                for (int c = 0; c < 3; ++c) {
                    J[c][0] = partial(field, c, i, x, W, sx);
                    J[c][1] = partial(field, c, i, y, H, sy);
                    J[c][2] = partial(field, c, i, z, D, sz);
                }
                J[0][0] += 1.0;
                J[1][1] += 1.0;
                J[2][2] += 1.0;
                const double det = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
                                   J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
                                   J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
                out.data[static_cast<std::size_t>(i)] = static_cast<float>(det);
            }
        }
    }
    return out;
}

double negative_jacobian_fraction(const DisplacementField& field) {
    const Volume dets = jacobian_determinants(field);
    std::int64_t folded = 0;
    for (float d : dets.data)
        if (d <= 0.0f)
            ++folded;
    return 100.0 * static_cast<double>(folded) / static_cast<double>(dets.grid.voxel_count());
}

} // namespace air
