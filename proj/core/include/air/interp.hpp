// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "air/volume.hpp"

namespace air {

/// Trilinear sample of a scalar grid at continuous voxel coordinates with
/// replicate padding (coordinates clamp to the grid box). Arithmetic in f64.
struct TrilinearSample {
    double value;
    // Partial derivatives w.r.t. the raw (unclamped) coordinates; zero along
    // an axis whose coordinate fell outside the grid and was clamped.
    double ddx, ddy, ddz;
};

namespace detail {

struct AxisCell {
    std::int64_t i0;
    double frac;
    bool clamped;
};

inline AxisCell axis_cell(double s, std::int64_t n) {
    AxisCell c;
    c.clamped = s < 0.0 || s > static_cast<double>(n - 1);
    const double sc = std::clamp(s, 0.0, static_cast<double>(n - 1));
    c.i0 = std::min(static_cast<std::int64_t>(std::floor(sc)), n - 2);
    c.frac = sc - static_cast<double>(c.i0);
    return c;
}

} // namespace detail

template <typename T>
inline TrilinearSample sample_trilinear(const T* data, const GridSpec& g,
                                        double x, double y, double z) {
    const auto cx = detail::axis_cell(x, g.dims[0]);
    const auto cy = detail::axis_cell(y, g.dims[1]);
    const auto cz = detail::axis_cell(z, g.dims[2]);

    const std::int64_t W = g.dims[0];
    const std::int64_t HW = g.dims[0] * g.dims[1];
    const T* base = data + cz.i0 * HW + cy.i0 * W + cx.i0;

    const double c000 = static_cast<double>(base[0]);
    const double c100 = static_cast<double>(base[1]);
    const double c010 = static_cast<double>(base[W]);
    const double c110 = static_cast<double>(base[W + 1]);
    const double c001 = static_cast<double>(base[HW]);
    const double c101 = static_cast<double>(base[HW + 1]);
    const double c011 = static_cast<double>(base[HW + W]);
    const double c111 = static_cast<double>(base[HW + W + 1]);

    const double fx = cx.frac, fy = cy.frac, fz = cz.frac;
    const double gx = 1.0 - fx, gy = 1.0 - fy, gz = 1.0 - fz;

    const double c00 = c000 * gx + c100 * fx;
    const double c10 = c010 * gx + c110 * fx;
    const double c01 = c001 * gx + c101 * fx;
    const double c11 = c011 * gx + c111 * fx;

    const double c0 = c00 * gy + c10 * fy;
    const double c1 = c01 * gy + c11 * fy;

    TrilinearSample s;
    s.value = c0 * gz + c1 * fz;

    // d/dx: interpolate the x-differences over y, z.
    const double dx00 = c100 - c000;
    const double dx10 = c110 - c010;
    const double dx01 = c101 - c001;
    const double dx11 = c111 - c011;
    s.ddx = cx.clamped ? 0.0
                       : (dx00 * gy + dx10 * fy) * gz + (dx01 * gy + dx11 * fy) * fz;

    const double dy0 = c10 - c00;
    const double dy1 = c11 - c01;
    s.ddy = cy.clamped ? 0.0 : dy0 * gz + dy1 * fz;

    s.ddz = cz.clamped ? 0.0 : c1 - c0;
    return s;
}

/// Nearest-neighbor sample with replicate padding; rounds halves up.
template <typename T>
inline T sample_nearest(const T* data, const GridSpec& g, double x, double y, double z) {
    const auto snap = [](double s, std::int64_t n) {
        const double sc = std::clamp(s, 0.0, static_cast<double>(n - 1));
        return std::clamp<std::int64_t>(std::llround(sc), 0, n - 1);
    };
    return data[g.index(snap(x, g.dims[0]), snap(y, g.dims[1]), snap(z, g.dims[2]))];
}

} // namespace air
