// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0
//
// Independent reference implementations used only by tests. Everything here
// is written with plain nested loops, deliberately sharing no code with the
// library paths it checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "air/field.hpp"
#include "air/loss.hpp"
#include "air/volume.hpp"

namespace oracle {

// Trilinear interpolation with replicate padding, written as an explicit
// corner-weight loop rather than nested lerps.
inline double interp(const air::Volume& v, double x, double y, double z) {
    const auto& g = v.grid;
    const auto cell = [](double s, std::int64_t n, std::int64_t& i0, double& f) {
        s = std::clamp(s, 0.0, static_cast<double>(n - 1));
        i0 = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(s)), n - 2);
        f = s - static_cast<double>(i0);
    };
    std::int64_t ix, iy, iz;
    double fx, fy, fz;
    cell(x, g.dims[0], ix, fx);
    cell(y, g.dims[1], iy, fy);
    cell(z, g.dims[2], iz, fz);
    double acc = 0.0;
    for (int cz = 0; cz < 2; ++cz)
        for (int cy = 0; cy < 2; ++cy)
            for (int cx = 0; cx < 2; ++cx) {
                const double w = (cx ? fx : 1.0 - fx) * (cy ? fy : 1.0 - fy) *
                                 (cz ? fz : 1.0 - fz);
                acc += w * static_cast<double>(v.at(ix + cx, iy + cy, iz + cz));
            }
    return acc;
}

// Warp in f64 (no rounding of the warped intensities).
inline std::vector<double> warp_f64(const air::Volume& moving,
                                    const air::DisplacementField& u) {
    const auto& g = moving.grid;
    std::vector<double> out(static_cast<std::size_t>(g.voxel_count()));
    std::int64_t i = 0;
    for (std::int64_t z = 0; z < g.dims[2]; ++z)
        for (std::int64_t y = 0; y < g.dims[1]; ++y)
            for (std::int64_t x = 0; x < g.dims[0]; ++x, ++i)
                out[static_cast<std::size_t>(i)] =
                    interp(moving, static_cast<double>(x) + u.dx(i),
                           static_cast<double>(y) + u.dy(i),
                           static_cast<double>(z) + u.dz(i));
    return out;
}

// Direct per-window LNCC similarity: O(N * window^3) triple loops.
inline double sim_loss(const std::vector<double>& iw, const std::vector<double>& iff,
                       const air::GridSpec& g, const air::LossConfig& cfg) {
    const int r = (cfg.window - 1) / 2;
    double sum = 0.0;
    for (std::int64_t z = 0; z < g.dims[2]; ++z)
        for (std::int64_t y = 0; y < g.dims[1]; ++y)
            for (std::int64_t x = 0; x < g.dims[0]; ++x) {
                double sw = 0, sf = 0, n = 0;
                for (std::int64_t cz = std::max<std::int64_t>(0, z - r);
                     cz <= std::min(g.dims[2] - 1, z + r); ++cz)
                    for (std::int64_t cy = std::max<std::int64_t>(0, y - r);
                         cy <= std::min(g.dims[1] - 1, y + r); ++cy)
                        for (std::int64_t cx = std::max<std::int64_t>(0, x - r);
                             cx <= std::min(g.dims[0] - 1, x + r); ++cx) {
                            const auto i = static_cast<std::size_t>(g.index(cx, cy, cz));
                            sw += iw[i];
                            sf += iff[i];
                            n += 1.0;
                        }
                const double mw = sw / n, mf = sf / n;
                double cross = 0, varw = 0, varf = 0;
                for (std::int64_t cz = std::max<std::int64_t>(0, z - r);
                     cz <= std::min(g.dims[2] - 1, z + r); ++cz)
                    for (std::int64_t cy = std::max<std::int64_t>(0, y - r);
                         cy <= std::min(g.dims[1] - 1, y + r); ++cy)
                        for (std::int64_t cx = std::max<std::int64_t>(0, x - r);
                             cx <= std::min(g.dims[0] - 1, x + r); ++cx) {
                            const auto i = static_cast<std::size_t>(g.index(cx, cy, cz));
                            const double dw = iw[i] - mw;
                            const double df = iff[i] - mf;
                            cross += dw * df;
                            varw += dw * dw;
                            varf += df * df;
                        }
                sum += cross * cross / (varw * varf + cfg.epsilon);
            }
    return -sum / static_cast<double>(g.voxel_count());
}

// Direct forward-difference diffusion penalty.
inline double reg_loss(const air::DisplacementField& f, const air::LossConfig& cfg) {
    const auto& g = f.grid;
    double sum = 0.0;
    for (std::int64_t z = 0; z < g.dims[2]; ++z)
        for (std::int64_t y = 0; y < g.dims[1]; ++y)
            for (std::int64_t x = 0; x < g.dims[0]; ++x) {
                const std::int64_t i = g.index(x, y, z);
                for (int c = 0; c < 3; ++c) {
                    if (x + 1 < g.dims[0]) {
                        const double d = f.comp(c, g.index(x + 1, y, z)) - f.comp(c, i);
                        sum += d * d;
                    }
                    if (y + 1 < g.dims[1]) {
                        const double d = f.comp(c, g.index(x, y + 1, z)) - f.comp(c, i);
                        sum += d * d;
                    }
                    if (z + 1 < g.dims[2]) {
                        const double d = f.comp(c, g.index(x, y, z + 1)) - f.comp(c, i);
                        sum += d * d;
                    }
                }
            }
    return cfg.reg_raw_sum ? sum : sum / static_cast<double>(g.voxel_count());
}

inline double total_loss(const air::Volume& moving, const air::Volume& fixed,
                         const air::DisplacementField& field, const air::LossConfig& cfg) {
    const auto iw = warp_f64(moving, field);
    std::vector<double> iff(fixed.data.begin(), fixed.data.end());
    return oracle::sim_loss(iw, iff, moving.grid, cfg) +
           cfg.lambda_reg * oracle::reg_loss(field, cfg);
}

// Hand-coded Adam recurrence on a scalar, kept textbook-shaped.
struct ScalarAdam {
    double m = 0, v = 0;
    long t = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8, lr = 0.1;

    double step(double x, double g) {
        t += 1;
        m = beta1 * m + (1 - beta1) * g;
        v = beta2 * v + (1 - beta2) * g * g;
        const double mhat = m / (1 - std::pow(beta1, static_cast<double>(t)));
        const double vhat = v / (1 - std::pow(beta2, static_cast<double>(t)));
        return x - lr * mhat / (std::sqrt(vhat) + eps);
    }
};

// --- deterministic test data ------------------------------------------------

inline double udraw(std::mt19937_64& gen) {
    return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

inline air::Volume random_volume(const air::GridSpec& g, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    air::Volume v(g);
    for (auto& x : v.data)
        x = static_cast<float>(udraw(gen));
    return v;
}

// Smooth textured phantom: sum of sinusoids, non-constant in every window.
inline air::Volume textured_volume(const air::GridSpec& g, double period = 7.0,
                                   double shift = 0.0) {
    air::Volume v(g);
    std::int64_t i = 0;
    for (std::int64_t z = 0; z < g.dims[2]; ++z)
        for (std::int64_t y = 0; y < g.dims[1]; ++y)
            for (std::int64_t x = 0; x < g.dims[0]; ++x, ++i) {
                const double t =
                    std::sin(2 * 3.14159265358979323846 * (x + shift) / period) *
                        std::sin(2 * 3.14159265358979323846 * (y + 2 * shift + 1.3) / period) *
                        std::sin(2 * 3.14159265358979323846 * (z + 0.7) / period) +
                    0.3 * std::sin(2 * 3.14159265358979323846 * (x + y + z) / (3.1 * period));
                v.data[static_cast<std::size_t>(i)] = static_cast<float>(0.5 + 0.35 * t);
            }
    return v;
}

// Random displacements with every component in +-[0.05, 0.45]: sample points
// stay clear of lattice planes so finite differences never cross a kink.
inline air::DisplacementField safe_random_field(const air::GridSpec& g, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    air::DisplacementField f(g);
    for (auto& u : f.u) {
        const double mag = 0.05 + 0.40 * udraw(gen);
        u = udraw(gen) < 0.5 ? -mag : mag;
    }
    return f;
}

} // namespace oracle
