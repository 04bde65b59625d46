// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#include "air/loss.hpp"

#include <cmath>
#include <vector>

#include "air/interp.hpp"
#include "air/warp.hpp"

namespace air {
namespace {

// Sliding clipped-window sum along one axis: out[i] = sum of in[j] for
// j in [i-r, i+r] intersected with [0, n). Lines are independent, so the
// pass parallelizes and stays deterministic for any thread count.
void sliding_sum_lines(const double* in, double* out, std::int64_t lines,
                       std::int64_t line_stride, std::int64_t n,
                       std::int64_t stride, int r) {
#pragma omp parallel for schedule(static)
    for (std::int64_t l = 0; l < lines; ++l) {
        const double* src = in + l * line_stride;
        double* dst = out + l * line_stride;
        double acc = 0.0;
        const std::int64_t lead = std::min<std::int64_t>(r, n - 1);
        for (std::int64_t j = 0; j <= lead; ++j)
            acc += src[j * stride];
        dst[0] = acc;
        for (std::int64_t i = 1; i < n; ++i) {
            const std::int64_t add = i + r;
            const std::int64_t drop = i - r - 1;
            if (add < n) acc += src[add * stride];
            if (drop >= 0) acc -= src[drop * stride];
            dst[i * stride] = acc;
        }
    }
}

// In-place separable box sum over the clipped cubic window of radius r.
void box_filter(const GridSpec& g, int r, std::vector<double>& buf, std::vector<double>& tmp) {
    const std::int64_t W = g.dims[0], H = g.dims[1], D = g.dims[2];
    // x: contiguous lines of length W
    sliding_sum_lines(buf.data(), tmp.data(), H * D, W, W, 1, r);
    // y: for each z-slab, H lines of stride W; treat each (x,z) pair as a line
#pragma omp parallel for schedule(static)
    for (std::int64_t z = 0; z < D; ++z) {
        for (std::int64_t x = 0; x < W; ++x) {
            const double* src = tmp.data() + z * W * H + x;
            double* dst = buf.data() + z * W * H + x;
            double acc = 0.0;
            const std::int64_t lead = std::min<std::int64_t>(r, H - 1);
            for (std::int64_t j = 0; j <= lead; ++j)
                acc += src[j * W];
            dst[0] = acc;
            for (std::int64_t i = 1; i < H; ++i) {
                if (i + r < H) acc += src[(i + r) * W];
                if (i - r - 1 >= 0) acc -= src[(i - r - 1) * W];
                dst[i * W] = acc;
            }
        }
    }
    // z: lines of stride W*H, one per (x,y)
    sliding_sum_lines(buf.data(), tmp.data(), W * H, 1, D, W * H, r);
    buf.swap(tmp);
}

struct WindowStats {
    std::vector<double> sw, sf, sww, sff, swf; // box-filtered sums
    std::vector<double> iw, iff;               // raw (promoted) intensities
    std::vector<double> n;                     // clipped window voxel counts
};

std::vector<double> window_counts(const GridSpec& g, int r) {
    const auto axis_counts = [r](std::int64_t n) {
        std::vector<double> c(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i)
            c[static_cast<std::size_t>(i)] = static_cast<double>(
                std::min(i + r, n - 1) - std::max<std::int64_t>(i - r, 0) + 1);
        return c;
    };
    const auto cx = axis_counts(g.dims[0]);
    const auto cy = axis_counts(g.dims[1]);
    const auto cz = axis_counts(g.dims[2]);
    std::vector<double> n(static_cast<std::size_t>(g.voxel_count()));
    std::size_t i = 0;
    for (std::int64_t z = 0; z < g.dims[2]; ++z)
        for (std::int64_t y = 0; y < g.dims[1]; ++y)
            for (std::int64_t x = 0; x < g.dims[0]; ++x, ++i)
                n[i] = cx[static_cast<std::size_t>(x)] * cy[static_cast<std::size_t>(y)] *
                       cz[static_cast<std::size_t>(z)];
    return n;
}

WindowStats window_stats(const GridSpec& g, std::vector<double> iw, std::vector<double> iff, int r) {
    const std::size_t N = iw.size();
    WindowStats s;
    s.iw = std::move(iw);
    s.iff = std::move(iff);
    s.sw = s.iw;
    s.sf = s.iff;
    s.sww.resize(N);
    s.sff.resize(N);
    s.swf.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        s.sww[i] = s.iw[i] * s.iw[i];
        s.sff[i] = s.iff[i] * s.iff[i];
        s.swf[i] = s.iw[i] * s.iff[i];
    }
    std::vector<double> tmp(N);
    box_filter(g, r, s.sw, tmp);
    box_filter(g, r, s.sf, tmp);
    box_filter(g, r, s.sww, tmp);
    box_filter(g, r, s.sff, tmp);
    box_filter(g, r, s.swf, tmp);
    s.n = window_counts(g, r);
    return s;
}

struct CenterTerms {
    double cross, varw, varf, denom;
};

inline CenterTerms center_terms(const WindowStats& s, std::size_t i, double eps) {
    CenterTerms t;
    const double inv_n = 1.0 / s.n[i];
    t.cross = s.swf[i] - s.sw[i] * s.sf[i] * inv_n;
    t.varw = std::max(0.0, s.sww[i] - s.sw[i] * s.sw[i] * inv_n);
    t.varf = std::max(0.0, s.sff[i] - s.sf[i] * s.sf[i] * inv_n);
    t.denom = t.varw * t.varf + eps;
    return t;
}

// Mean of the lncc map, accumulated per z-slice so the reduction order does
// not depend on the thread count.
double lncc_mean(const GridSpec& g, const WindowStats& s, double eps, float* map_out) {
    const std::int64_t D = g.dims[2];
    const std::int64_t slice = g.dims[0] * g.dims[1];
    std::vector<double> slice_sums(static_cast<std::size_t>(D), 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t z = 0; z < D; ++z) {
        double acc = 0.0;
        for (std::int64_t k = z * slice; k < (z + 1) * slice; ++k) {
            const auto t = center_terms(s, static_cast<std::size_t>(k), eps);
            const double v = t.cross * t.cross / t.denom;
            acc += v;
            if (map_out)
                map_out[k] = static_cast<float>(v);
        }
        slice_sums[static_cast<std::size_t>(z)] = acc;
    }
    double total = 0.0;
    for (double v : slice_sums)
        total += v;
    return total / static_cast<double>(g.voxel_count());
}

std::vector<double> promote(const std::vector<float>& v) {
    return {v.begin(), v.end()};
}

void check_grids(const GridSpec& a, const GridSpec& b, const char* what) {
    if (!(a == b))
        throw DataError(std::string(what) + ": grids differ");
}

double reg_norm(const GridSpec& g, const LossConfig& cfg) {
    return cfg.reg_raw_sum ? 1.0 : 1.0 / static_cast<double>(g.voxel_count());
}

double reg_loss_impl(const DisplacementField& f, const LossConfig& cfg) {
    const GridSpec& g = f.grid;
    const std::int64_t W = g.dims[0], H = g.dims[1], D = g.dims[2];
    const std::int64_t stride[3] = {1, W, W * H};
    std::vector<double> slice_sums(static_cast<std::size_t>(D), 0.0);
#pragma omp parallel for schedule(static)
    for (std::int64_t z = 0; z < D; ++z) {
        double acc = 0.0;
        for (std::int64_t y = 0; y < H; ++y) {
            std::int64_t i = g.index(0, y, z);
            for (std::int64_t x = 0; x < W; ++x, ++i) {
                const std::int64_t pos[3] = {x, y, z};
                for (int c = 0; c < 3; ++c) {
                    for (int a = 0; a < 3; ++a) {
                        if (pos[a] + 1 >= g.dims[a])
                            continue; // far boundary contributes nothing
                        const double d = f.comp(c, i + stride[a]) - f.comp(c, i);
                        acc += d * d;
                    }
                }
            }
        }
        slice_sums[static_cast<std::size_t>(z)] = acc;
    }
    double total = 0.0;
    for (double v : slice_sums)
        total += v;
    return reg_norm(g, cfg) * total;
}

void add_reg_gradient(const DisplacementField& f, const LossConfig& cfg, double weight,
                      DisplacementField& grad) {
    const GridSpec& g = f.grid;
    const std::int64_t W = g.dims[0], H = g.dims[1], D = g.dims[2];
    const std::int64_t stride[3] = {1, W, W * H};
    const double scale = 2.0 * reg_norm(g, cfg) * weight;
#pragma omp parallel for schedule(static)
    for (std::int64_t z = 0; z < D; ++z) {
        for (std::int64_t y = 0; y < H; ++y) {
            std::int64_t i = g.index(0, y, z);
            for (std::int64_t x = 0; x < W; ++x, ++i) {
                const std::int64_t pos[3] = {x, y, z};
                for (int c = 0; c < 3; ++c) {
                    double acc = 0.0;
                    for (int a = 0; a < 3; ++a) {
                        if (pos[a] > 0)
                            acc += f.comp(c, i) - f.comp(c, i - stride[a]);
                        if (pos[a] + 1 < g.dims[a])
                            acc -= f.comp(c, i + stride[a]) - f.comp(c, i);
                    }
                    grad.comp(c, i) += scale * acc;
                }
            }
        }
    }
}

// d L_sim / d I_w as a per-voxel map. Uses the the per-center coefficients
//   A = 2 cross / denom,  B = 2 cross^2 varf / denom^2
// and box sums of A, B, A*mf, B*mw over the same window geometry, exploiting
// that q is in the window of r exactly when r is in the window of q.
std::vector<double> sim_gradient_wrt_warped(const GridSpec& g, const WindowStats& s,
                                            const LossConfig& cfg) {
    const std::size_t N = s.iw.size();
    std::vector<double> A(N), B(N), P(N), Q(N);
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(N); ++k) {
        const std::size_t i = static_cast<std::size_t>(k);
        const auto t = center_terms(s, i, cfg.epsilon);
        const double inv_n = 1.0 / s.n[i];
        const double a = 2.0 * t.cross / t.denom;
        const double b = 2.0 * t.cross * t.cross * t.varf / (t.denom * t.denom);
        A[i] = a;
        B[i] = b;
        P[i] = a * s.sf[i] * inv_n; // A * window mean of fixed
        Q[i] = b * s.sw[i] * inv_n; // B * window mean of warped
    }
    const int r = (cfg.window - 1) / 2;
    std::vector<double> tmp(N);
    box_filter(g, r, A, tmp);
    box_filter(g, r, B, tmp);
    box_filter(g, r, P, tmp);
    box_filter(g, r, Q, tmp);

    std::vector<double> out(N);
    const double inv_total = 1.0 / static_cast<double>(g.voxel_count());
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < static_cast<std::int64_t>(N); ++k) {
        const std::size_t i = static_cast<std::size_t>(k);
        out[i] = -inv_total * (s.iff[i] * A[i] - P[i] - s.iw[i] * B[i] + Q[i]);
    }
    return out;
}

} // namespace

Volume lncc(const Volume& warped, const Volume& fixed, const LossConfig& cfg) {
    cfg.validate();
    check_grids(warped.grid, fixed.grid, "lncc");
    const int r = (cfg.window - 1) / 2;
    const auto stats = window_stats(warped.grid, promote(warped.data), promote(fixed.data), r);
    Volume map(warped.grid);
    lncc_mean(warped.grid, stats, cfg.epsilon, map.data.data());
    return map;
}

double sim_loss(const Volume& warped, const Volume& fixed, const LossConfig& cfg) {
    cfg.validate();
    check_grids(warped.grid, fixed.grid, "sim_loss");
    const int r = (cfg.window - 1) / 2;
    const auto stats = window_stats(warped.grid, promote(warped.data), promote(fixed.data), r);
    return -lncc_mean(warped.grid, stats, cfg.epsilon, nullptr);
}

double reg_loss(const DisplacementField& field, const LossConfig& cfg) {
    cfg.validate();
    return reg_loss_impl(field, cfg);
}

LossBreakdown total_loss(const Volume& warped, const Volume& fixed,
                         const DisplacementField& field, const LossConfig& cfg) {
    cfg.validate();
    check_grids(warped.grid, fixed.grid, "total_loss");
    check_grids(warped.grid, field.grid, "total_loss");
    LossBreakdown b;
    b.sim = sim_loss(warped, fixed, cfg);
    b.reg = reg_loss_impl(field, cfg);
    b.total = b.sim + cfg.lambda_reg * b.reg;
    return b;
}

LossAndGradient loss_and_gradient(const Volume& moving, const Volume& fixed,
                                  const DisplacementField& field, const LossConfig& cfg) {
    cfg.validate();
    check_grids(moving.grid, fixed.grid, "loss_and_gradient");
    check_grids(moving.grid, field.grid, "loss_and_gradient");
    const GridSpec& g = moving.grid;
    const int r = (cfg.window - 1) / 2;

    // Shared f32 warp keeps the reported loss bitwise identical to
    // total_loss(warp(moving, field), fixed, field).
    const Volume warped = warp(moving, field);
    const auto stats = window_stats(g, promote(warped.data), promote(fixed.data), r);

    LossAndGradient out;
    out.loss.sim = -lncc_mean(g, stats, cfg.epsilon, nullptr);
    out.loss.reg = reg_loss_impl(field, cfg);
    out.loss.total = out.loss.sim + cfg.lambda_reg * out.loss.reg;

    const auto dsim_diw = sim_gradient_wrt_warped(g, stats, cfg);

    out.gradient = DisplacementField(g);
    const float* src = moving.data.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t z = 0; z < g.dims[2]; ++z) {
        for (std::int64_t y = 0; y < g.dims[1]; ++y) {
            std::int64_t i = g.index(0, y, z);
            for (std::int64_t x = 0; x < g.dims[0]; ++x, ++i) {
                const auto smp = sample_trilinear(src, g,
                                                  static_cast<double>(x) + field.dx(i),
                                                  static_cast<double>(y) + field.dy(i),
                                                  static_cast<double>(z) + field.dz(i));
                const double G = dsim_diw[static_cast<std::size_t>(i)];
                out.gradient.dx(i) = G * smp.ddx;
                out.gradient.dy(i) = G * smp.ddy;
                out.gradient.dz(i) = G * smp.ddz;
            }
        }
    }
    add_reg_gradient(field, cfg, cfg.lambda_reg, out.gradient);
    return out;
}

DisplacementField total_loss_gradient(const Volume& moving, const Volume& fixed,
                                      const DisplacementField& field, const LossConfig& cfg) {
    return loss_and_gradient(moving, fixed, field, cfg).gradient;
}

double total_loss_f64(const Volume& moving, const Volume& fixed,
                      const DisplacementField& field, const LossConfig& cfg) {
    cfg.validate();
    check_grids(moving.grid, fixed.grid, "total_loss_f64");
    check_grids(moving.grid, field.grid, "total_loss_f64");
    const GridSpec& g = moving.grid;
    const std::size_t N = static_cast<std::size_t>(g.voxel_count());
    std::vector<double> iw(N);
    const float* src = moving.data.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t z = 0; z < g.dims[2]; ++z) {
        for (std::int64_t y = 0; y < g.dims[1]; ++y) {
            std::int64_t i = g.index(0, y, z);
            for (std::int64_t x = 0; x < g.dims[0]; ++x, ++i) {
                iw[static_cast<std::size_t>(i)] =
                    sample_trilinear(src, g,
                                     static_cast<double>(x) + field.dx(i),
                                     static_cast<double>(y) + field.dy(i),
                                     static_cast<double>(z) + field.dz(i))
                        .value;
            }
        }
    }
    const int r = (cfg.window - 1) / 2;
    const auto stats = window_stats(g, std::move(iw), promote(fixed.data), r);
    const double sim = -lncc_mean(g, stats, cfg.epsilon, nullptr);
    return sim + cfg.lambda_reg * reg_loss_impl(field, cfg);
}

} // namespace air
