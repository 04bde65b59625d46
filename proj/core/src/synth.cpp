// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#include "air/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "air/decision.hpp" // unit_open_draw
#include "air/warp.hpp"

namespace air {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Hand-rolled Box-Muller so corpora are bitwise reproducible across standard
// library implementations.
double gaussian_draw(std::mt19937_64& gen) {
    const double u1 = unit_open_draw(gen);
    const double u2 = unit_open_draw(gen);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double uniform_in(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * unit_open_draw(gen);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Appearance {
    std::array<double, 3> center;     // primary structure center
    std::array<double, 3> center2;    // secondary blob
    double radius;
    double radius2;
    std::array<double, 3> tex_phase;
};

Appearance draw_appearance(const PhantomSpec& spec, std::mt19937_64& gen) {
    const auto& d = spec.grid.dims;
    const double mind = static_cast<double>(std::min({d[0], d[1], d[2]}));
    Appearance a;
    for (int i = 0; i < 3; ++i) {
        const double mid = 0.5 * static_cast<double>(d[i] - 1);
        a.center[i] = mid + uniform_in(gen, -0.06, 0.06) * static_cast<double>(d[i]);
        a.center2[i] = mid + (i == 0 ? 0.22 : -0.14) * static_cast<double>(d[i]) +
                       uniform_in(gen, -0.04, 0.04) * static_cast<double>(d[i]);
    }
    a.radius = 0.30 * mind * uniform_in(gen, 0.9, 1.1);
    a.radius2 = 0.18 * mind * uniform_in(gen, 0.9, 1.1);
    for (int i = 0; i < 3; ++i)
        a.tex_phase[i] = uniform_in(gen, 0.0, mind);
    return a;
}

double texture(const Appearance& a, double period, double x, double y, double z) {
    return std::sin(kTwoPi * (x + a.tex_phase[0]) / period) *
           std::sin(kTwoPi * (y + a.tex_phase[1]) / period) *
           std::sin(kTwoPi * (z + a.tex_phase[2]) / period);
}

double radius_to(const std::array<double, 3>& c, double x, double y, double z) {
    const double dx = x - c[0], dy = y - c[1], dz = z - c[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void paint(const PhantomSpec& spec, const Appearance& a, Volume& vol, LabelMap& labels) {
    const GridSpec& g = spec.grid;
    const double mind = static_cast<double>(std::min({g.dims[0], g.dims[1], g.dims[2]}));
    const double edge = 1.5; // soft-edge width in voxels
    std::int64_t i = 0;
    for (std::int64_t z = 0; z < g.dims[2]; ++z) {
        for (std::int64_t y = 0; y < g.dims[1]; ++y) {
            for (std::int64_t x = 0; x < g.dims[0]; ++x, ++i) {
                const double fx = static_cast<double>(x);
                const double fy = static_cast<double>(y);
                const double fz = static_cast<double>(z);
                const double tex = texture(a, mind / 5.0, fx, fy, fz);
                double v = 0.0;
                std::int32_t lab = 0;
                switch (spec.kind) {
                case PhantomKind::sphere: {
                    // Texture rides on top of the shape so local correlation
                    // has signal away from the boundary too.
                    const double r = radius_to(a.center, fx, fy, fz);
                    v = 0.64 * sigmoid((a.radius - r) / edge) + 0.28 * (0.5 + 0.5 * tex);
                    if (r <= 0.55 * a.radius)
                        lab = 1;
                    else if (r <= a.radius)
                        lab = 2;
                    break;
                }
                case PhantomKind::two_blob: {
                    const double r1 = radius_to(a.center, fx, fy, fz);
                    const double r2 = radius_to(a.center2, fx, fy, fz);
                    v = 0.56 * sigmoid((a.radius - r1) / edge) +
                        0.45 * sigmoid((a.radius2 - r2) / edge) + 0.24 * (0.5 + 0.5 * tex);
                    if (r1 <= a.radius)
                        lab = 1;
                    else if (r2 <= a.radius2)
                        lab = 2;
                    break;
                }
                case PhantomKind::checker_smooth: {
                    v = 0.5 + 0.5 * tex;
                    if (v > 0.8)
                        lab = 1;
                    else if (v < 0.2)
                        lab = 2;
                    break;
                }
                }
                vol.data[static_cast<std::size_t>(i)] = static_cast<float>(v);
                labels.labels[static_cast<std::size_t>(i)] = lab;
            }
        }
    }
}

} // namespace

void PhantomSpec::validate() const {
    grid.validate();
    if (noise_sigma < 0.0)
        throw DataError("noise_sigma must be >= 0");
    switch (deform.kind) {
    case DeformSpec::Kind::smooth_sinusoid:
        if (!(deform.wavelength > 0.0))
            throw DataError("sinusoid wavelength must be > 0");
        if (!(deform.amplitude < deform.wavelength / kTwoPi))
            throw DataError("fold risk: sinusoid amplitude must be < wavelength / (2 pi)");
        break;
    case DeformSpec::Kind::radial_expansion:
        if (!(deform.expansion > -1.0))
            throw DataError("fold risk: radial expansion must be > -1");
        break;
    default:
        break;
    }
}

DisplacementField make_true_field(const PhantomSpec& spec) {
    spec.validate();
    const GridSpec& g = spec.grid;
    DisplacementField f(g);
    const DeformSpec& d = spec.deform;
    if (d.kind == DeformSpec::Kind::none)
        return f;

    std::array<double, 3> center{0.5 * static_cast<double>(g.dims[0] - 1),
                                 0.5 * static_cast<double>(g.dims[1] - 1),
                                 0.5 * static_cast<double>(g.dims[2] - 1)};
    std::int64_t i = 0;
    for (std::int64_t z = 0; z < g.dims[2]; ++z) {
        for (std::int64_t y = 0; y < g.dims[1]; ++y) {
            for (std::int64_t x = 0; x < g.dims[0]; ++x, ++i) {
                const double pos[3] = {static_cast<double>(x), static_cast<double>(y),
                                       static_cast<double>(z)};
                for (int c = 0; c < 3; ++c) {
                    double u = 0.0;
                    switch (d.kind) {
                    case DeformSpec::Kind::translation:
                        u = d.translation[static_cast<std::size_t>(c)];
                        break;
                    case DeformSpec::Kind::smooth_sinusoid:
                        // Each component varies along its own axis, so the
                        // Jacobian is diagonal and provably positive under the
                        // amplitude bound.
                        u = d.amplitude *
                            std::sin(kTwoPi * (pos[c] + d.phase[static_cast<std::size_t>(c)]) /
                                     d.wavelength);
                        break;
                    case DeformSpec::Kind::radial_expansion:
                        u = d.expansion * (pos[c] - center[static_cast<std::size_t>(c)]);
                        break;
                    case DeformSpec::Kind::none:
                        break;
                    }
                    f.comp(c, i) = u;
                }
            }
        }
    }
    return f;
}

PhantomPair generate_pair(const PhantomSpec& spec) {
    spec.validate();
    std::mt19937_64 gen(spec.seed);

    PhantomPair out;
    out.moving = Volume(spec.grid);
    out.moving_labels = LabelMap(spec.grid);
    const Appearance a = draw_appearance(spec, gen);
    paint(spec, a, out.moving, out.moving_labels);

    out.true_field = make_true_field(spec);
    out.fixed = warp(out.moving, out.true_field);
    out.fixed_labels = warp_labels(out.moving_labels, out.true_field);

    if (spec.noise_sigma > 0.0) {
        for (float& v : out.fixed.data)
            v = static_cast<float>(static_cast<double>(v) +
                                   spec.noise_sigma * gaussian_draw(gen));
    }
    return out;
}

PhantomKind phantom_kind_from_string(const std::string& s) {
    if (s == "sphere") return PhantomKind::sphere;
    if (s == "two-blob") return PhantomKind::two_blob;
    if (s == "checker-smooth") return PhantomKind::checker_smooth;
    throw DataError("unknown phantom kind: " + s);
}

const char* to_string(PhantomKind k) {
    switch (k) {
    case PhantomKind::sphere: return "sphere";
    case PhantomKind::two_blob: return "two-blob";
    case PhantomKind::checker_smooth: return "checker-smooth";
    }
    return "?";
}

DeformSpec::Kind deform_kind_from_string(const std::string& s) {
    if (s == "none") return DeformSpec::Kind::none;
    if (s == "translation") return DeformSpec::Kind::translation;
    if (s == "smooth-sinusoid") return DeformSpec::Kind::smooth_sinusoid;
    if (s == "radial-expansion") return DeformSpec::Kind::radial_expansion;
    throw DataError("unknown deform kind: " + s);
}

const char* to_string(DeformSpec::Kind k) {
    switch (k) {
    case DeformSpec::Kind::none: return "none";
    case DeformSpec::Kind::translation: return "translation";
    case DeformSpec::Kind::smooth_sinusoid: return "smooth-sinusoid";
    case DeformSpec::Kind::radial_expansion: return "radial-expansion";
    }
    return "?";
}

} // namespace air
