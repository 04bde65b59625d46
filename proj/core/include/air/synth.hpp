// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "air/field.hpp"
#include "air/volume.hpp"

namespace air {

enum class PhantomKind { sphere, two_blob, checker_smooth };

struct DeformSpec {
    enum class Kind { none, translation, smooth_sinusoid, radial_expansion };
    Kind kind = Kind::none;
    std::array<double, 3> translation{0, 0, 0}; // voxels
    double amplitude = 0.0;                     // sinusoid, voxels
    double wavelength = 0.0;                    // sinusoid, voxels
    std::array<double, 3> phase{0, 0, 0};       // sinusoid, voxels
    double expansion = 0.0;                     // radial factor c, > -1
};

/// Deterministic moving/fixed pair with analytic ground truth. Appearance
/// (centers, radii, texture phases) is jittered from the seed; the deform
/// parameters are taken literally. Sinusoid amplitudes must stay below
/// wavelength / (2 pi) so the true field is provably fold-free.
struct PhantomSpec {
    GridSpec grid;
    PhantomKind kind = PhantomKind::sphere;
    DeformSpec deform;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PhantomPair {
    Volume moving;
    Volume fixed;
    DisplacementField true_field;
    LabelMap moving_labels;
    LabelMap fixed_labels;
};

PhantomPair generate_pair(const PhantomSpec& spec);

/// The analytic ground-truth field alone (fixed = warp(moving, field) + noise).
DisplacementField make_true_field(const PhantomSpec& spec);

PhantomKind phantom_kind_from_string(const std::string& s);
const char* to_string(PhantomKind k);
DeformSpec::Kind deform_kind_from_string(const std::string& s);
const char* to_string(DeformSpec::Kind k);

} // namespace air
