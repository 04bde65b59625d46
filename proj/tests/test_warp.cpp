// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "air/warp.hpp"
#include "support/oracles.hpp"

using namespace air;

namespace {

Volume x_ramp(const GridSpec& g) {
    Volume v(g);
    for (std::int64_t z = 0; z < g.dims[2]; ++z)
        for (std::int64_t y = 0; y < g.dims[1]; ++y)
            for (std::int64_t x = 0; x < g.dims[0]; ++x)
                v.at(x, y, z) = static_cast<float>(x);
    return v;
}

DisplacementField constant_field(const GridSpec& g, double ux, double uy, double uz) {
    DisplacementField f(g);
    for (std::int64_t i = 0; i < g.voxel_count(); ++i) {
        f.dx(i) = ux;
        f.dy(i) = uy;
        f.dz(i) = uz;
    }
    return f;
}

} // namespace

TEST_CASE("warp with the zero field is the exact identity") {
    const Volume v = oracle::random_volume(GridSpec(5, 4, 3), 11);
    const Volume w = warp(v, DisplacementField(v.grid));
    CHECK(w.data == v.data);
}

TEST_CASE("unit shift with clamping") {
    const GridSpec g(4, 2, 2);
    const Volume v = x_ramp(g);
    const Volume w = warp(v, constant_field(g, 1, 0, 0));
    for (std::int64_t z = 0; z < 2; ++z)
        for (std::int64_t y = 0; y < 2; ++y) {
            CHECK(w.at(0, y, z) == 1.0f);
            CHECK(w.at(1, y, z) == 2.0f);
            CHECK(w.at(2, y, z) == 3.0f);
            CHECK(w.at(3, y, z) == 3.0f); // replicate padding
        }
}

TEST_CASE("trilinear interpolation is exact on linear ramps") {
    const GridSpec g(8, 4, 4);
    const Volume v = x_ramp(g);
    const Volume w = warp(v, constant_field(g, 0.5, 0, 0));
    for (std::int64_t z = 0; z < 4; ++z)
        for (std::int64_t y = 0; y < 4; ++y)
            for (std::int64_t x = 0; x < 7; ++x)
                CHECK(w.at(x, y, z) == static_cast<float>(x) + 0.5f);
}

TEST_CASE("warp is linear in the moving image (dyadic inputs, exact)") {
    const GridSpec g(6, 5, 4);
    std::mt19937_64 gen(21);
    Volume I(g), J(g);
    for (std::int64_t i = 0; i < g.voxel_count(); ++i) {
        I.data[static_cast<std::size_t>(i)] = static_cast<float>(gen() % 17);
        J.data[static_cast<std::size_t>(i)] = static_cast<float>(gen() % 17);
    }
    DisplacementField f(g);
    for (auto& u : f.u)
        u = static_cast<double>(static_cast<std::int64_t>(gen() % 9) - 4) * 0.25;

    Volume combo(g);
    for (std::size_t i = 0; i < combo.data.size(); ++i)
        combo.data[i] = 2.0f * I.data[i] + 0.25f * J.data[i];

    const Volume wI = warp(I, f), wJ = warp(J, f), wC = warp(combo, f);
    for (std::size_t i = 0; i < wC.data.size(); ++i)
        CHECK(wC.data[i] == 2.0f * wI.data[i] + 0.25f * wJ.data[i]);
}

TEST_CASE("label warping is nearest-neighbor with pull semantics") {
    const GridSpec g(4, 2, 2);
    LabelMap m(g);
    for (std::int64_t z = 0; z < 2; ++z)
        for (std::int64_t y = 0; y < 2; ++y)
            m.at(1, y, z) = 7; // one-voxel stripe at x = 1

    const LabelMap same = warp_labels(m, DisplacementField(g));
    CHECK(same.labels == m.labels);

    // u = (1,0,0) pulls content one voxel toward -x
    const LabelMap shifted = warp_labels(m, constant_field(g, 1, 0, 0));
    for (std::int64_t z = 0; z < 2; ++z)
        for (std::int64_t y = 0; y < 2; ++y) {
            CHECK(shifted.at(0, y, z) == 7);
            CHECK(shifted.at(1, y, z) == 0);
        }

    // 0.49 rounds down to the same voxel
    const LabelMap nn = warp_labels(m, constant_field(g, 0.49, 0, 0));
    CHECK(nn.labels == m.labels);
    const LabelMap nn2 = warp_labels(m, constant_field(g, 0.51, 0, 0));
    CHECK(nn2.labels != m.labels);
}

TEST_CASE("warped label sets are subsets of the input set") {
    const GridSpec g(6, 6, 6);
    std::mt19937_64 gen(3);
    LabelMap m(g);
    for (auto& l : m.labels)
        l = static_cast<std::int32_t>(gen() % 4);
    const LabelMap w = warp_labels(m, oracle::safe_random_field(g, 17));
    const auto in_ids = m.label_ids();
    for (std::int32_t id : w.label_ids())
        CHECK(std::find(in_ids.begin(), in_ids.end(), id) != in_ids.end());
}

TEST_CASE("compose has the zero field as identity element") {
    const GridSpec g(5, 5, 5);
    const DisplacementField f = oracle::safe_random_field(g, 4);
    const DisplacementField zero(g);
    const DisplacementField a = compose(zero, f);
    const DisplacementField b = compose(f, zero);
    for (std::size_t i = 0; i < f.u.size(); ++i) {
        CHECK(a.u[i] == f.u[i]);
        CHECK(b.u[i] == f.u[i]);
    }
}

TEST_CASE("composing constant fields adds them") {
    const GridSpec g(5, 4, 3);
    const auto a = constant_field(g, 0.5, -0.25, 1.0);
    const auto b = constant_field(g, -0.75, 0.5, 0.25);
    const auto c = compose(a, b);
    for (std::int64_t i = 0; i < g.voxel_count(); ++i) {
        CHECK(c.dx(i) == doctest::Approx(-0.25).epsilon(1e-12));
        CHECK(c.dy(i) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(c.dz(i) == doctest::Approx(1.25).epsilon(1e-12));
    }
}

TEST_CASE("warping twice matches warping by the composed field on smooth data") {
    const std::int64_t n = 48;
    const GridSpec g(n, n, n);
    const Volume img = oracle::textured_volume(g, 64.0);

    auto sinus_field = [&](double amp, double period, double phase) {
        DisplacementField f(g);
        for (std::int64_t z = 0; z < g.dims[2]; ++z)
            for (std::int64_t y = 0; y < g.dims[1]; ++y)
                for (std::int64_t x = 0; x < g.dims[0]; ++x) {
                    const auto i = g.index(x, y, z);
                    f.dx(i) = amp * std::sin(2 * M_PI * (y + phase) / period);
                    f.dy(i) = amp * std::sin(2 * M_PI * (z + phase) / period);
                    f.dz(i) = amp * std::sin(2 * M_PI * (x + phase) / period);
                }
        return f;
    };
    const DisplacementField outer = sinus_field(0.4, 30.0, 1.7);
    const DisplacementField inner = sinus_field(0.3, 34.0, 0.4);

    const Volume two_step = warp(warp(img, outer), inner);
    const Volume one_step = warp(img, compose(outer, inner));
    // Compared over the interior: near faces the two pipelines clamp the
    // replicate padding at different intermediate positions.
    double max_diff = 0;
    for (std::int64_t z = 3; z < n - 3; ++z)
        for (std::int64_t y = 3; y < n - 3; ++y)
            for (std::int64_t x = 3; x < n - 3; ++x)
                max_diff = std::max(max_diff, std::abs(static_cast<double>(two_step.at(x, y, z)) -
                                                       one_step.at(x, y, z)));
    CHECK(max_diff < 1e-3);
}

TEST_CASE("grid mismatches are rejected") {
    const Volume v(GridSpec(4, 4, 4));
    const DisplacementField f(GridSpec(4, 4, 5));
    CHECK_THROWS_AS(warp(v, f), DataError);
    CHECK_THROWS_AS(compose(f, DisplacementField(GridSpec(4, 4, 4))), DataError);
}
