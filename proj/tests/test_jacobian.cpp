// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "air/jacobian.hpp"

using namespace air;

namespace {

// Independent determinant computation with explicit per-axis differences.
double det_at(const DisplacementField& f, std::int64_t x, std::int64_t y, std::int64_t z) {
    const GridSpec& g = f.grid;
    auto d = [&](int c, int axis) {
        std::int64_t p[3] = {x, y, z};
        std::int64_t m[3] = {x, y, z};
        double scale = 0.5;
        if (p[axis] == 0) {
            p[axis] += 1;
            scale = 1.0;
        } else if (p[axis] == g.dims[axis] - 1) {
            m[axis] -= 1;
            scale = 1.0;
        } else {
            p[axis] += 1;
            m[axis] -= 1;
        }
        return scale * (f.comp(c, g.index(p[0], p[1], p[2])) -
                        f.comp(c, g.index(m[0], m[1], m[2])));
    };
    const double a = 1 + d(0, 0), b = d(0, 1), c = d(0, 2);
    const double e = d(1, 0), ff = 1 + d(1, 1), gg = d(1, 2);
    const double h = d(2, 0), i = d(2, 1), j = 1 + d(2, 2);
    return a * (ff * j - gg * i) - b * (e * j - gg * h) + c * (e * i - ff * h);
}

} // namespace

TEST_CASE("identity field has unit determinants everywhere") {
    const DisplacementField f(GridSpec(5, 4, 3));
    const Volume dets = jacobian_determinants(f);
    for (float d : dets.data)
        CHECK(d == 1.0f);
    CHECK(negative_jacobian_fraction(f) == 0.0);
}

TEST_CASE("linear expansion u = 0.1 p gives det 1.331") {
    const GridSpec g(7, 7, 7);
    DisplacementField f(g);
    for (std::int64_t z = 0; z < 7; ++z)
        for (std::int64_t y = 0; y < 7; ++y)
            for (std::int64_t x = 0; x < 7; ++x) {
                const auto i = g.index(x, y, z);
                f.dx(i) = 0.1 * static_cast<double>(x);
                f.dy(i) = 0.1 * static_cast<double>(y);
                f.dz(i) = 0.1 * static_cast<double>(z);
            }
    const Volume dets = jacobian_determinants(f);
    // central and one-sided differences are both exact on linear fields
    for (float d : dets.data)
        CHECK(std::abs(static_cast<double>(d) - 1.331) < 1e-5);
}

TEST_CASE("per-voxel determinants match the independent stencil") {
    const GridSpec g(6, 5, 4);
    DisplacementField f(g);
    std::mt19937_64 gen(77);
    for (auto& u : f.u)
        u = 0.3 * ((static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53 - 0.5);
    const Volume dets = jacobian_determinants(f);
    for (std::int64_t z = 0; z < g.dims[2]; ++z)
        for (std::int64_t y = 0; y < g.dims[1]; ++y)
            for (std::int64_t x = 0; x < g.dims[0]; ++x)
                CHECK(static_cast<double>(dets.at(x, y, z)) ==
                      doctest::Approx(det_at(f, x, y, z)).epsilon(1e-6));
}

TEST_CASE("a displacement spike folds its neighborhood") {
    const GridSpec g(5, 5, 5);
    DisplacementField f(g);
    f.dx(g.index(2, 2, 2)) = -3.0;

    const Volume dets = jacobian_determinants(f);
    std::int64_t folded = 0;
    double min_det = 1e9;
    for (std::int64_t z = 0; z < 5; ++z)
        for (std::int64_t y = 0; y < 5; ++y)
            for (std::int64_t x = 0; x < 5; ++x) {
                const double d = det_at(f, x, y, z); // brute-force count
                if (d <= 0.0)
                    ++folded;
                min_det = std::min(min_det, d);
                CHECK(static_cast<double>(dets.at(x, y, z)) == doctest::Approx(d));
            }
    CHECK(min_det < 0.0);
    CHECK(folded == 1); // only the -x neighbor sees du_x/dx = -1.5
    CHECK(negative_jacobian_fraction(f) ==
          doctest::Approx(100.0 * static_cast<double>(folded) / 125.0));
    CHECK(negative_jacobian_fraction(f) > 0.0);
}

TEST_CASE("dims below 3 are rejected") {
    CHECK_THROWS_AS(jacobian_determinants(DisplacementField(GridSpec(2, 5, 5))), DataError);
}
