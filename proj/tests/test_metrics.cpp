// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "air/metrics.hpp"
#include "support/oracles.hpp"

using namespace air;

TEST_CASE("dice on hand-built sets") {
    const GridSpec g(4, 4, 4);
    LabelMap a(g), b(g);

    // A holds 8 voxels of label 1, B holds 4, overlapping region is 2.
    for (std::int64_t i = 0; i < 8; ++i)
        a.labels[static_cast<std::size_t>(i)] = 1;
    for (std::int64_t i = 6; i < 10; ++i)
        b.labels[static_cast<std::size_t>(i)] = 1;
    CHECK(dice(a, b, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(dice(b, a, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12)); // symmetric

    CHECK(dice(a, a, 1) == 1.0);
    CHECK(dice(a, b, 9) == 1.0); // both empty
    CHECK(dice(a, b, 0) < 1.0);  // background overlaps partially

    LabelMap disjoint(g);
    for (std::int64_t i = 20; i < 28; ++i)
        disjoint.labels[static_cast<std::size_t>(i)] = 1;
    CHECK(dice(a, disjoint, 1) == 0.0);

    LabelMap empty(g);
    CHECK(dice(a, empty, 1) == 0.0); // exactly one side empty
}

TEST_CASE("dice is symmetric and bounded on random maps") {
    const GridSpec g(6, 6, 6);
    std::mt19937_64 gen(31);
    LabelMap a(g), b(g);
    for (auto& l : a.labels)
        l = static_cast<std::int32_t>(gen() % 3);
    for (auto& l : b.labels)
        l = static_cast<std::int32_t>(gen() % 3);
    for (std::int32_t id : {1, 2}) {
        const double d = dice(a, b, id);
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
        CHECK(d == dice(b, a, id));
    }
}

TEST_CASE("evaluate_pair with the identity field returns the raw Dice") {
    const GridSpec g(8, 8, 8);
    std::mt19937_64 gen(13);
    LabelMap m(g), f(g);
    for (auto& l : m.labels)
        l = static_cast<std::int32_t>(gen() % 4);
    for (auto& l : f.labels)
        l = static_cast<std::int32_t>(gen() % 4);

    const EvalReport rep = evaluate_pair(m, f, DisplacementField(g), 0.25);
    CHECK(rep.inference_seconds == 0.25);
    CHECK(rep.neg_jacobian_pct == 0.0);

    double lo = 1e9, hi = -1e9, sum = 0.0;
    for (std::int32_t id : f.label_ids()) {
        const double d = dice(m, f, id);
        CHECK(rep.per_label_dice.at(id) == d);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        sum += d;
    }
    CHECK(rep.mean_dice == doctest::Approx(sum / 3.0).epsilon(1e-12));
    CHECK(rep.mean_dice >= lo);
    CHECK(rep.mean_dice <= hi);
}

TEST_CASE("identical maps under the identity field score perfectly") {
    const GridSpec g(6, 6, 6);
    LabelMap m(g);
    for (std::int64_t i = 0; i < 40; ++i)
        m.labels[static_cast<std::size_t>(i)] = 1 + static_cast<std::int32_t>(i % 2);
    const EvalReport rep = evaluate_pair(m, m, DisplacementField(g), 0.0);
    CHECK(rep.mean_dice == 1.0);
    CHECK(rep.neg_jacobian_pct == 0.0);
    const std::string j = rep.to_json_string();
    CHECK(j.find("mean_dice") != std::string::npos);
    CHECK(j.find("neg_jacobian_pct") != std::string::npos);
}
