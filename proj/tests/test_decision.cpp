// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "air/decision.hpp"

using namespace air;

TEST_CASE("record_loss grows the multiset and rejects non-finite values") {
    EpochLossTracker t;
    CHECK(t.count() == 0);
    t.record_loss(-0.5);
    CHECK(t.count() == 1);
    CHECK(t.losses_seen().front() == -0.5);
    for (int k = 0; k < 99; ++k)
        t.record_loss(-0.1 * k);
    CHECK(t.count() == 100);
    CHECK_THROWS_AS(t.record_loss(std::numeric_limits<double>::infinity()), NumericError);
}

TEST_CASE("the interpolated quantile of 1..100 at 0.95 is 95.05") {
    std::vector<double> v;
    for (int k = 1; k <= 100; ++k)
        v.push_back(k);
    CHECK(quantile_linear(v, 0.95) == doctest::Approx(95.05).epsilon(1e-12));
    CHECK(quantile_linear(v, 0.0) == 1.0);
    CHECK(quantile_linear(v, 1.0) == 100.0);
    CHECK(quantile_linear({42.0}, 0.7) == 42.0);
    CHECK_THROWS_AS(quantile_linear({}, 0.5), DataError);
}

TEST_CASE("a draw above the threshold triggers regardless of loss") {
    EpochLossTracker t;
    DecisionPolicy p; // defaults 0.95 / 0.95 / warmup 10
    for (int k = 0; k < 20; ++k)
        t.record_loss(-0.9 + 0.01 * k);
    const Decision d = should_optimize(t, p, -100.0, 0.99);
    CHECK(d.optimize);
    CHECK(d.reason == DecisionReason::random);
}

TEST_CASE("the running maximum always satisfies the loss criterion") {
    EpochLossTracker t;
    DecisionPolicy p;
    double max_seen = -1e9;
    for (int k = 0; k < 20; ++k) {
        const double loss = -0.9 + 0.01 * k;
        t.record_loss(loss);
        max_seen = std::max(max_seen, loss);
    }
    const Decision d = should_optimize(t, p, max_seen, 0.0);
    CHECK(d.optimize);
    CHECK(d.reason == DecisionReason::loss);
}

TEST_CASE("below-quantile losses with a low draw are declined") {
    EpochLossTracker t;
    DecisionPolicy p;
    for (int k = 0; k < 20; ++k)
        t.record_loss(static_cast<double>(k));
    const Decision d = should_optimize(t, p, 2.0, 0.5);
    CHECK_FALSE(d.optimize);
    CHECK(d.reason == DecisionReason::declined);
}

TEST_CASE("the loss criterion stays off during warmup") {
    EpochLossTracker t;
    DecisionPolicy p;
    p.warmup_pairs = 10;
    for (int k = 0; k < 9; ++k)
        t.record_loss(static_cast<double>(k));
    const Decision d = should_optimize(t, p, 1000.0, 0.0);
    CHECK_FALSE(d.optimize);
    t.record_loss(1000.0);
    const Decision d2 = should_optimize(t, p, 1000.0, 0.0);
    CHECK(d2.optimize);
    CHECK(d2.reason == DecisionReason::loss);
}

TEST_CASE("end_epoch reports and resets") {
    EpochLossTracker t(3);
    const DecisionPolicy p;
    const EpochStats empty = t.end_epoch(p);
    CHECK(empty.count == 0);
    CHECK_FALSE(empty.quantile.has_value());
    CHECK(empty.to_json_string().find("\"quantile\":null") != std::string::npos);
    CHECK(t.epoch_index() == 4);

    t.record_loss(1.0);
    t.record_loss(3.0);
    t.record_decision(DecisionReason::loss);
    t.record_decision(DecisionReason::declined);
    const EpochStats s = t.end_epoch(p);
    CHECK(s.count == 2);
    CHECK(s.mean == doctest::Approx(2.0));
    CHECK(s.quantile.has_value());
    CHECK(s.by_loss == 1);
    CHECK(s.declined == 1);
    CHECK(t.count() == 0);
}

TEST_CASE("random trigger frequency over 10000 draws sits in the 99% CI") {
    DecisionPolicy p;
    p.random_threshold = 0.95;
    p.warmup_pairs = static_cast<std::size_t>(-1); // random criterion only
    EpochLossTracker t;
    std::mt19937_64 gen(2024);
    std::size_t triggered = 0;
    for (int k = 0; k < 10000; ++k) {
        t.record_loss(-0.5);
        const Decision d = should_optimize(t, p, -0.5, unit_open_draw(gen));
        triggered += d.optimize;
        CHECK((!d.optimize || d.reason == DecisionReason::random));
    }
    CHECK(triggered >= 436);
    CHECK(triggered <= 566);
    const EpochStats s = t.end_epoch(p);
    CHECK(s.by_random == triggered);
    CHECK(s.declined == 10000 - triggered);
}

TEST_CASE("deterministic replay yields identical stats") {
    const auto run = [] {
        DecisionPolicy p;
        EpochLossTracker t;
        std::mt19937_64 gen(7);
        for (int k = 0; k < 500; ++k) {
            const double loss = -1.0 + unit_open_draw(gen);
            t.record_loss(loss);
            should_optimize(t, p, loss, unit_open_draw(gen));
        }
        return t.end_epoch(p).to_json_string();
    };
    CHECK(run() == run());
}

TEST_CASE("raising thresholds never increases trigger counts") {
    std::mt19937_64 gen(55);
    std::vector<double> losses, draws;
    for (int k = 0; k < 2000; ++k) {
        losses.push_back(-1.0 + unit_open_draw(gen));
        draws.push_back(unit_open_draw(gen));
    }
    const auto count_triggers = [&](double quantile, double threshold) {
        DecisionPolicy p;
        p.loss_quantile = quantile;
        p.random_threshold = threshold;
        p.warmup_pairs = 10;
        EpochLossTracker t;
        std::size_t n = 0;
        for (std::size_t k = 0; k < losses.size(); ++k) {
            t.record_loss(losses[k]);
            n += should_optimize(t, p, losses[k], draws[k]).optimize;
        }
        return n;
    };
    CHECK(count_triggers(0.95, 0.90) >= count_triggers(0.95, 0.95));
    CHECK(count_triggers(0.90, 0.95) >= count_triggers(0.95, 0.95));
    CHECK(count_triggers(0.99, 0.99) <= count_triggers(0.90, 0.90));
}

TEST_CASE("degenerate policies: never and always") {
    std::mt19937_64 gen(91);
    DecisionPolicy never;
    never.loss_quantile = 1.0;
    never.random_threshold = 1.0;
    never.warmup_pairs = static_cast<std::size_t>(-1);
    DecisionPolicy always;
    always.random_threshold = 0.0;
    always.warmup_pairs = static_cast<std::size_t>(-1);
    EpochLossTracker tn, ta;
    for (int k = 0; k < 3000; ++k) {
        const double loss = -unit_open_draw(gen);
        const double draw = unit_open_draw(gen);
        tn.record_loss(loss);
        ta.record_loss(loss);
        CHECK_FALSE(should_optimize(tn, never, loss, draw).optimize);
        CHECK(should_optimize(ta, always, loss, draw).optimize);
    }
}

TEST_CASE("the epoch maximum triggers whenever it lands past warmup") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        std::mt19937_64 gen(seed);
        std::vector<double> losses;
        for (int k = 0; k < 60; ++k)
            losses.push_back(-2.0 + 2.0 * unit_open_draw(gen));
        const std::size_t argmax = static_cast<std::size_t>(
            std::max_element(losses.begin(), losses.end()) - losses.begin());

        DecisionPolicy p; // warmup 10
        EpochLossTracker t;
        bool max_triggered = false;
        for (std::size_t k = 0; k < losses.size(); ++k) {
            t.record_loss(losses[k]);
            const Decision d = should_optimize(t, p, losses[k], 0.0);
            if (k == argmax)
                max_triggered = d.optimize && d.reason == DecisionReason::loss;
        }
        if (argmax + 1 >= p.warmup_pairs)
            CHECK(max_triggered);
    }
}

TEST_CASE("policy validation") {
    DecisionPolicy p;
    p.loss_quantile = 1.5;
    CHECK_THROWS_AS(p.validate(), DataError);
    p.loss_quantile = 0.5;
    p.random_threshold = -0.1;
    CHECK_THROWS_AS(p.validate(), DataError);
}
