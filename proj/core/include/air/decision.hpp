// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "air/error.hpp"

namespace air {

/// Gate parameters for the adaptive optimization step. A pair is sent to the
/// optimizer when its loss reaches the running epoch quantile (after warmup)
/// or when an injected uniform draw exceeds the random threshold.
struct DecisionPolicy {
    double loss_quantile = 0.95;
    double random_threshold = 0.95;
    std::size_t warmup_pairs = 10;
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (loss_quantile < 0.0 || loss_quantile > 1.0)
            throw DataError("loss_quantile must be in [0, 1]");
        if (random_threshold < 0.0 || random_threshold > 1.0)
            throw DataError("random_threshold must be in [0, 1]");
    }
};

enum class DecisionReason { declined, loss, random };

const char* to_string(DecisionReason r);

struct Decision {
    bool optimize = false;
    DecisionReason reason = DecisionReason::declined;
};

struct EpochStats {
    std::size_t epoch = 0;
    std::size_t count = 0;
    double mean = 0.0;
    std::optional<double> quantile; // at the policy's loss_quantile; null when empty
    std::size_t by_loss = 0;
    std::size_t by_random = 0;
    std::size_t declined = 0;

    std::string to_json_string() const;
};

/// Empirical quantile with linear interpolation between order statistics:
/// h = (n-1)q, result = x[floor(h)] + (h - floor(h)) * (x[floor(h)+1] - x[floor(h)]).
double quantile_linear(std::vector<double> values, double q);

/// Streaming per-epoch loss multiset plus decision bookkeeping.
class EpochLossTracker {
public:
    explicit EpochLossTracker(std::size_t epoch_index = 0) : epoch_(epoch_index) {}

    void record_loss(double loss) {
        if (!std::isfinite(loss))
            throw NumericError("record_loss: non-finite loss");
        losses_.push_back(loss);
    }

    std::size_t epoch_index() const { return epoch_; }
    std::size_t count() const { return losses_.size(); }
    const std::vector<double>& losses_seen() const { return losses_; }

    void record_decision(DecisionReason r) {
        switch (r) {
        case DecisionReason::loss: ++by_loss_; break;
        case DecisionReason::random: ++by_random_; break;
        case DecisionReason::declined: ++declined_; break;
        }
    }

    /// Emits the epoch summary and resets for the next epoch.
    EpochStats end_epoch(const DecisionPolicy& policy);

private:
    std::size_t epoch_ = 0;
    std::vector<double> losses_;
    std::size_t by_loss_ = 0, by_random_ = 0, declined_ = 0;
};

/// One decision. The loss criterion is checked first (a pair satisfying both
/// records reason "loss"); the random criterion fires on rng_draw strictly
/// above the threshold. The taken reason is recorded on the tracker.
Decision should_optimize(EpochLossTracker& tracker, const DecisionPolicy& policy,
                         double pair_loss, double rng_draw);

/// Uniform draw in the open interval (0, 1): the midpoint of a 2^-53 cell.
/// Open endpoints make threshold 0 fire always and threshold 1 never.
inline double unit_open_draw(std::mt19937_64& gen) {
    return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace air
