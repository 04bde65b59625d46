// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "air/backbone.hpp"
#include "air/corpus.hpp"
#include "air/decision.hpp"
#include "air/loss.hpp"
#include "air/metrics.hpp"
#include "air/optimize.hpp"

namespace air {

enum class TrainMode { air, baseline_no_opt, always_opt };

TrainMode train_mode_from_string(const std::string& s);
const char* to_string(TrainMode m);

struct InnerConfig {
    int n_steps = 15;
    double lr = 0.1;
};

struct OuterConfig {
    int epochs = 500;
    double lr_outer = 1e-4;
    std::uint64_t seed = 0;
};

struct BackboneConfig {
    std::string type = "control-grid"; // or "zero-field"
    std::array<std::int64_t, 3> control_dims{4, 4, 4};
};

struct AirConfig {
    LossConfig loss;
    InnerConfig inner;
    DecisionPolicy decision;
    OuterConfig outer;
    TrainMode mode = TrainMode::air;
    BackboneConfig backbone;
    GradientMode gradient_mode = GradientMode::straight_through;

    static AirConfig from_json_file(const std::string& path);
    std::string to_json_string() const;
};

struct IterRecord {
    int epoch = 0;
    std::string pair_id;
    DecisionReason reason = DecisionReason::declined;
    double loss_before = 0.0;
    double loss_after = 0.0;
    int inner_steps = 0;
};

struct TrainLog {
    std::vector<IterRecord> iters;
    std::vector<EpochStats> epochs;

    void write_jsonl(const std::string& path) const;
};

struct TrainResult {
    std::string checkpoint_base; // out_dir/backbone
    TrainLog log;
};

/// The three-step loop: predict, decide, optionally refine, update. One pair
/// per update (batch size 1); pair order reshuffled per epoch from a derived
/// seed; decisions consume a draw per pair from a second derived stream so
/// runs are reproducible and resumable at epoch boundaries.
TrainResult train(const AirConfig& config, const std::string& corpus_dir,
                  const std::string& out_dir, const std::string& resume_dir = "");

struct RegisterOptions {
    LossConfig loss;
    int refine_steps = 0; // 0 = pure inference
    double refine_lr = 0.1;
};

struct RegisterResult {
    DisplacementField field;
    Volume warped;
    double seconds = 0.0; // wall time of field production + warp
    std::optional<OptimizeReport> refine_report;
};

/// Inference for one pair. backbone == nullptr means identity initialization.
/// Without refinement no optimizer state is ever constructed.
RegisterResult register_pair(const Volume& moving, const Volume& fixed,
                             const Backbone* backbone, const RegisterOptions& opts);

struct MethodSummary {
    std::string method;
    double dsc_val = 0.0;
    double neg_jac_pct = 0.0;
    double dsc_test = 0.0;
    double inference_s = 0.0;
};

struct EvaluateOutputs {
    std::vector<std::pair<std::string, EvalReport>> per_pair; // val + test splits
    MethodSummary summary;
};

/// Predict-only evaluation over the corpus val/test splits.
EvaluateOutputs evaluate_corpus(const std::string& corpus_dir, const Backbone& backbone,
                                const std::string& method_label);

/// Appends a summary row (creating the header first) and rewrites the
/// dsc_test delta column relative to the file's first row.
void append_summary_csv(const std::string& csv_path, const MethodSummary& row);

struct GradCheckReport {
    double max_rel_err = 0.0;
    int probes = 0;
    int size = 0;
    std::uint64_t seed = 0;
    bool pass = false;

    std::string to_text() const;
};

/// Central finite differences (h = 1e-3, f64 functional) against the analytic
/// gradient at randomly probed coordinates of a random instance.
GradCheckReport run_gradcheck(int size, std::uint64_t seed, int probes = 64,
                              const LossConfig& cfg = {});

} // namespace air
