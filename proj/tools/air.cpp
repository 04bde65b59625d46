// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0
//
// `air` command line: synthetic corpora, training, registration, evaluation,
// and the gradient self-check. Exit codes: 0 ok, 1 usage, 2 data error,
// 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "air/io.hpp"
#include "air/train.hpp"
#include "air/warp.hpp"

namespace fs = std::filesystem;

namespace {

struct TrainArgs {
    std::string config_path, corpus, out, resume;
    std::optional<std::string> mode;
    std::optional<int> epochs, n_steps;
    std::optional<double> inner_lr, lr_outer, loss_quantile, random_threshold;
    std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainArgs& a) {
    air::AirConfig cfg = a.config_path.empty() ? air::AirConfig{}
                                               : air::AirConfig::from_json_file(a.config_path);
    if (a.mode) cfg.mode = air::train_mode_from_string(*a.mode);
    if (a.epochs) cfg.outer.epochs = *a.epochs;
    if (a.seed) cfg.outer.seed = *a.seed;
    if (a.n_steps) cfg.inner.n_steps = *a.n_steps;
    if (a.inner_lr) cfg.inner.lr = *a.inner_lr;
    if (a.lr_outer) cfg.outer.lr_outer = *a.lr_outer;
    if (a.loss_quantile) cfg.decision.loss_quantile = *a.loss_quantile;
    if (a.random_threshold) cfg.decision.random_threshold = *a.random_threshold;

    const air::TrainResult res = air::train(cfg, a.corpus, a.out, a.resume);
    const auto& epochs = res.log.epochs;
    std::printf("trained %zu epochs over %s (%s mode)\n", epochs.size(), a.corpus.c_str(),
                air::to_string(cfg.mode));
    if (!epochs.empty())
        std::printf("epoch-mean loss: first %.6f, last %.6f\n", epochs.front().mean,
                    epochs.back().mean);
    std::printf("checkpoint: %s.json\n", res.checkpoint_base.c_str());
    return 0;
}

struct RegisterArgs {
    std::string moving, fixed, backbone, out;
    std::string moving_labels, fixed_labels;
    bool identity_init = false;
    std::vector<std::string> refine; // N LR
};

int cmd_register(const RegisterArgs& a) {
    if (a.identity_init == !a.backbone.empty()) {
        std::fprintf(stderr, "register: pass exactly one of --backbone or --identity-init\n");
        return 1;
    }
    const air::Volume moving = air::load_volume(a.moving);
    const air::Volume fixed = air::load_volume(a.fixed);
    std::unique_ptr<air::Backbone> backbone;
    if (!a.backbone.empty())
        backbone = air::load_backbone(a.backbone);

    air::RegisterOptions opts;
    if (!a.refine.empty()) {
        opts.refine_steps = std::stoi(a.refine[0]);
        opts.refine_lr = std::stod(a.refine[1]);
    }
    const air::RegisterResult res = air::register_pair(moving, fixed, backbone.get(), opts);

    fs::create_directories(a.out);
    air::save_field(res.field, (fs::path(a.out) / "field").string());
    air::save_volume(res.warped, (fs::path(a.out) / "warped").string());
    if (res.refine_report) {
        std::ofstream rep(fs::path(a.out) / "refine_report.json");
        rep << res.refine_report->to_json_string() << "\n";
    }
    std::printf("registered in %.4f s (%s)\n", res.seconds,
                opts.refine_steps > 0 ? "with refinement" : "inference only");

    if (!a.moving_labels.empty() && !a.fixed_labels.empty()) {
        const air::LabelMap ml = air::load_label_map(a.moving_labels);
        const air::LabelMap fl = air::load_label_map(a.fixed_labels);
        const air::EvalReport rep = air::evaluate_pair(ml, fl, res.field, res.seconds);
        std::ofstream out(fs::path(a.out) / "eval.json");
        out << rep.to_json_string() << "\n";
        std::printf("mean dice %.4f, negative-Jacobian %.4f%%\n", rep.mean_dice,
                    rep.neg_jacobian_pct);
    }
    return 0;
}

struct EvaluateArgs {
    std::string corpus, backbone, mode = "air", out;
};

int cmd_evaluate(const EvaluateArgs& a) {
    const auto backbone = air::load_backbone(a.backbone);
    const air::EvaluateOutputs outputs =
        air::evaluate_corpus(a.corpus, *backbone, a.mode);
    fs::create_directories(a.out);
    for (const auto& [id, rep] : outputs.per_pair) {
        std::ofstream out(fs::path(a.out) / ("eval_" + id + ".json"));
        out << rep.to_json_string() << "\n";
    }
    air::append_summary_csv((fs::path(a.out) / "summary.csv").string(), outputs.summary);
    std::printf("method=%s dsc_val=%.4f neg_jac_pct=%.4f dsc_test=%.4f inference_s=%.4f\n",
                outputs.summary.method.c_str(), outputs.summary.dsc_val,
                outputs.summary.neg_jac_pct, outputs.summary.dsc_test,
                outputs.summary.inference_s);
    return 0;
}

struct SynthArgs {
    std::string spec, out;
    int pairs = 10;
};

int cmd_synth(const SynthArgs& a) {
    const air::SynthCorpusSpec spec = air::SynthCorpusSpec::from_json_file(a.spec);
    const air::CorpusManifest m = air::write_corpus(spec, a.pairs, a.out);
    std::printf("wrote %zu pairs to %s (train %zu / val %zu / test %zu)\n", m.pairs.size(),
                a.out.c_str(), m.in_split("train").size(), m.in_split("val").size(),
                m.in_split("test").size());
    return 0;
}

int cmd_gradcheck(int size, std::uint64_t seed) {
    const air::GradCheckReport rep = air::run_gradcheck(size, seed);
    std::fputs(rep.to_text().c_str(), stdout);
    return rep.pass ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Air: deformable 3D registration with adaptive instance optimization"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train a backbone over a corpus");
    train_cmd->add_option("--config", train_args.config_path, "JSON config file");
    train_cmd->add_option("--corpus", train_args.corpus, "corpus directory")->required();
    train_cmd->add_option("--out", train_args.out, "output directory")->required();
    train_cmd->add_option("--resume", train_args.resume, "resume from a training directory");
    train_cmd->add_option("--mode", train_args.mode, "air | baseline-no-opt | always-opt");
    train_cmd->add_option("--epochs", train_args.epochs);
    train_cmd->add_option("--seed", train_args.seed);
    train_cmd->add_option("--n-steps", train_args.n_steps, "inner optimization steps");
    train_cmd->add_option("--inner-lr", train_args.inner_lr);
    train_cmd->add_option("--lr-outer", train_args.lr_outer);
    train_cmd->add_option("--loss-quantile", train_args.loss_quantile);
    train_cmd->add_option("--random-threshold", train_args.random_threshold);

    RegisterArgs reg_args;
    auto* reg_cmd = app.add_subcommand("register", "Register one moving/fixed pair");
    reg_cmd->add_option("--moving", reg_args.moving)->required();
    reg_cmd->add_option("--fixed", reg_args.fixed)->required();
    reg_cmd->add_option("--backbone", reg_args.backbone, "checkpoint base path");
    reg_cmd->add_flag("--identity-init", reg_args.identity_init, "start from the zero field");
    reg_cmd->add_option("--refine", reg_args.refine, "N LR: instance-optimize the field")
        ->expected(2);
    reg_cmd->add_option("--out", reg_args.out)->required();
    reg_cmd->add_option("--moving-labels", reg_args.moving_labels);
    reg_cmd->add_option("--fixed-labels", reg_args.fixed_labels);

    EvaluateArgs eval_args;
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint over a corpus");
    eval_cmd->add_option("--corpus", eval_args.corpus)->required();
    eval_cmd->add_option("--backbone", eval_args.backbone)->required();
    eval_cmd->add_option("--mode", eval_args.mode, "method label for the summary row");
    eval_cmd->add_option("--out", eval_args.out)->required();

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus");
    synth_cmd->add_option("--spec", synth_args.spec, "phantom spec JSON")->required();
    synth_cmd->add_option("--out", synth_args.out)->required();
    synth_cmd->add_option("--pairs", synth_args.pairs, "number of pairs");

    int gc_size = 12;
    std::uint64_t gc_seed = 1234;
    auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient self-check");
    gc_cmd->add_option("--size", gc_size, "cubic grid edge");
    gc_cmd->add_option("--seed", gc_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*train_cmd) return cmd_train(train_args);
        if (*reg_cmd) return cmd_register(reg_args);
        if (*eval_cmd) return cmd_evaluate(eval_args);
        if (*synth_cmd) return cmd_synth(synth_args);
        if (*gc_cmd) return cmd_gradcheck(gc_size, gc_seed);
    } catch (const air::DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const air::NumericError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
    return 1;
}
