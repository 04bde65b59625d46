// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#include "air/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include <json.hpp>

#include "air/io.hpp"
#include "air/warp.hpp"

namespace air {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// In-place Fisher-Yates with explicit draws, so the order does not depend on
// the standard library's std::shuffle implementation.
void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& gen) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(gen() % i);
        std::swap(idx[i - 1], idx[j]);
    }
}

DecisionPolicy effective_policy(const AirConfig& cfg) {
    DecisionPolicy p = cfg.decision;
    switch (cfg.mode) {
    case TrainMode::air:
        break;
    case TrainMode::baseline_no_opt:
        // Never triggers, but still consumes one draw per pair so checkpoints
        // stay bitwise comparable with an air run whose thresholds never fire.
        p.loss_quantile = 1.0;
        p.random_threshold = 1.0;
        p.warmup_pairs = static_cast<std::size_t>(-1);
        break;
    case TrainMode::always_opt:
        p.random_threshold = 0.0; // draws are strictly positive
        break;
    }
    return p;
}

std::unique_ptr<Backbone> make_backbone(const AirConfig& cfg, const GridSpec& grid) {
    if (cfg.backbone.type == "zero-field")
        return std::make_unique<ZeroFieldBackbone>(grid);
    if (cfg.backbone.type == "control-grid")
        return std::make_unique<ControlGridBackbone>(grid, cfg.backbone.control_dims,
                                                     cfg.outer.lr_outer, cfg.gradient_mode);
    throw DataError("unknown backbone type: " + cfg.backbone.type);
}

} // namespace

TrainMode train_mode_from_string(const std::string& s) {
    if (s == "air") return TrainMode::air;
    if (s == "baseline-no-opt") return TrainMode::baseline_no_opt;
    if (s == "always-opt") return TrainMode::always_opt;
    throw DataError("unknown mode: " + s);
}

const char* to_string(TrainMode m) {
    switch (m) {
    case TrainMode::air: return "air";
    case TrainMode::baseline_no_opt: return "baseline-no-opt";
    case TrainMode::always_opt: return "always-opt";
    }
    return "?";
}

AirConfig AirConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("malformed config: " + std::string(e.what()));
    }

    AirConfig c;
    if (j.contains("loss")) {
        const auto& l = j["loss"];
        c.loss.window = l.value("window", c.loss.window);
        c.loss.epsilon = l.value("epsilon", c.loss.epsilon);
        c.loss.lambda_reg = l.value("lambda_reg", c.loss.lambda_reg);
        c.loss.reg_raw_sum = l.value("reg_raw_sum", c.loss.reg_raw_sum);
    }
    if (j.contains("inner")) {
        const auto& i = j["inner"];
        c.inner.n_steps = i.value("n_steps", c.inner.n_steps);
        c.inner.lr = i.value("lr", c.inner.lr);
    }
    if (j.contains("decision")) {
        const auto& d = j["decision"];
        c.decision.loss_quantile = d.value("loss_quantile", c.decision.loss_quantile);
        c.decision.random_threshold = d.value("random_threshold", c.decision.random_threshold);
        c.decision.warmup_pairs = d.value("warmup_pairs", c.decision.warmup_pairs);
        c.decision.rng_seed = d.value("rng_seed", c.decision.rng_seed);
    }
    if (j.contains("outer")) {
        const auto& o = j["outer"];
        c.outer.epochs = o.value("epochs", c.outer.epochs);
        c.outer.lr_outer = o.value("lr_outer", c.outer.lr_outer);
        c.outer.seed = o.value("seed", c.outer.seed);
    }
    if (j.contains("mode"))
        c.mode = train_mode_from_string(j["mode"].get<std::string>());
    if (j.contains("backbone")) {
        const auto& b = j["backbone"];
        c.backbone.type = b.value("type", c.backbone.type);
        if (b.contains("control_dims"))
            c.backbone.control_dims = {b["control_dims"][0].get<std::int64_t>(),
                                       b["control_dims"][1].get<std::int64_t>(),
                                       b["control_dims"][2].get<std::int64_t>()};
    }
    if (j.contains("gradient_mode"))
        c.gradient_mode = gradient_mode_from_string(j["gradient_mode"].get<std::string>());
    c.loss.validate();
    c.decision.validate();
    return c;
}

std::string AirConfig::to_json_string() const {
    json j;
    j["loss"] = {{"window", loss.window},
                 {"epsilon", loss.epsilon},
                 {"lambda_reg", loss.lambda_reg},
                 {"reg_raw_sum", loss.reg_raw_sum}};
    j["inner"] = {{"n_steps", inner.n_steps}, {"lr", inner.lr}};
    j["decision"] = {{"loss_quantile", decision.loss_quantile},
                     {"random_threshold", decision.random_threshold},
                     {"warmup_pairs", decision.warmup_pairs},
                     {"rng_seed", decision.rng_seed}};
    j["outer"] = {{"epochs", outer.epochs}, {"lr_outer", outer.lr_outer}, {"seed", outer.seed}};
    j["mode"] = to_string(mode);
    j["backbone"] = {{"type", backbone.type},
                     {"control_dims",
                      {backbone.control_dims[0], backbone.control_dims[1],
                       backbone.control_dims[2]}}};
    j["gradient_mode"] = to_string(gradient_mode);
    return j.dump(2);
}

void TrainLog::write_jsonl(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw DataError("cannot write " + path);
    std::size_t it = 0;
    for (const auto& es : epochs) {
        while (it < iters.size() && iters[it].epoch == static_cast<int>(es.epoch)) {
            const auto& r = iters[it];
            json j;
            j["type"] = "iter";
            j["epoch"] = r.epoch;
            j["pair"] = r.pair_id;
            j["reason"] = to_string(r.reason);
            j["loss_before"] = r.loss_before;
            j["loss_after"] = r.loss_after;
            j["inner_steps"] = r.inner_steps;
            out << j.dump() << "\n";
            ++it;
        }
        out << es.to_json_string() << "\n";
    }
}

TrainResult train(const AirConfig& config, const std::string& corpus_dir,
                  const std::string& out_dir, const std::string& resume_dir) {
    config.loss.validate();
    config.decision.validate();
    if (config.outer.epochs < 1)
        throw DataError("train: epochs must be >= 1");
    if (config.inner.n_steps < 1)
        throw DataError("train: inner n_steps must be >= 1");

    const CorpusManifest manifest = load_corpus_manifest(corpus_dir);
    const auto train_entries = manifest.in_split("train");
    if (train_entries.empty())
        throw DataError("corpus has no training pairs: " + corpus_dir);

    std::vector<CorpusPair> pairs;
    pairs.reserve(train_entries.size());
    for (const auto& e : train_entries)
        pairs.push_back(load_corpus_pair(manifest, e));
    const GridSpec grid = pairs.front().moving.grid;

    std::unique_ptr<Backbone> backbone;
    int start_epoch = 0;
    if (!resume_dir.empty()) {
        const std::string base = (fs::path(resume_dir) / "backbone").string();
        backbone = load_backbone(base);
        backbone->load_optimizer_state(base);
        std::ifstream st(fs::path(resume_dir) / "train_state.json");
        if (!st)
            throw DataError("cannot open train_state.json in " + resume_dir);
        json j;
        st >> j;
        start_epoch = j.at("next_epoch").get<int>();
    } else {
        backbone = make_backbone(config, grid);
    }

    const DecisionPolicy policy = effective_policy(config);
    EpochLossTracker tracker(static_cast<std::size_t>(start_epoch));
    TrainResult res;

    for (int epoch = start_epoch; epoch < config.outer.epochs; ++epoch) {
        std::mt19937_64 shuffle_gen(config.outer.seed ^ static_cast<std::uint64_t>(epoch));
        std::mt19937_64 draw_gen(config.decision.rng_seed ^ static_cast<std::uint64_t>(epoch));

        std::vector<std::size_t> order(pairs.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        shuffle_indices(order, shuffle_gen);

        for (std::size_t oi = 0; oi < order.size(); ++oi) {
            const CorpusPair& pair = pairs[order[oi]];
            const std::string& pair_id = train_entries[order[oi]].id;

            // Learning step
            BackbonePrediction pred = backbone->predict(pair.moving, pair.fixed);
            const Volume warped = warp(pair.moving, pred.field);
            const LossBreakdown before = total_loss(warped, pair.fixed, pred.field, config.loss);
            if (!std::isfinite(before.total))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                   ", pair " + pair_id);

            // Decision step
            tracker.record_loss(before.total);
            const double draw = unit_open_draw(draw_gen);
            const Decision dec = should_optimize(tracker, policy, before.total, draw);

            // Optimization step (when selected), then the backbone update
            IterRecord rec;
            rec.epoch = epoch;
            rec.pair_id = pair_id;
            rec.reason = dec.reason;
            rec.loss_before = before.total;
            if (dec.optimize) {
                OptimizeResult opt = optimize_pair(pair.moving, pair.fixed, pred.field,
                                                   config.inner.n_steps, config.inner.lr,
                                                   config.loss);
                rec.inner_steps = config.inner.n_steps;
                rec.loss_after =
                    backbone->backprop_update(pair.moving, pair.fixed, opt.field, config.loss);
            } else {
                rec.inner_steps = 0;
                rec.loss_after =
                    backbone->backprop_update(pair.moving, pair.fixed, pred.field, config.loss);
            }
            res.log.iters.push_back(std::move(rec));
        }

        EpochStats stats = tracker.end_epoch(policy);
        stats.epoch = static_cast<std::size_t>(epoch);
        res.log.epochs.push_back(stats);
    }

    fs::create_directories(out_dir);
    const std::string base = (fs::path(out_dir) / "backbone").string();
    backbone->save(base);
    backbone->save_optimizer_state(base);
    {
        json j;
        j["next_epoch"] = config.outer.epochs;
        std::ofstream out(fs::path(out_dir) / "train_state.json");
        out << j.dump(2) << "\n";
    }
    {
        std::ofstream out(fs::path(out_dir) / "config.json");
        out << config.to_json_string() << "\n";
    }
    res.log.write_jsonl((fs::path(out_dir) / "train_log.jsonl").string());
    res.checkpoint_base = base;
    return res;
}

RegisterResult register_pair(const Volume& moving, const Volume& fixed,
                             const Backbone* backbone, const RegisterOptions& opts) {
    if (!(moving.grid == fixed.grid))
        throw DataError("register: moving and fixed grids differ");

    RegisterResult res;
    const double t0 = now_seconds();
    DisplacementField field =
        backbone ? backbone->predict(moving, fixed).field : DisplacementField(moving.grid);
    if (opts.refine_steps > 0) {
        OptimizeResult opt =
            optimize_pair(moving, fixed, field, opts.refine_steps, opts.refine_lr, opts.loss);
        field = std::move(opt.field);
        res.refine_report = std::move(opt.report);
        res.warped = std::move(opt.warped);
    } else {
        res.warped = warp(moving, field);
    }
    res.seconds = now_seconds() - t0;
    res.field = std::move(field);
    return res;
}

EvaluateOutputs evaluate_corpus(const std::string& corpus_dir, const Backbone& backbone,
                                const std::string& method_label) {
    const CorpusManifest manifest = load_corpus_manifest(corpus_dir);
    EvaluateOutputs out;
    out.summary.method = method_label;

    double val_sum = 0.0, test_sum = 0.0, jac_sum = 0.0, time_sum = 0.0;
    std::size_t val_n = 0, test_n = 0;
    for (const auto& split : {std::string("val"), std::string("test")}) {
        for (const auto& entry : manifest.in_split(split)) {
            const CorpusPair pair = load_corpus_pair(manifest, entry);
            // The resampling belongs to the timed inference path even though
            // the metrics only need the field.
            const double t0 = now_seconds();
            BackbonePrediction pred = backbone.predict(pair.moving, pair.fixed);
            const Volume warped = warp(pair.moving, pred.field);
            const double dt = now_seconds() - t0;
            (void)warped;
            EvalReport rep =
                evaluate_pair(pair.moving_labels, pair.fixed_labels, pred.field, dt);
            if (split == "val") {
                val_sum += rep.mean_dice;
                ++val_n;
            } else {
                test_sum += rep.mean_dice;
                jac_sum += rep.neg_jacobian_pct;
                time_sum += rep.inference_seconds;
                ++test_n;
            }
            out.per_pair.emplace_back(entry.id, std::move(rep));
        }
    }
    out.summary.dsc_val = val_n ? val_sum / static_cast<double>(val_n)
                                : std::numeric_limits<double>::quiet_NaN();
    out.summary.dsc_test = test_n ? test_sum / static_cast<double>(test_n)
                                  : std::numeric_limits<double>::quiet_NaN();
    out.summary.neg_jac_pct = test_n ? jac_sum / static_cast<double>(test_n)
                                     : std::numeric_limits<double>::quiet_NaN();
    out.summary.inference_s = test_n ? time_sum / static_cast<double>(test_n)
                                     : std::numeric_limits<double>::quiet_NaN();
    return out;
}

void append_summary_csv(const std::string& csv_path, const MethodSummary& row) {
    double first_dsc_test = row.dsc_test;
    bool exists = false;
    {
        std::ifstream in(csv_path);
        if (in) {
            std::string header, first_row;
            if (std::getline(in, header) && std::getline(in, first_row)) {
                exists = true;
                // dsc_test is the 4th column
                std::size_t pos = 0;
                for (int c = 0; c < 3; ++c)
                    pos = first_row.find(',', pos) + 1;
                first_dsc_test = std::strtod(first_row.c_str() + pos, nullptr);
            }
        }
    }
    std::ofstream out(csv_path, exists ? std::ios::app : std::ios::trunc);
    if (!out)
        throw DataError("cannot write " + csv_path);
    if (!exists)
        out << "method,dsc_val,neg_jac_pct,dsc_test,inference_s,dsc_test_delta\n";
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.6f,%+.6f\n", row.method.c_str(),
                  row.dsc_val, row.neg_jac_pct, row.dsc_test, row.inference_s,
                  row.dsc_test - first_dsc_test);
    out << buf;
}

std::string GradCheckReport::to_text() const {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "gradcheck: size=%d^3 probes=%d seed=%llu h=1e-03\n"
                  "max relative error: %.3e\n"
                  "result: %s\n",
                  size, probes, static_cast<unsigned long long>(seed), max_rel_err,
                  pass ? "PASS" : "FAIL");
    return buf;
}

GradCheckReport run_gradcheck(int size, std::uint64_t seed, int probes, const LossConfig& cfg) {
    if (size < 2)
        throw DataError("gradcheck size must be >= 2");
    const GridSpec g(size, size, size);
    std::mt19937_64 gen(seed);

    Volume moving(g), fixed(g);
    for (auto& v : moving.data)
        v = static_cast<float>(unit_open_draw(gen));
    for (auto& v : fixed.data)
        v = static_cast<float>(unit_open_draw(gen));

    // Keep sample points at least 0.05 voxels away from lattice planes so the
    // finite-difference step (1e-3) never straddles an interpolation kink.
    DisplacementField field(g);
    for (auto& u : field.u) {
        const double mag = 0.05 + 0.40 * unit_open_draw(gen);
        u = unit_open_draw(gen) < 0.5 ? -mag : mag;
    }

    const DisplacementField analytic = total_loss_gradient(moving, fixed, field, cfg);

    const double h = 1e-3;
    GradCheckReport rep;
    rep.size = size;
    rep.seed = seed;
    rep.probes = probes;
    DisplacementField probe = field;
    for (int k = 0; k < probes; ++k) {
        const std::size_t flat = static_cast<std::size_t>(gen() % probe.u.size());
        const double saved = probe.u[flat];
        probe.u[flat] = saved + h;
        const double lp = total_loss_f64(moving, fixed, probe, cfg);
        probe.u[flat] = saved - h;
        const double lm = total_loss_f64(moving, fixed, probe, cfg);
        probe.u[flat] = saved;
        const double fd = (lp - lm) / (2.0 * h);
        const double a = analytic.u[flat];
        const double rel = std::abs(a - fd) / std::max(std::abs(fd), 1e-8);
        rep.max_rel_err = std::max(rep.max_rel_err, rel);
    }
    rep.pass = rep.max_rel_err <= 1e-4;
    return rep;
}

} // namespace air
