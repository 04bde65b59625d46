// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#include "air/backbone.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "air/warp.hpp"

namespace air {
namespace {

using nlohmann::json;

struct CellWeights {
    std::int64_t i0[3];
    double frac[3];
};

// Control coordinate of voxel p along axis a: p * (c-1)/(n-1), spanning the
// grid corners exactly. No clamping is needed: the result stays in [0, c-1].
inline CellWeights cell_weights(const std::array<std::int64_t, 3>& pos, const GridSpec& g,
                                const std::array<std::int64_t, 3>& cdims) {
    CellWeights w;
    for (int a = 0; a < 3; ++a) {
        const double cc = static_cast<double>(pos[a]) *
                          static_cast<double>(cdims[a] - 1) /
                          static_cast<double>(g.dims[a] - 1);
        w.i0[a] = std::min(static_cast<std::int64_t>(std::floor(cc)), cdims[a] - 2);
        w.frac[a] = cc - static_cast<double>(w.i0[a]);
    }
    return w;
}

void write_raw_f32(const std::string& path, std::span<const float> values) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * 4));
}

std::vector<float> read_raw_f32(const std::string& path, std::size_t expected) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in)
        throw DataError("cannot open " + path);
    const std::streamoff bytes = in.tellg();
    if (bytes != static_cast<std::streamoff>(expected * 4))
        throw DataError("length mismatch: " + path);
    in.seekg(0);
    std::vector<float> values(expected);
    in.read(reinterpret_cast<char*>(values.data()), bytes);
    return values;
}

} // namespace

const char* to_string(GradientMode m) {
    return m == GradientMode::straight_through ? "straight-through" : "distillation";
}

GradientMode gradient_mode_from_string(const std::string& s) {
    if (s == "straight-through")
        return GradientMode::straight_through;
    if (s == "distillation")
        return GradientMode::distillation;
    throw DataError("unknown gradient mode: " + s);
}

// --- ZeroFieldBackbone -----------------------------------------------------

BackbonePrediction ZeroFieldBackbone::predict(const Volume& moving, const Volume& fixed) const {
    if (!(moving.grid == grid_) || !(fixed.grid == grid_))
        throw DataError("zero-field backbone: grid mismatch");
    return {DisplacementField(grid_), {}};
}

double ZeroFieldBackbone::backprop_update(const Volume& moving, const Volume& fixed,
                                          const DisplacementField& phi_opt,
                                          const LossConfig& cfg) {
    // No parameters; report the loss so the loop can log it.
    return total_loss(warp(moving, phi_opt), fixed, phi_opt, cfg).total;
}

void ZeroFieldBackbone::save(const std::string& base) const {
    json j;
    j["type"] = kind();
    j["format_version"] = 1;
    j["grid"] = {{"dims", {grid_.dims[0], grid_.dims[1], grid_.dims[2]}},
                 {"spacing", {grid_.spacing[0], grid_.spacing[1], grid_.spacing[2]}}};
    std::ofstream out(base + ".json");
    if (!out)
        throw DataError("cannot write " + base + ".json");
    out << j.dump(2) << "\n";
}

// --- ControlGridBackbone ---------------------------------------------------

ControlGridBackbone::ControlGridBackbone(GridSpec full_grid,
                                         std::array<std::int64_t, 3> control_dims,
                                         double lr_outer, GradientMode mode)
    : grid_(full_grid), cdims_(control_dims), lr_outer_(lr_outer), mode_(mode) {
    for (int a = 0; a < 3; ++a)
        if (cdims_[a] < 2)
            throw DataError("control grid dims must be >= 2 per axis");
    if (!(lr_outer_ > 0.0))
        throw DataError("lr_outer must be > 0");
    theta_.assign(static_cast<std::size_t>(3 * control_count()), 0.0f);
}

DisplacementField ControlGridBackbone::upsample() const {
    DisplacementField f(grid_);
    const std::int64_t cN = control_count();
    const std::int64_t cW = cdims_[0], cHW = cdims_[0] * cdims_[1];

#pragma omp parallel for schedule(static)
    for (std::int64_t z = 0; z < grid_.dims[2]; ++z) {
        for (std::int64_t y = 0; y < grid_.dims[1]; ++y) {
            std::int64_t i = grid_.index(0, y, z);
            for (std::int64_t x = 0; x < grid_.dims[0]; ++x, ++i) {
                const auto w = cell_weights({x, y, z}, grid_, cdims_);
                const std::int64_t base = (w.i0[2] * cdims_[1] + w.i0[1]) * cW + w.i0[0];
                const double fx = w.frac[0], fy = w.frac[1], fz = w.frac[2];
                const double wgt[8] = {
                    (1 - fx) * (1 - fy) * (1 - fz), fx * (1 - fy) * (1 - fz),
                    (1 - fx) * fy * (1 - fz),       fx * fy * (1 - fz),
                    (1 - fx) * (1 - fy) * fz,       fx * (1 - fy) * fz,
                    (1 - fx) * fy * fz,             fx * fy * fz};
                const std::int64_t idx[8] = {base,           base + 1,
                                             base + cW,      base + cW + 1,
                                             base + cHW,     base + cHW + 1,
                                             base + cHW + cW, base + cHW + cW + 1};
                for (int c = 0; c < 3; ++c) {
                    const float* th = theta_.data() + c * cN;
                    double acc = 0.0;
                    for (int k = 0; k < 8; ++k)
                        acc += wgt[k] * static_cast<double>(th[idx[k]]);
                    f.comp(c, i) = acc;
                }
            }
        }
    }
    return f;
}

std::vector<double> ControlGridBackbone::pullback(const DisplacementField& voxel_grad) const {
    if (!(voxel_grad.grid == grid_))
        throw DataError("pullback: grid mismatch");
    const std::int64_t cN = control_count();
    const std::int64_t cW = cdims_[0], cHW = cdims_[0] * cdims_[1];
    std::vector<double> out(static_cast<std::size_t>(3 * cN), 0.0);

    // Sequential scatter: the update path is single-threaded by design, and a
    // fixed accumulation order keeps training bitwise reproducible.
    for (std::int64_t z = 0; z < grid_.dims[2]; ++z) {
        for (std::int64_t y = 0; y < grid_.dims[1]; ++y) {
            std::int64_t i = grid_.index(0, y, z);
            for (std::int64_t x = 0; x < grid_.dims[0]; ++x, ++i) {
                const auto w = cell_weights({x, y, z}, grid_, cdims_);
                const std::int64_t base = (w.i0[2] * cdims_[1] + w.i0[1]) * cW + w.i0[0];
                const double fx = w.frac[0], fy = w.frac[1], fz = w.frac[2];
                const double wgt[8] = {
                    (1 - fx) * (1 - fy) * (1 - fz), fx * (1 - fy) * (1 - fz),
                    (1 - fx) * fy * (1 - fz),       fx * fy * (1 - fz),
                    (1 - fx) * (1 - fy) * fz,       fx * (1 - fy) * fz,
                    (1 - fx) * fy * fz,             fx * fy * fz};
                const std::int64_t idx[8] = {base,           base + 1,
                                             base + cW,      base + cW + 1,
                                             base + cHW,     base + cHW + 1,
                                             base + cHW + cW, base + cHW + cW + 1};
                for (int c = 0; c < 3; ++c) {
                    const double g = voxel_grad.comp(c, i);
                    double* dst = out.data() + c * cN;
                    for (int k = 0; k < 8; ++k)
                        dst[idx[k]] += wgt[k] * g;
                }
            }
        }
    }
    return out;
}

BackbonePrediction ControlGridBackbone::predict(const Volume& moving, const Volume& fixed) const {
    if (!(moving.grid == grid_) || !(fixed.grid == grid_))
        throw DataError("control-grid backbone: grid mismatch");
    return {upsample(), {}};
}

void ControlGridBackbone::apply_update(std::span<const double> theta_grad) {
    if (!opt_)
        opt_.emplace(theta_.size(), lr_outer_);
    // Parameters live in f32 (checkpoints are exact); the Adam step runs in f64.
    std::vector<double> params(theta_.begin(), theta_.end());
    adam_step(params, theta_grad, *opt_);
    for (std::size_t i = 0; i < theta_.size(); ++i)
        theta_[i] = static_cast<float>(params[i]);
}

double ControlGridBackbone::backprop_update(const Volume& moving, const Volume& fixed,
                                            const DisplacementField& phi_opt,
                                            const LossConfig& cfg) {
    auto lg = loss_and_gradient(moving, fixed, phi_opt, cfg);
    if (mode_ == GradientMode::straight_through) {
        apply_update(pullback(lg.gradient));
    } else {
        // Distillation: regress the prediction onto phi_opt. When the loop
        // declined (phi_opt equals the prediction) the residual is zero and
        // no update happens.
        DisplacementField residual = upsample();
        const double scale = 2.0 / static_cast<double>(grid_.voxel_count());
        for (std::size_t i = 0; i < residual.u.size(); ++i)
            residual.u[i] = scale * (residual.u[i] - phi_opt.u[i]);
        apply_update(pullback(residual));
    }
    return lg.loss.total;
}

void ControlGridBackbone::save(const std::string& base) const {
    json j;
    j["type"] = kind();
    j["format_version"] = 1;
    j["grid"] = {{"dims", {grid_.dims[0], grid_.dims[1], grid_.dims[2]}},
                 {"spacing", {grid_.spacing[0], grid_.spacing[1], grid_.spacing[2]}}};
    j["control_dims"] = {cdims_[0], cdims_[1], cdims_[2]};
    j["lr_outer"] = lr_outer_;
    j["gradient_mode"] = to_string(mode_);
    std::ofstream out(base + ".json");
    if (!out)
        throw DataError("cannot write " + base + ".json");
    out << j.dump(2) << "\n";
    write_raw_f32(base + ".raw", theta());
}

void ControlGridBackbone::save_optimizer_state(const std::string& base) const {
    json j;
    j["t"] = opt_ ? opt_->t : 0;
    std::ofstream out(base + ".trainer.json");
    if (!out)
        throw DataError("cannot write " + base + ".trainer.json");
    out << j.dump(2) << "\n";

    std::ofstream raw(base + ".trainer.raw", std::ios::binary | std::ios::trunc);
    if (!raw)
        throw DataError("cannot write " + base + ".trainer.raw");
    if (opt_) {
        raw.write(reinterpret_cast<const char*>(opt_->m.data()),
                  static_cast<std::streamsize>(opt_->m.size() * 8));
        raw.write(reinterpret_cast<const char*>(opt_->v.data()),
                  static_cast<std::streamsize>(opt_->v.size() * 8));
    }
}

void ControlGridBackbone::load_optimizer_state(const std::string& base) {
    std::ifstream in(base + ".trainer.json");
    if (!in)
        throw DataError("cannot open " + base + ".trainer.json");
    json j;
    in >> j;
    const std::int64_t t = j.at("t").get<std::int64_t>();
    if (t == 0) {
        opt_.reset();
        return;
    }
    opt_.emplace(theta_.size(), lr_outer_);
    opt_->t = t;
    std::ifstream raw(base + ".trainer.raw", std::ios::binary | std::ios::ate);
    if (!raw)
        throw DataError("cannot open " + base + ".trainer.raw");
    const std::streamoff bytes = raw.tellg();
    if (bytes != static_cast<std::streamoff>(2 * theta_.size() * 8))
        throw DataError("length mismatch: " + base + ".trainer.raw");
    raw.seekg(0);
    raw.read(reinterpret_cast<char*>(opt_->m.data()),
             static_cast<std::streamsize>(theta_.size() * 8));
    raw.read(reinterpret_cast<char*>(opt_->v.data()),
             static_cast<std::streamsize>(theta_.size() * 8));
}

std::unique_ptr<Backbone> load_backbone(const std::string& base_path) {
    std::string base = base_path;
    const std::string suffix = ".json";
    if (base.size() > suffix.size() &&
        base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0)
        base = base.substr(0, base.size() - suffix.size());

    std::ifstream in(base + ".json");
    if (!in)
        throw DataError("cannot open checkpoint manifest: " + base + ".json");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("malformed checkpoint manifest: " + std::string(e.what()));
    }
    const std::string type = j.at("type").get<std::string>();
    const auto& jd = j.at("grid").at("dims");
    const auto& js = j.at("grid").at("spacing");
    GridSpec grid(jd[0].get<std::int64_t>(), jd[1].get<std::int64_t>(), jd[2].get<std::int64_t>(),
                  js[0].get<double>(), js[1].get<double>(), js[2].get<double>());

    if (type == "zero-field")
        return std::make_unique<ZeroFieldBackbone>(grid);

    if (type == "control-grid") {
        const auto& jc = j.at("control_dims");
        std::array<std::int64_t, 3> cdims{jc[0].get<std::int64_t>(), jc[1].get<std::int64_t>(),
                                          jc[2].get<std::int64_t>()};
        auto bb = std::make_unique<ControlGridBackbone>(
            grid, cdims, j.at("lr_outer").get<double>(),
            gradient_mode_from_string(j.value("gradient_mode", "straight-through")));
        const auto values =
            read_raw_f32(base + ".raw", static_cast<std::size_t>(3 * bb->control_count()));
        std::copy(values.begin(), values.end(), bb->theta_mutable().begin());
        return bb;
    }
    throw DataError("unknown backbone type: " + type);
}

} // namespace air
