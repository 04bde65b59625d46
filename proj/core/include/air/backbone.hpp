// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <any>
#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "air/adam.hpp"
#include "air/field.hpp"
#include "air/loss.hpp"
#include "air/volume.hpp"

namespace air {

struct BackbonePrediction {
    DisplacementField field;
    std::any aux; // context a stateful backbone may need for its own update
};

/// How the learning step consumes the (possibly refined) field phi_opt:
/// straight-through treats the refinement as constant and takes the loss
/// gradient at phi_opt; distillation regresses the prediction onto phi_opt.
enum class GradientMode { straight_through, distillation };

/// The learning step: predicts an initial field for a pair and updates its
/// own parameters from the loop's feedback. Implementations must keep
/// predict() const and deterministic given parameters.
class Backbone {
public:
    virtual ~Backbone() = default;

    virtual BackbonePrediction predict(const Volume& moving, const Volume& fixed) const = 0;

    /// One outer training update from the pair and the field the loop settled
    /// on (refined or not). Returns the registration loss L_all at phi_opt.
    virtual double backprop_update(const Volume& moving, const Volume& fixed,
                                   const DisplacementField& phi_opt, const LossConfig& cfg) = 0;

    virtual void save(const std::string& base_path) const = 0;
    virtual std::string kind() const = 0;

    /// Optimizer moments etc., for exact training resume. No-op by default.
    virtual void save_optimizer_state(const std::string& base_path) const { (void)base_path; }
    virtual void load_optimizer_state(const std::string& base_path) { (void)base_path; }
};

/// Always predicts the identity field; has no parameters. The
/// pure-instance-optimization baseline.
class ZeroFieldBackbone : public Backbone {
public:
    explicit ZeroFieldBackbone(GridSpec grid) : grid_(grid) {}

    BackbonePrediction predict(const Volume& moving, const Volume& fixed) const override;
    double backprop_update(const Volume& moving, const Volume& fixed,
                           const DisplacementField& phi_opt, const LossConfig& cfg) override;
    void save(const std::string& base_path) const override;
    std::string kind() const override { return "zero-field"; }

    const GridSpec& grid() const { return grid_; }

private:
    GridSpec grid_;
};

/// Desk-scale learnable predictor: one displacement vector per control point
/// on a coarse grid, upsampled to the full grid by trilinear interpolation.
/// The upsampler is linear in theta so its adjoint (used for the parameter
/// gradient) is exact.
class ControlGridBackbone : public Backbone {
public:
    ControlGridBackbone(GridSpec full_grid, std::array<std::int64_t, 3> control_dims,
                        double lr_outer, GradientMode mode = GradientMode::straight_through);

    BackbonePrediction predict(const Volume& moving, const Volume& fixed) const override;
    double backprop_update(const Volume& moving, const Volume& fixed,
                           const DisplacementField& phi_opt, const LossConfig& cfg) override;
    void save(const std::string& base_path) const override;
    std::string kind() const override { return "control-grid"; }
    void save_optimizer_state(const std::string& base_path) const override;
    void load_optimizer_state(const std::string& base_path) override;

    /// Full-resolution field from the current parameters.
    DisplacementField upsample() const;
    /// Exact adjoint of the upsampler applied to a full-resolution field.
    std::vector<double> pullback(const DisplacementField& voxel_grad) const;

    const GridSpec& grid() const { return grid_; }
    std::array<std::int64_t, 3> control_dims() const { return cdims_; }
    std::int64_t control_count() const { return cdims_[0] * cdims_[1] * cdims_[2]; }
    std::span<const float> theta() const { return {theta_.data(), theta_.size()}; }
    std::span<float> theta_mutable() { return {theta_.data(), theta_.size()}; }
    double lr_outer() const { return lr_outer_; }
    GradientMode gradient_mode() const { return mode_; }

private:
    void apply_update(std::span<const double> theta_grad);

    GridSpec grid_;
    std::array<std::int64_t, 3> cdims_;
    std::vector<float> theta_; // 3 * control_count, planar
    double lr_outer_;
    GradientMode mode_;
    std::optional<AdamState> opt_; // built lazily on the first update
};

/// Reads the checkpoint manifest at `<base>.json` (plus `<base>.raw` for
/// parameterized kinds) and rebuilds the matching backbone.
std::unique_ptr<Backbone> load_backbone(const std::string& base_path);

const char* to_string(GradientMode m);
GradientMode gradient_mode_from_string(const std::string& s);

} // namespace air
