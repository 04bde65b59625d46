// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "air/error.hpp"

namespace air {

/// Regular voxel grid: dims per axis plus physical spacing. Spacing is
/// carried for reporting only; all displacements and losses work in voxel
/// units.
struct GridSpec {
    std::array<std::int64_t, 3> dims{0, 0, 0};      // W, H, D
    std::array<double, 3> spacing{1.0, 1.0, 1.0};   // sx, sy, sz

    GridSpec() = default;
    GridSpec(std::int64_t w, std::int64_t h, std::int64_t d,
             double sx = 1.0, double sy = 1.0, double sz = 1.0)
        : dims{w, h, d}, spacing{sx, sy, sz} {
        validate();
    }

    std::int64_t width() const { return dims[0]; }
    std::int64_t height() const { return dims[1]; }
    std::int64_t depth() const { return dims[2]; }
    std::int64_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }

    /// Linear index, x fastest: ((z*H)+y)*W + x.
    std::int64_t index(std::int64_t x, std::int64_t y, std::int64_t z) const {
        return (z * dims[1] + y) * dims[0] + x;
    }
    std::array<std::int64_t, 3> coords(std::int64_t i) const {
        const std::int64_t x = i % dims[0];
        const std::int64_t y = (i / dims[0]) % dims[1];
        const std::int64_t z = i / (dims[0] * dims[1]);
        return {x, y, z};
    }

    bool operator==(const GridSpec& o) const {
        return dims == o.dims && spacing == o.spacing;
    }

    void validate() const {
        for (int a = 0; a < 3; ++a) {
            if (dims[a] < 2)
                throw DataError("grid dims must be >= 2 per axis");
            if (!(spacing[a] > 0.0))
                throw DataError("grid spacing must be > 0");
        }
    }
};

/// Scalar 3D image on a regular grid, f32 samples, x-fastest layout.
struct Volume {
    GridSpec grid;
    std::vector<float> data;

    Volume() = default;
    Volume(GridSpec g, float fill = 0.0f)
        : grid(g), data(static_cast<std::size_t>(g.voxel_count()), fill) {}
    Volume(GridSpec g, std::vector<float> values) : grid(g), data(std::move(values)) {
        if (static_cast<std::int64_t>(data.size()) != grid.voxel_count())
            throw DataError("volume data length mismatch");
    }

    float& at(std::int64_t x, std::int64_t y, std::int64_t z) {
        return data[static_cast<std::size_t>(grid.index(x, y, z))];
    }
    float at(std::int64_t x, std::int64_t y, std::int64_t z) const {
        return data[static_cast<std::size_t>(grid.index(x, y, z))];
    }
};

/// Integer segmentation on the same grid. Label 0 is background and never
/// appears in label_ids().
struct LabelMap {
    GridSpec grid;
    std::vector<std::int32_t> labels;

    LabelMap() = default;
    LabelMap(GridSpec g, std::int32_t fill = 0)
        : grid(g), labels(static_cast<std::size_t>(g.voxel_count()), fill) {}
    LabelMap(GridSpec g, std::vector<std::int32_t> values)
        : grid(g), labels(std::move(values)) {
        if (static_cast<std::int64_t>(labels.size()) != grid.voxel_count())
            throw DataError("label data length mismatch");
        for (std::int32_t v : labels)
            if (v < 0) throw DataError("labels must be non-negative");
    }

    std::int32_t& at(std::int64_t x, std::int64_t y, std::int64_t z) {
        return labels[static_cast<std::size_t>(grid.index(x, y, z))];
    }
    std::int32_t at(std::int64_t x, std::int64_t y, std::int64_t z) const {
        return labels[static_cast<std::size_t>(grid.index(x, y, z))];
    }

    /// Distinct non-background ids present, ascending.
    std::vector<std::int32_t> label_ids() const;
};

/// Linear rescale to [0, 1]; constant volumes map to all zeros.
Volume normalize_intensity(const Volume& v);

} // namespace air
