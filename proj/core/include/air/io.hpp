// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "air/field.hpp"
#include "air/volume.hpp"

namespace air {

// On-disk format: a `<name>.json` header
//   {"dims":[W,H,D],"spacing":[sx,sy,sz],"dtype":"f32le","kind":"scalar"}
// next to `<name>.raw` holding exactly W*H*D little-endian f32 samples
// (3*W*H*D for kind "field", planar: all dx, then dy, then dz).
// Every loader accepts either the `.json` path or the bare `<name>` prefix.

Volume load_volume(const std::string& path);
void save_volume(const Volume& v, const std::string& path);

LabelMap load_label_map(const std::string& path);
void save_label_map(const LabelMap& m, const std::string& path);

DisplacementField load_field(const std::string& path);
void save_field(const DisplacementField& f, const std::string& path);

} // namespace air
