// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#include "air/volume.hpp"

#include <algorithm>
#include <set>

namespace air {

std::vector<std::int32_t> LabelMap::label_ids() const {
    std::set<std::int32_t> ids(labels.begin(), labels.end());
    ids.erase(0);
    return {ids.begin(), ids.end()};
}

Volume normalize_intensity(const Volume& v) {
    const auto [lo_it, hi_it] = std::minmax_element(v.data.begin(), v.data.end());
    const float lo = *lo_it;
    const float hi = *hi_it;
    Volume out(v.grid);
    if (hi == lo)
        return out; // constant input maps to zeros
    const float range = hi - lo;
    for (std::size_t i = 0; i < v.data.size(); ++i)
        out.data[i] = (v.data[i] - lo) / range;
    return out;
}

} // namespace air
