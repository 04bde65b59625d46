// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#include "air/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "raw IO assumes a little-endian host");

namespace air {
namespace {

using nlohmann::json;

std::string base_path(const std::string& path) {
    const std::string suffix = ".json";
    if (path.size() > suffix.size() &&
        path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return path.substr(0, path.size() - suffix.size());
    return path;
}

struct Header {
    GridSpec grid;
    std::string kind;
};

Header read_header(const std::string& base) {
    std::ifstream in(base + ".json");
    if (!in)
        throw DataError("cannot open header: " + base + ".json");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("malformed header " + base + ".json: " + e.what());
    }
    if (!j.contains("dims") || !j.contains("spacing") || !j.contains("dtype") ||
        !j.contains("kind"))
        throw DataError("header missing required fields: " + base + ".json");
    if (j["dtype"] != "f32le")
        throw DataError("unsupported dtype in " + base + ".json");
    Header h;
    try {
        h.grid = GridSpec(j["dims"][0].get<std::int64_t>(), j["dims"][1].get<std::int64_t>(),
                          j["dims"][2].get<std::int64_t>(), j["spacing"][0].get<double>(),
                          j["spacing"][1].get<double>(), j["spacing"][2].get<double>());
    } catch (const json::exception& e) {
        throw DataError("malformed header " + base + ".json: " + e.what());
    }
    h.kind = j["kind"].get<std::string>();
    return h;
}

void write_header(const std::string& base, const GridSpec& g, const std::string& kind) {
    json j;
    j["dims"] = {g.dims[0], g.dims[1], g.dims[2]};
    j["spacing"] = {g.spacing[0], g.spacing[1], g.spacing[2]};
    j["dtype"] = "f32le";
    j["kind"] = kind;
    std::ofstream out(base + ".json");
    if (!out)
        throw DataError("cannot write header: " + base + ".json");
    out << j.dump(2) << "\n";
}

std::vector<float> read_raw(const std::string& base, std::int64_t expected_count) {
    std::ifstream in(base + ".raw", std::ios::binary | std::ios::ate);
    if (!in)
        throw DataError("cannot open raw data: " + base + ".raw");
    const std::streamoff bytes = in.tellg();
    if (bytes != static_cast<std::streamoff>(expected_count * 4))
        throw DataError("length mismatch: " + base + ".raw holds " +
                        std::to_string(bytes / 4) + " samples, header implies " +
                        std::to_string(expected_count));
    in.seekg(0);
    std::vector<float> values(static_cast<std::size_t>(expected_count));
    in.read(reinterpret_cast<char*>(values.data()), bytes);
    if (!in)
        throw DataError("short read: " + base + ".raw");
    return values;
}

void write_raw(const std::string& base, const float* values, std::int64_t count) {
    std::ofstream out(base + ".raw", std::ios::binary | std::ios::trunc);
    if (!out)
        throw DataError("cannot write raw data: " + base + ".raw");
    out.write(reinterpret_cast<const char*>(values), count * 4);
    if (!out)
        throw DataError("short write: " + base + ".raw");
}

void require_finite(const std::vector<float>& values, const std::string& base) {
    for (float v : values)
        if (!std::isfinite(v))
            throw DataError("non-finite value in " + base + ".raw");
}

} // namespace

Volume load_volume(const std::string& path) {
    const std::string base = base_path(path);
    const Header h = read_header(base);
    if (h.kind != "scalar")
        throw DataError("expected kind \"scalar\" in " + base + ".json, got \"" + h.kind + "\"");
    auto values = read_raw(base, h.grid.voxel_count());
    require_finite(values, base);
    return Volume(h.grid, std::move(values));
}

void save_volume(const Volume& v, const std::string& path) {
    const std::string base = base_path(path);
    write_header(base, v.grid, "scalar");
    write_raw(base, v.data.data(), v.grid.voxel_count());
}

LabelMap load_label_map(const std::string& path) {
    const std::string base = base_path(path);
    const Header h = read_header(base);
    if (h.kind != "labels")
        throw DataError("expected kind \"labels\" in " + base + ".json, got \"" + h.kind + "\"");
    auto values = read_raw(base, h.grid.voxel_count());
    std::vector<std::int32_t> labels(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const float v = values[i];
        if (!std::isfinite(v) || v < 0.0f || v != std::floor(v))
            throw DataError("label samples must be non-negative integers: " + base + ".raw");
        labels[i] = static_cast<std::int32_t>(v);
    }
    return LabelMap(h.grid, std::move(labels));
}

void save_label_map(const LabelMap& m, const std::string& path) {
    const std::string base = base_path(path);
    write_header(base, m.grid, "labels");
    std::vector<float> values(m.labels.size());
    for (std::size_t i = 0; i < m.labels.size(); ++i)
        values[i] = static_cast<float>(m.labels[i]);
    write_raw(base, values.data(), m.grid.voxel_count());
}

DisplacementField load_field(const std::string& path) {
    const std::string base = base_path(path);
    const Header h = read_header(base);
    if (h.kind != "field")
        throw DataError("expected kind \"field\" in " + base + ".json, got \"" + h.kind + "\"");
    auto values = read_raw(base, 3 * h.grid.voxel_count());
    require_finite(values, base);
    std::vector<double> u(values.begin(), values.end());
    return DisplacementField(h.grid, std::move(u));
}

void save_field(const DisplacementField& f, const std::string& path) {
    const std::string base = base_path(path);
    write_header(base, f.grid, "field");
    std::vector<float> values(f.u.size());
    for (std::size_t i = 0; i < f.u.size(); ++i)
        values[i] = static_cast<float>(f.u[i]);
    write_raw(base, values.data(), 3 * f.grid.voxel_count());
}

} // namespace air
