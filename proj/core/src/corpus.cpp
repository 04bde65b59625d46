// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#include "air/corpus.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "air/decision.hpp"
#include "air/io.hpp"

namespace air {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

GridSpec grid_from_json(const json& j) {
    const auto& jd = j.at("dims");
    std::array<double, 3> sp{1.0, 1.0, 1.0};
    if (j.contains("spacing"))
        sp = {j["spacing"][0].get<double>(), j["spacing"][1].get<double>(),
              j["spacing"][2].get<double>()};
    return GridSpec(jd[0].get<std::int64_t>(), jd[1].get<std::int64_t>(),
                    jd[2].get<std::int64_t>(), sp[0], sp[1], sp[2]);
}

double jittered(std::mt19937_64& gen, double value, double rel) {
    return value * (1.0 + rel * (2.0 * unit_open_draw(gen) - 1.0));
}

} // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

SynthCorpusSpec SynthCorpusSpec::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open corpus spec: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("malformed corpus spec: " + std::string(e.what()));
    }

    SynthCorpusSpec spec;
    spec.base.grid = grid_from_json(j.at("grid"));
    spec.base.kind = phantom_kind_from_string(j.value("kind", "sphere"));
    spec.base.noise_sigma = j.value("noise_sigma", 0.0);
    spec.base.seed = j.value("seed", std::uint64_t{0});
    spec.deform_jitter = j.value("deform_jitter", 0.3);
    spec.phase_jitter = j.value("phase_jitter", 1.0);
    if (j.contains("split")) {
        for (int i = 0; i < 3; ++i)
            spec.split_fractions[static_cast<std::size_t>(i)] = j["split"][i].get<double>();
    }
    if (j.contains("deform")) {
        const auto& jd = j["deform"];
        auto& d = spec.base.deform;
        d.kind = deform_kind_from_string(jd.value("kind", "none"));
        if (jd.contains("vector"))
            d.translation = {jd["vector"][0].get<double>(), jd["vector"][1].get<double>(),
                             jd["vector"][2].get<double>()};
        d.amplitude = jd.value("amplitude", 0.0);
        d.wavelength = jd.value("wavelength", 0.0);
        d.expansion = jd.value("c", 0.0);
    }
    spec.base.validate();
    return spec;
}

CorpusManifest write_corpus(const SynthCorpusSpec& spec, int pair_count,
                            const std::string& out_dir) {
    if (pair_count < 1)
        throw DataError("corpus needs at least one pair");
    fs::create_directories(out_dir);

    const double f_train = spec.split_fractions[0];
    const double f_val = spec.split_fractions[1];
    const std::int64_t n_train = static_cast<std::int64_t>(std::llround(f_train * pair_count));
    const std::int64_t n_val = static_cast<std::int64_t>(std::llround(f_val * pair_count));

    CorpusManifest manifest;
    manifest.dir = out_dir;
    for (int k = 0; k < pair_count; ++k) {
        const std::uint64_t pair_seed = derive_seed(spec.base.seed, static_cast<std::uint64_t>(k));
        std::mt19937_64 jit(pair_seed ^ 0xA5A5A5A5A5A5A5A5ull);

        PhantomSpec ps = spec.base;
        ps.seed = pair_seed;
        auto& d = ps.deform;
        switch (d.kind) {
        case DeformSpec::Kind::translation:
            for (auto& c : d.translation)
                c = jittered(jit, c, spec.deform_jitter);
            break;
        case DeformSpec::Kind::smooth_sinusoid:
            d.amplitude = jittered(jit, d.amplitude, spec.deform_jitter);
            for (auto& ph : d.phase)
                ph += spec.phase_jitter * d.wavelength * (unit_open_draw(jit) - 0.5);
            break;
        case DeformSpec::Kind::radial_expansion:
            d.expansion = jittered(jit, d.expansion, spec.deform_jitter);
            break;
        case DeformSpec::Kind::none:
            break;
        }
        ps.validate();

        const PhantomPair pair = generate_pair(ps);
        char buf[32];
        std::snprintf(buf, sizeof buf, "pair_%04d", k);
        const std::string id = buf;
        const fs::path pdir = fs::path(out_dir) / id;
        fs::create_directories(pdir);
        save_volume(pair.moving, (pdir / "moving").string());
        save_volume(pair.fixed, (pdir / "fixed").string());
        save_field(pair.true_field, (pdir / "true_field").string());
        save_label_map(pair.moving_labels, (pdir / "labels_moving").string());
        save_label_map(pair.fixed_labels, (pdir / "labels_fixed").string());

        CorpusEntry e;
        e.id = id;
        e.split = k < n_train ? "train" : (k < n_train + n_val ? "val" : "test");
        manifest.pairs.push_back(e);
    }

    json j;
    j["seed"] = spec.base.seed;
    j["kind"] = to_string(spec.base.kind);
    j["deform"] = to_string(spec.base.deform.kind);
    j["grid"] = {{"dims", {spec.base.grid.dims[0], spec.base.grid.dims[1], spec.base.grid.dims[2]}},
                 {"spacing", {spec.base.grid.spacing[0], spec.base.grid.spacing[1],
                              spec.base.grid.spacing[2]}}};
    auto& arr = j["pairs"] = json::array();
    for (const auto& e : manifest.pairs)
        arr.push_back({{"id", e.id}, {"split", e.split}});
    std::ofstream out(fs::path(out_dir) / "corpus.json");
    if (!out)
        throw DataError("cannot write corpus manifest in " + out_dir);
    out << j.dump(2) << "\n";
    return manifest;
}

CorpusManifest load_corpus_manifest(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "corpus.json");
    if (!in)
        throw DataError("cannot open corpus manifest: " + dir + "/corpus.json");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("malformed corpus manifest: " + std::string(e.what()));
    }
    CorpusManifest m;
    m.dir = dir;
    for (const auto& e : j.at("pairs"))
        m.pairs.push_back({e.at("id").get<std::string>(), e.at("split").get<std::string>()});
    if (m.pairs.empty())
        throw DataError("corpus manifest lists no pairs: " + dir);
    return m;
}

std::vector<CorpusEntry> CorpusManifest::in_split(const std::string& split) const {
    std::vector<CorpusEntry> out;
    for (const auto& e : pairs)
        if (e.split == split)
            out.push_back(e);
    return out;
}

CorpusPair load_corpus_pair(const CorpusManifest& manifest, const CorpusEntry& entry) {
    const fs::path pdir = fs::path(manifest.dir) / entry.id;
    CorpusPair p;
    p.moving = load_volume((pdir / "moving").string());
    p.fixed = load_volume((pdir / "fixed").string());
    p.true_field = load_field((pdir / "true_field").string());
    p.moving_labels = load_label_map((pdir / "labels_moving").string());
    p.fixed_labels = load_label_map((pdir / "labels_fixed").string());
    return p;
}

} // namespace air
