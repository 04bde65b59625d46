// Copyright 2026 the Air authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <vector>

#include "air/synth.hpp"

namespace air {

/// Corpus generation request: the phantom family plus per-pair jitter. Each
/// pair gets its own seed derived from the base seed, and deform parameters
/// jittered by `deform_jitter` (relative, amplitude/translation; sinusoid
/// phases are drawn uniformly).
struct SynthCorpusSpec {
    PhantomSpec base;
    std::array<double, 3> split_fractions{0.7, 0.1, 0.2}; // train, val, test
    double deform_jitter = 0.3;
    // Sinusoid phase spread per pair as a fraction of the wavelength: 1.0
    // decorrelates the pairs completely, small values model a corpus whose
    // deformations share structure (atlas-to-patient style).
    double phase_jitter = 1.0;

    static SynthCorpusSpec from_json_file(const std::string& path);
};

struct CorpusEntry {
    std::string id;    // pair_0000, ...
    std::string split; // train | val | test
};

struct CorpusManifest {
    std::string dir;
    std::vector<CorpusEntry> pairs;

    std::vector<CorpusEntry> in_split(const std::string& split) const;
};

struct CorpusPair {
    Volume moving;
    Volume fixed;
    DisplacementField true_field;
    LabelMap moving_labels;
    LabelMap fixed_labels;
};

/// Writes pair_XXXX/{moving,fixed,true_field,labels_moving,labels_fixed}
/// plus corpus.json into out_dir. Deterministic under the spec seed.
CorpusManifest write_corpus(const SynthCorpusSpec& spec, int pair_count,
                            const std::string& out_dir);

CorpusManifest load_corpus_manifest(const std::string& dir);
CorpusPair load_corpus_pair(const CorpusManifest& manifest, const CorpusEntry& entry);

/// Deterministic per-pair seed derivation (splitmix64 over the base seed).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

} // namespace air
