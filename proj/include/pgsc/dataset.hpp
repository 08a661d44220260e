// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------
//
// Synthetic audio-visual event clips and PGSC feature import/export.

#pragma once

#include <filesystem>
#include <vector>

#include "pgsc/model.hpp"

namespace pgsc {

struct DatasetConfig {
    std::size_t samples = 500;
    std::size_t train_samples = 400;
    std::size_t segments = 10;  ///< T
    std::size_t classes = 5;    ///< C, class 0 is background
    std::size_t audio_dim = 16;
    std::size_t visual_dim = 24;
    std::size_t locations = 4;
    std::size_t min_span = 2;
    /// Prototype entries are N(0, separation^2).
    Real separation = 1.0;
    /// Per-entry noise around the prototypes; 0 gives the prototypes exactly.
    Real jitter = 0.8;
    /// Weight of the per-clip latent added to both modalities on event
    /// segments (scaled by jitter as well).
    Real latent_weight = 0.5;
    std::size_t latent_dim = 4;
    /// Classes 1 and 2 sound alike; classes 3 and 4 look alike. Only the pair
    /// of modalities separates every class.
    bool cross_modal_ambiguity = true;
};

void validate(const DatasetConfig& cfg);

/// Class prototypes per modality, rows indexed by class.
struct Prototypes {
    RealMatrix audio;   ///< C x d_a
    RealMatrix visual;  ///< C x d_v
};

Prototypes make_prototypes(const DatasetConfig& cfg, SeededRng& rng);

/// Samples of one event each: a contiguous span of >= min_span segments of a
/// class in 1..C-1, background elsewhere. On event segments a single visual
/// location (fixed per clip) carries the event, the rest show background.
std::vector<Sample> synth_dataset(const DatasetConfig& cfg, const SeededRng& rng);

/// Builds a Sample from features and one-hot labels; presence is taken as
/// "label is not class 0".
Sample make_sample(FeatureSequence audio, FeatureSequence visual, RealMatrix labels);

/// audio.pgsc (N x T x d_a), visual.pgsc (N x T x k x d_v), labels.pgsc
/// (N x T x C) inside `dir`.
void save_dataset(const std::filesystem::path& dir, const std::vector<Sample>& data);
std::vector<Sample> load_dataset(const std::filesystem::path& dir);

}  // namespace pgsc
