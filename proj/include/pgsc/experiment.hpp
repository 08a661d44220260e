// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------
//
// Experiment configuration, SNR / modality / CSI sweeps, CSV and manifest
// output.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pgsc/dataset.hpp"
#include "pgsc/trainer.hpp"

namespace pgsc {

inline constexpr std::string_view kArtifactVersion = "1.0.0";

struct ExperimentConfig {
    std::vector<ChannelKind> channels{ChannelKind::Awgn, ChannelKind::Rayleigh, ChannelKind::Rician};
    Real rician_k = 1.0;
    std::vector<Real> snr_list{0, 3, 6, 9, 12, 15, 18, 21, 24, 27, 30};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::vector<Mode> modes{Mode::Multimodal};
    std::vector<CsiMode> csis{CsiMode::Pilot};

    DatasetConfig dataset;
    ModelDims dims;
    PilotConfig pilot;

    std::size_t epochs = 60;
    std::size_t batch_size = 16;
    /// Weight of the similarity loss. The trainer default (100) swamps the
    /// per-element cross-entropy once the channel is noisy.
    Real beta = 1.0;
    OptimizerConfig optimizer{OptimizerKind::Adam, 2e-3, 30, 0.3};
    /// Training SNR grid; one value is drawn per batch.
    std::vector<Real> train_snr{0, 3, 6, 9, 12, 15, 18, 21, 24, 27, 30};
    /// CSI used while training the shared pilot/perfect model.
    CsiMode train_csi = CsiMode::Pilot;

    /// Adds wall-clock start/end to the manifest, which then differs per run.
    bool manifest_wall_clock = false;
};

/// Throws ConfigError on inconsistent settings; also copies the shared
/// feature sizes from `dims` into `dataset`.
void validate(ExperimentConfig& cfg);

/// Applies one key=value setting. Unknown keys and bad values throw ConfigError.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// Parses a flat key=value file ('#' starts a comment).
void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);
/// Every setting as sorted key=value lines; parses back to the same config.
std::map<std::string, std::string> config_settings(const ExperimentConfig& cfg);

struct MetricsRow {
    ChannelKind channel = ChannelKind::Awgn;
    Real snr_db = 0.0;
    std::uint64_t seed = 0;
    Mode mode = Mode::Multimodal;
    CsiMode csi = CsiMode::Pilot;
    Real segment_accuracy = 0.0;
    std::size_t frame_erasures = 0;
};

struct RunManifest {
    std::map<std::string, std::string> config;
    std::vector<std::uint64_t> seeds;
    /// "seed.module" -> derived sub-seed.
    std::map<std::string, std::uint64_t> sub_seeds;
    std::string artifact_version{kArtifactVersion};
    std::string started;   ///< empty unless manifest_wall_clock
    std::string finished;
};

struct SweepResult {
    std::vector<MetricsRow> rows;
    RunManifest manifest;
};

using ProgressCallback = std::function<void(const std::string&)>;

/// Trains one model per (channel, seed, mode) and evaluates it at every SNR
/// and CSI setting on the held-out split. Pilot and perfect rows share the
/// model and the test channels; csi=none rows use a second model trained the
/// same way but without channel estimation.
SweepResult run_sweep(const ExperimentConfig& cfg, const ProgressCallback& progress = {});

/// Sub-seed of module `tag` for a master seed.
std::uint64_t module_seed(std::uint64_t seed, std::string_view tag);

void sort_rows(std::vector<MetricsRow>& rows);
std::string format_csv(std::vector<MetricsRow> rows);
void emit_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path);
std::vector<MetricsRow> parse_csv(const std::string& text);

std::string format_manifest(const RunManifest& m);
void write_manifest(const RunManifest& m, const std::filesystem::path& path);

/// Splits "a,b,c" (whitespace trimmed, empty items dropped).
std::vector<std::string> split_list(const std::string& s);

}  // namespace pgsc
