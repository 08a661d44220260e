// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------
//
// Losses, manual backpropagation over a batch, the step-size scheduled
// optimizer, finite-difference gradient checks and checkpoints.

#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pgsc/model.hpp"

namespace pgsc {

inline constexpr Real kProbabilityFloor = 1e-12;
inline constexpr Real kDefaultBeta = 100.0;
inline constexpr std::size_t kParamGroupCount = 9;

// ---- losses --------------------------------------------------------------------

/// -(1/(T C)) sum Y ln(max(X, 1e-12)).
Real ce_loss(const RealMatrix& x, const RealMatrix& y);
RealMatrix ce_loss_grad(const RealMatrix& x, const RealMatrix& y);

struct AvsLoss {
    Real value = 0.0;
    std::size_t used = 0;
    std::size_t skipped = 0;  ///< segments with a zero-norm feature
};

/// MSE between the per-segment cosine similarity of the l1-normalized SD_v,
/// SD_a rows and the presence labels G.
AvsLoss avs_loss(const RealMatrix& sd_v, const RealMatrix& sd_a, std::span<const Real> g);
/// Adds scale * dL_avs/dSD into g_v and g_a.
void avs_loss_grad(const RealMatrix& sd_v, const RealMatrix& sd_a, std::span<const Real> g, Real scale,
                   RealMatrix& g_v, RealMatrix& g_a);

Real total_loss(Real cls, Real avs, Real beta) noexcept;

struct LossReport {
    Real cls = 0.0;
    Real avs = 0.0;
    Real total = 0.0;
    Real beta = kDefaultBeta;
    std::size_t skipped_segments = 0;
};

// ---- optimizer -----------------------------------------------------------------

enum class OptimizerKind { Sgd, Momentum, Adam };

std::string_view to_string(OptimizerKind k) noexcept;
std::optional<OptimizerKind> parse_optimizer(std::string_view s);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Sgd;
    Real step_size = 3e-4;
    std::size_t decay_every = 10;  ///< epochs; 0 disables decay
    Real decay_factor = 0.1;
    Real momentum = 0.9;
    Real adam_beta1 = 0.9;
    Real adam_beta2 = 0.999;
    Real adam_eps = 1e-8;
};

struct OptimizerState {
    OptimizerConfig cfg;
    Real step_size = 3e-4;
    std::size_t epoch = 0;
    std::size_t updates = 0;
    ModelParams first;   ///< momentum / Adam first moment
    ModelParams second;  ///< Adam second moment

    OptimizerState(const OptimizerConfig& c, const ModelParams& like);
    /// Closes an epoch and applies the decay schedule.
    void end_epoch();
};

using GroupMask = std::array<bool, kParamGroupCount>;
GroupMask all_groups() noexcept;
GroupMask receiver_groups() noexcept;

/// One update p <- p - step * direction(g) on the groups enabled in `mask`.
void step(ModelParams& p, const ModelParams& g, OptimizerState& opt, const GroupMask& mask = all_groups());

// ---- channel environment -------------------------------------------------------

struct ChannelEnv {
    ChannelModel model;
    CsiMode csi = CsiMode::Pilot;
    PilotConfig pilot;
    /// Reference pipeline without any channel (X_hat = X).
    bool bypass = false;
};

/// Draws the SISO and MIMO links of one frame. The draw order and rng use do
/// not depend on the CSI mode, so pilot, perfect and none see the same H and
/// noise for the same stream.
FrameLinks draw_frame_links(const Pipeline& pipe, const ChannelEnv& env, Real snr_db, std::size_t segments,
                            SeededRng& rng);

// ---- loss + gradient -----------------------------------------------------------

/// Forward pass plus loss; with grad != nullptr also backpropagates and adds
/// `weight` times the gradient into *grad.
LossReport sample_loss(Pipeline& pipe, const ModelParams& p, const Sample& s, const FrameLinks& links, Real beta,
                       ModelParams* grad = nullptr, Real weight = 1.0);

struct GradCheckEntry {
    std::string name;
    ParamGroup group;
    Real max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;  ///< entries whose stencil kept crossing a branch
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    std::array<Real, kParamGroupCount> group_max{};
    Real threshold = 1e-4;
    bool passed = false;
};

/// Richardson-extrapolated central differences (steps h and 2h) on every
/// scalar parameter (or at most `max_per_tensor` evenly spaced entries per
/// tensor when nonzero). Where the stencil crosses a ReLU or threshold decision the step is shrunk up to two
/// times by 10x; entries that still cross are counted as skipped.
GradCheckReport gradcheck(Pipeline& pipe, const ModelParams& p, const Sample& s, const FrameLinks& links, Real beta,
                          Real h = 1e-4, Real threshold = 1e-4, std::size_t max_per_tensor = 0);

// ---- training ------------------------------------------------------------------

struct TrainConfig {
    std::size_t epochs = 200;
    std::size_t batch_size = 16;
    Real beta = kDefaultBeta;
    OptimizerConfig optimizer;
    ChannelEnv env;
    /// One SNR per batch is drawn uniformly from this list.
    std::vector<Real> snr_grid{0, 3, 6, 9, 12, 15, 18, 21, 24, 27, 30};
    GroupMask trainable = all_groups();
};

struct EpochLog {
    std::size_t epoch = 0;
    Real mean_loss = 0.0;
    Real mean_cls = 0.0;
    Real step_size = 0.0;
    std::size_t skipped_frames = 0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Minibatch training. Frames whose equalizer is ill-conditioned are skipped
/// and counted; a non-finite epoch loss or parameter throws NonFinite.
std::vector<EpochLog> train(Pipeline& pipe, ModelParams& p, std::span<const Sample> data, const TrainConfig& cfg,
                            SeededRng& rng, const EpochCallback& on_epoch = {});

struct EvalResult {
    std::size_t correct = 0;
    std::size_t total = 0;
    std::size_t erasures = 0;  ///< frames dropped by an ill-conditioned detector
    Real accuracy = 0.0;
};

/// Segment accuracy. Sample i uses links from rng.split(i), so results at
/// different SNR points share H and the unit-variance noise. An erased frame
/// counts all of its segments as wrong.
EvalResult evaluate(Pipeline& pipe, const ModelParams& p, std::span<const Sample> data, const ChannelEnv& env,
                    Real snr_db, const SeededRng& rng);

std::size_t argmax_row(std::span<const Real> row) noexcept;

// ---- checkpoints ---------------------------------------------------------------

/// Writes one PGSC record per tensor to `path` and the name/shape/offset
/// listing to `path` + ".manifest".
void save_checkpoint(const std::filesystem::path& path, const ModelParams& p);
/// Loads into a model of matching shapes (initialize it first from the dims).
void load_checkpoint(const std::filesystem::path& path, ModelParams& p);

}  // namespace pgsc
