// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------
//
// End-to-end link: audio transmitter, video transmitter (with the audio it
// receives over the SISO link), dual-antenna multimodal receiver, PSP fusion
// and classification. The channel blocks are fixed per frame, so the whole
// path from parameters to loss is differentiable with the channel acting as
// a constant linear map plus additive noise.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "pgsc/channel.hpp"
#include "pgsc/codec.hpp"
#include "pgsc/equalizer.hpp"
#include "pgsc/psp.hpp"

namespace pgsc {

enum class Mode { AudioOnly, VideoOnly, Multimodal };
enum class CsiMode { Pilot, Perfect, None };

std::string_view to_string(Mode m) noexcept;
std::string_view to_string(CsiMode c) noexcept;
std::optional<Mode> parse_mode(std::string_view s);
std::optional<CsiMode> parse_csi(std::string_view s);

struct ModelDims {
    std::size_t audio_dim = 16;   ///< d_a
    std::size_t visual_dim = 24;  ///< d_v
    std::size_t locations = 4;    ///< k
    std::size_t attention_dim = 16;
    std::size_t semantic_hidden = 32;
    CellKind cell = CellKind::Tanh;
    std::size_t audio_enc_hidden = 24;
    std::size_t visual_enc_hidden = 20;
    /// Real width of one segment's channel code (two reals per symbol). The
    /// video user also feeds the decomposed received audio code to AGVA.
    std::size_t audio_code = 4;
    std::size_t visual_code = 4;
    std::size_t audio_dec_hidden = 32;
    std::size_t visual_dec_hidden = 48;
    std::size_t fusion_dim = 32;  ///< d_l
    std::size_t sim_dim = 16;     ///< d_s
    std::size_t head_hidden = 32;
    std::size_t classes = 5;
    Real tau1 = kDefaultTau1;
};

void validate(const ModelDims& dims);

enum class ParamGroup {
    AudioSemantic,
    Agva,
    AudioChannelEncoder,
    VisualChannelEncoder,
    AudioChannelDecoder,
    VisualChannelDecoder,
    PspSimilarity,
    PspFusion,
    Classifier,
};

std::string_view to_string(ParamGroup g) noexcept;
/// Groups that live on the user terminals rather than the receiver.
bool is_transmitter(ParamGroup g) noexcept;

struct ModelParams {
    RecurrentParams audio_semantic;
    AgvaParams agva;
    ChannelEncoderParams audio_encoder;
    ChannelEncoderParams visual_encoder;
    ChannelDecoderParams audio_decoder;
    ChannelDecoderParams visual_decoder;
    PspParams psp;
    ClassifierHead head;
};

ModelParams init_model(const ModelDims& dims, SeededRng& rng);
ModelParams zeros_like(const ModelParams& p);

/// Visits every trainable tensor as f(name, group, matrix).
template <typename Params, typename F>
void for_each_param(Params& p, F&& f) {
    f("audio_semantic.wx", ParamGroup::AudioSemantic, p.audio_semantic.wx);
    f("audio_semantic.wh", ParamGroup::AudioSemantic, p.audio_semantic.wh);
    f("audio_semantic.b", ParamGroup::AudioSemantic, p.audio_semantic.b);
    f("agva.mv.w", ParamGroup::Agva, p.agva.mv.w);
    f("agva.mv.b", ParamGroup::Agva, p.agva.mv.b);
    f("agva.ma.w", ParamGroup::Agva, p.agva.ma.w);
    f("agva.ma.b", ParamGroup::Agva, p.agva.ma.b);
    f("agva.wv1", ParamGroup::Agva, p.agva.wv1);
    f("agva.wa1", ParamGroup::Agva, p.agva.wa1);
    f("agva.wf", ParamGroup::Agva, p.agva.wf);
    f("audio_encoder.reduce.w", ParamGroup::AudioChannelEncoder, p.audio_encoder.reduce.w);
    f("audio_encoder.reduce.b", ParamGroup::AudioChannelEncoder, p.audio_encoder.reduce.b);
    f("audio_encoder.shape.w", ParamGroup::AudioChannelEncoder, p.audio_encoder.shape.w);
    f("audio_encoder.shape.b", ParamGroup::AudioChannelEncoder, p.audio_encoder.shape.b);
    f("visual_encoder.reduce.w", ParamGroup::VisualChannelEncoder, p.visual_encoder.reduce.w);
    f("visual_encoder.reduce.b", ParamGroup::VisualChannelEncoder, p.visual_encoder.reduce.b);
    f("visual_encoder.shape.w", ParamGroup::VisualChannelEncoder, p.visual_encoder.shape.w);
    f("visual_encoder.shape.b", ParamGroup::VisualChannelEncoder, p.visual_encoder.shape.b);
    f("audio_decoder.first.w", ParamGroup::AudioChannelDecoder, p.audio_decoder.first.w);
    f("audio_decoder.first.b", ParamGroup::AudioChannelDecoder, p.audio_decoder.first.b);
    f("audio_decoder.second.w", ParamGroup::AudioChannelDecoder, p.audio_decoder.second.w);
    f("audio_decoder.second.b", ParamGroup::AudioChannelDecoder, p.audio_decoder.second.b);
    f("audio_decoder.proj.w", ParamGroup::AudioChannelDecoder, p.audio_decoder.proj.w);
    f("audio_decoder.proj.b", ParamGroup::AudioChannelDecoder, p.audio_decoder.proj.b);
    f("visual_decoder.first.w", ParamGroup::VisualChannelDecoder, p.visual_decoder.first.w);
    f("visual_decoder.first.b", ParamGroup::VisualChannelDecoder, p.visual_decoder.first.b);
    f("visual_decoder.second.w", ParamGroup::VisualChannelDecoder, p.visual_decoder.second.w);
    f("visual_decoder.second.b", ParamGroup::VisualChannelDecoder, p.visual_decoder.second.b);
    f("visual_decoder.proj.w", ParamGroup::VisualChannelDecoder, p.visual_decoder.proj.w);
    f("visual_decoder.proj.b", ParamGroup::VisualChannelDecoder, p.visual_decoder.proj.b);
    f("psp.sim_proj_v", ParamGroup::PspSimilarity, p.psp.sim_proj_v);
    f("psp.sim_proj_a", ParamGroup::PspSimilarity, p.psp.sim_proj_a);
    f("psp.fuse_a", ParamGroup::PspFusion, p.psp.fuse_a);
    f("psp.fuse_v", ParamGroup::PspFusion, p.psp.fuse_v);
    f("head.hidden.w", ParamGroup::Classifier, p.head.hidden.w);
    f("head.hidden.b", ParamGroup::Classifier, p.head.hidden.b);
    f("head.out.w", ParamGroup::Classifier, p.head.out.w);
    f("head.out.b", ParamGroup::Classifier, p.head.out.b);
}

std::size_t parameter_count(const ModelParams& p);

// ---- links ---------------------------------------------------------------------

/// One frame's radio link: channel draw, payload noise, and what the receiver
/// knows about H. The detector output is X_hat = G X + W N for a fixed G.
struct Link {
    ComplexMatrix h;      ///< M x K
    ComplexMatrix noise;  ///< M x L_c
    CsiMode csi = CsiMode::Pilot;
    std::optional<ChannelEstimate> estimate;  ///< set for Pilot and Perfect
    /// Skip the channel entirely (X_hat = X); the reference no-channel pipeline.
    bool bypass = false;

    std::size_t users() const noexcept { return h.cols(); }

    /// Applies the channel and the detector. Throws IllConditioned when ZF
    /// cannot invert the estimated Gram matrix.
    ComplexMatrix receive(const ComplexMatrix& x) const;
    /// K x K map G with receive(x) = G x + (noise term).
    ComplexMatrix effective_gain() const;
};

struct LinkSpec {
    ChannelModel model;
    std::size_t antennas = 2;
    std::size_t users = 2;
    std::size_t length = 0;  ///< payload channel uses
    Real snr_db = 30.0;
    CsiMode csi = CsiMode::Pilot;
    PilotConfig pilot;
    Real power = 1.0;
};

/// Draws H, the pilot and payload noise, and the channel estimate. Noise is
/// drawn at unit variance and scaled, so the same rng state yields the same
/// realization shape at every SNR.
Link draw_link(const LinkSpec& spec, SeededRng& rng);
Link bypass_link(std::size_t users, std::size_t length);

/// SISO link from the audio user to the video user, and the MIMO link from
/// both users (or the single active one) to the receiver.
struct FrameLinks {
    Link siso;
    Link mimo;
};

// ---- pipeline ------------------------------------------------------------------

struct Sample {
    FeatureSequence audio;           ///< T x d_a
    FeatureSequence visual;          ///< T x k x d_v
    RealMatrix labels;               ///< T x C one-hot
    std::vector<Real> presence;      ///< event presence per segment (0/1)
    std::vector<std::size_t> classes;
};

std::size_t segment_count(const Sample& s) noexcept;

/// Channel uses needed per user for T segments.
std::size_t audio_frame_length(const ModelDims& dims, std::size_t segments) noexcept;
std::size_t visual_frame_length(const ModelDims& dims, std::size_t segments) noexcept;

struct PipelineTrace;

struct ForwardOutput {
    RealMatrix probs;  ///< T x C
    RealMatrix sd_v;   ///< empty in unimodal modes
    RealMatrix sd_a;
};

class Pipeline {
   public:
    Pipeline(const ModelDims& dims, Mode mode);
    ~Pipeline();
    Pipeline(Pipeline&&) noexcept;
    Pipeline& operator=(Pipeline&&) noexcept;

    const ModelDims& dims() const noexcept { return dims_; }
    Mode mode() const noexcept { return mode_; }

    /// Number of users on the MIMO link for this mode.
    std::size_t users() const noexcept { return mode_ == Mode::Multimodal ? 2 : 1; }
    std::size_t mimo_length(std::size_t segments) const noexcept;
    std::size_t siso_length(std::size_t segments) const noexcept;

    /// Runs the whole chain. Keeps the trace for a following backward().
    ForwardOutput forward(const ModelParams& p, const Sample& s, const FrameLinks& links, bool keep_trace = false);

    /// Backpropagates dL/dprobs and the direct dL/dSD_v, dL/dSD_a (may be
    /// empty) from the last forward(keep_trace = true).
    void backward(const ModelParams& p, const FrameLinks& links, const RealMatrix& g_probs, const RealMatrix& g_sd_v,
                  const RealMatrix& g_sd_a, ModelParams& grad);

    /// Hash of every ReLU on/off decision and PSP threshold decision of the
    /// last traced forward(). Two points with equal signatures lie in the same
    /// smooth piece of the loss.
    std::uint64_t branch_signature() const;

   private:
    ModelDims dims_;
    Mode mode_;
    std::unique_ptr<PipelineTrace> trace_;
};

}  // namespace pgsc
