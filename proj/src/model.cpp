// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#include "pgsc/model.hpp"

#include <algorithm>
#include <cmath>

#include "pgsc/euler.hpp"

namespace pgsc {

std::string_view to_string(Mode m) noexcept {
    switch (m) {
        case Mode::AudioOnly: return "audio";
        case Mode::VideoOnly: return "video";
        case Mode::Multimodal: return "multimodal";
    }
    return "unknown";
}

std::string_view to_string(CsiMode c) noexcept {
    switch (c) {
        case CsiMode::Pilot: return "pilot";
        case CsiMode::Perfect: return "perfect";
        case CsiMode::None: return "none";
    }
    return "unknown";
}

std::optional<Mode> parse_mode(std::string_view s) {
    if (s == "audio" || s == "audio-only") return Mode::AudioOnly;
    if (s == "video" || s == "video-only") return Mode::VideoOnly;
    if (s == "multimodal") return Mode::Multimodal;
    return std::nullopt;
}

std::optional<CsiMode> parse_csi(std::string_view s) {
    if (s == "pilot") return CsiMode::Pilot;
    if (s == "perfect") return CsiMode::Perfect;
    if (s == "none") return CsiMode::None;
    return std::nullopt;
}

std::string_view to_string(ParamGroup g) noexcept {
    switch (g) {
        case ParamGroup::AudioSemantic: return "audio_semantic";
        case ParamGroup::Agva: return "agva";
        case ParamGroup::AudioChannelEncoder: return "audio_channel_encoder";
        case ParamGroup::VisualChannelEncoder: return "visual_channel_encoder";
        case ParamGroup::AudioChannelDecoder: return "audio_channel_decoder";
        case ParamGroup::VisualChannelDecoder: return "visual_channel_decoder";
        case ParamGroup::PspSimilarity: return "psp_similarity";
        case ParamGroup::PspFusion: return "psp_fusion";
        case ParamGroup::Classifier: return "classifier";
    }
    return "unknown";
}

bool is_transmitter(ParamGroup g) noexcept {
    return g == ParamGroup::AudioSemantic || g == ParamGroup::Agva || g == ParamGroup::AudioChannelEncoder ||
           g == ParamGroup::VisualChannelEncoder;
}

void validate(const ModelDims& d) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigError, what); };
    if (d.audio_code == 0 || d.audio_code % 2) fail("audio_code must be even and positive");
    if (d.visual_code == 0 || d.visual_code % 2) fail("visual_code must be even and positive");
    if (d.classes < 2) fail("need at least two classes");
    if (d.locations == 0) fail("need at least one visual location");
    if (!(d.tau1 >= 0.0 && d.tau1 < 1.0)) fail("tau1 must lie in [0, 1)");
    for (auto v : {d.audio_dim, d.visual_dim, d.attention_dim, d.semantic_hidden, d.audio_enc_hidden,
                   d.visual_enc_hidden, d.audio_dec_hidden, d.visual_dec_hidden, d.fusion_dim, d.sim_dim,
                   d.head_hidden})
        if (v == 0) fail("layer widths must be positive");
}

ModelParams init_model(const ModelDims& d, SeededRng& rng) {
    validate(d);
    ModelParams p;
    p.audio_semantic = make_recurrent(d.cell, d.audio_dim, d.semantic_hidden, rng);
    p.agva = make_agva(d.visual_dim, d.audio_code, d.attention_dim, rng);
    p.audio_encoder = make_channel_encoder(d.semantic_hidden, d.audio_enc_hidden, d.audio_code, rng);
    p.visual_encoder = make_channel_encoder(d.visual_dim, d.visual_enc_hidden, d.visual_code, rng);
    p.audio_decoder = make_channel_decoder(d.audio_code, d.audio_dec_hidden, d.fusion_dim, rng);
    p.visual_decoder = make_channel_decoder(d.visual_code, d.visual_dec_hidden, d.fusion_dim, rng);
    p.psp = make_psp(d.fusion_dim, d.sim_dim, rng, d.tau1);
    p.head = make_classifier(d.fusion_dim, d.head_hidden, d.classes, rng);
    return p;
}

ModelParams zeros_like(const ModelParams& p) {
    return ModelParams{zeros_like(p.audio_semantic), zeros_like(p.agva),          zeros_like(p.audio_encoder),
                       zeros_like(p.visual_encoder), zeros_like(p.audio_decoder), zeros_like(p.visual_decoder),
                       zeros_like(p.psp),            zeros_like(p.head)};
}

std::size_t parameter_count(const ModelParams& p) {
    std::size_t n = 0;
    for_each_param(p, [&](std::string_view, ParamGroup, const RealMatrix& m) { n += m.size(); });
    return n;
}

// ---- links ---------------------------------------------------------------------

ComplexMatrix Link::receive(const ComplexMatrix& x) const {
    if (bypass) return x;
    const ComplexMatrix y = transmit_with_noise(x, h, noise);
    if (estimate) return zf_detect(y, *estimate);
    const std::size_t k = users();
    ComplexMatrix out(k, y.cols());
    std::copy_n(y.data().begin(), k * y.cols(), out.data().begin());
    return out;
}

ComplexMatrix Link::effective_gain() const {
    const std::size_t k = users();
    if (bypass) return ComplexMatrix::identity(k);
    if (estimate) return matmul(zf_weights(estimate->h_best), h);
    ComplexMatrix g(k, k);
    std::copy_n(h.data().begin(), k * k, g.data().begin());
    return g;
}

Link draw_link(const LinkSpec& spec, SeededRng& rng) {
    Link l;
    l.csi = spec.csi;
    l.h = draw_channel(spec.model, spec.antennas, spec.users, rng).h;
    const Real sigma = std::sqrt(snr_to_noise_power(spec.power, spec.snr_db));
    const PilotSchedule sched = make_pilot(spec.users, spec.pilot.length_per_user * spec.users, spec.pilot);

    ComplexMatrix pilot_noise = sample_cn(rng, spec.antennas, sched.symbols.cols(), 1.0);
    l.noise = sample_cn(rng, spec.antennas, spec.length, 1.0);
    for (auto& v : pilot_noise.data()) v *= sigma;
    for (auto& v : l.noise.data()) v *= sigma;

    if (spec.csi == CsiMode::Pilot) {
        const ComplexMatrix x_pilot = scale(sched.symbols, Complex(std::sqrt(spec.power), 0.0));
        const ComplexMatrix y_pilot = transmit_with_noise(x_pilot, l.h, pilot_noise);
        PilotSchedule scaled = sched;
        scaled.symbols = x_pilot;
        l.estimate = ls_estimate(y_pilot, scaled);
    } else if (spec.csi == CsiMode::Perfect) {
        l.estimate = perfect_estimate(l.h);
    }
    return l;
}

Link bypass_link(std::size_t users, std::size_t length) {
    Link l;
    l.h = ComplexMatrix::identity(users);
    l.noise = ComplexMatrix(users, length);
    l.bypass = true;
    return l;
}

// ---- pipeline ------------------------------------------------------------------

std::size_t segment_count(const Sample& s) noexcept { return s.labels.rows(); }

std::size_t audio_frame_length(const ModelDims& dims, std::size_t segments) noexcept {
    return segments * dims.audio_code / 2;
}

std::size_t visual_frame_length(const ModelDims& dims, std::size_t segments) noexcept {
    return segments * dims.visual_code / 2;
}

namespace {

struct PowerNorm {
    ComplexMatrix raw;  ///< 1 x L, before scaling
    Real scale = 1.0;
    Real norm_sq = 0.0;
    bool active = false;
};

/// Scales one user's stream to unit average power. An all-zero stream has
/// nothing to send and passes through unscaled.
ComplexMatrix normalize_stream(const ComplexMatrix& raw, PowerNorm& st) {
    st.raw = raw;
    st.norm_sq = frobenius_norm_sq(raw);
    st.active = st.norm_sq > 0.0;
    if (!st.active) {
        st.scale = 1.0;
        return raw;
    }
    TransmitFrame f = normalize_power(raw, 1.0);
    st.scale = f.scale;
    return std::move(f.x);
}

ComplexMatrix normalize_stream_backward(const PowerNorm& st, const ComplexMatrix& g) {
    if (!st.active) return g;
    Real dot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        dot += st.raw[i].real() * g[i].real() + st.raw[i].imag() * g[i].imag();
    ComplexMatrix out(g.rows(), g.cols());
    const Real c = dot / st.norm_sq;
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = st.scale * (g[i] - c * st.raw[i]);
    return out;
}

ComplexMatrix flatten(const ComplexMatrix& m) { return ComplexMatrix(1, m.size(), m.storage()); }

ComplexMatrix reshape_prefix(const ComplexMatrix& m, std::size_t row, std::size_t rows, std::size_t cols) {
    ComplexMatrix out(rows, cols);
    std::copy_n(&m(row, 0), rows * cols, out.data().begin());
    return out;
}

}  // namespace

struct PipelineTrace {
    RecurrentTrace semantic;
    EncoderTrace audio_enc;
    PowerNorm audio_norm;
    RealMatrix a_star;
    std::vector<AgvaTrace> agva;
    EncoderTrace visual_enc;
    PowerNorm visual_norm;
    DecoderTrace audio_dec;
    DecoderTrace visual_dec;
    PspTrace psp;
    ClassifierTrace cls;
    std::size_t segments = 0;
    std::size_t audio_len = 0;
    std::size_t visual_len = 0;
};

Pipeline::Pipeline(const ModelDims& dims, Mode mode) : dims_(dims), mode_(mode) { validate(dims_); }
Pipeline::~Pipeline() = default;
Pipeline::Pipeline(Pipeline&&) noexcept = default;
Pipeline& Pipeline::operator=(Pipeline&&) noexcept = default;

std::size_t Pipeline::mimo_length(std::size_t segments) const noexcept {
    switch (mode_) {
        case Mode::AudioOnly: return audio_frame_length(dims_, segments);
        case Mode::VideoOnly: return visual_frame_length(dims_, segments);
        case Mode::Multimodal:
            return std::max(audio_frame_length(dims_, segments), visual_frame_length(dims_, segments));
    }
    return 0;
}

std::size_t Pipeline::siso_length(std::size_t segments) const noexcept { return audio_frame_length(dims_, segments); }

ForwardOutput Pipeline::forward(const ModelParams& p, const Sample& s, const FrameLinks& links, bool keep_trace) {
    const std::size_t segments = segment_count(s);
    if (s.audio.data.rows() != segments || s.visual.segments() != segments)
        throw Error(ErrorCode::ShapeMismatch, "audio, visual and label segment counts differ");
    auto tr = std::make_unique<PipelineTrace>();
    tr->segments = segments;
    tr->audio_len = audio_frame_length(dims_, segments);
    tr->visual_len = visual_frame_length(dims_, segments);
    const bool use_audio = mode_ != Mode::VideoOnly;
    const bool use_video = mode_ != Mode::AudioOnly;
    const std::size_t k_users = users();
    const std::size_t lc = mimo_length(segments);
    if (links.mimo.users() != k_users || links.mimo.noise.cols() != lc)
        throw Error(ErrorCode::DimensionMismatch, "MIMO link does not match the pipeline frame");

    ComplexMatrix x_audio, x_video;
    if (use_audio) {
        const FeatureSequence hs = encode_audio_semantic(s.audio, p.audio_semantic, &tr->semantic);
        x_audio = normalize_stream(flatten(channel_encode(hs.data, p.audio_encoder, &tr->audio_enc)), tr->audio_norm);
    }

    if (use_video) {
        if (mode_ == Mode::Multimodal) {
            if (links.siso.users() != 1 || links.siso.noise.cols() != tr->audio_len)
                throw Error(ErrorCode::DimensionMismatch, "SISO link does not match the audio frame");
            const ComplexMatrix rx = links.siso.receive(x_audio);
            tr->a_star = euler_inverse_rows(reshape_prefix(rx, 0, segments, dims_.audio_code / 2));
        } else {
            tr->a_star = RealMatrix(segments, dims_.audio_code);
        }
        RealMatrix v_att(segments, dims_.visual_dim);
        tr->agva.resize(segments);
        for (std::size_t t = 0; t < segments; ++t) {
            const auto out = agva_attend(s.visual.segment(t), tr->a_star.row(t), p.agva, &tr->agva[t]);
            std::copy(out.begin(), out.end(), v_att.row(t).begin());
        }
        x_video = normalize_stream(flatten(channel_encode(v_att, p.visual_encoder, &tr->visual_enc)), tr->visual_norm);
    }

    ComplexMatrix x(k_users, lc);
    std::size_t row = 0;
    if (use_audio) std::copy(x_audio.data().begin(), x_audio.data().end(), x.row(row++).begin());
    if (use_video) std::copy(x_video.data().begin(), x_video.data().end(), x.row(row++).begin());

    const ComplexMatrix x_hat = links.mimo.receive(x);

    ForwardOutput out;
    RealMatrix ma, mv;
    row = 0;
    if (use_audio)
        ma = channel_decode(reshape_prefix(x_hat, row++, segments, dims_.audio_code / 2), p.audio_decoder,
                            &tr->audio_dec);
    if (use_video)
        mv = channel_decode(reshape_prefix(x_hat, row++, segments, dims_.visual_code / 2), p.visual_decoder,
                            &tr->visual_dec);

    switch (mode_) {
        case Mode::AudioOnly: out.probs = classify_single(ma, p.head, &tr->cls); break;
        case Mode::VideoOnly: out.probs = classify_single(mv, p.head, &tr->cls); break;
        case Mode::Multimodal: {
            Propagated sd = psp_forward(mv, ma, p.psp, &tr->psp);
            out.probs = classify(sd.sd_v, sd.sd_a, p.head, &tr->cls);
            out.sd_v = std::move(sd.sd_v);
            out.sd_a = std::move(sd.sd_a);
            break;
        }
    }
    if (keep_trace) trace_ = std::move(tr);
    return out;
}

void Pipeline::backward(const ModelParams& p, const FrameLinks& links, const RealMatrix& g_probs,
                        const RealMatrix& g_sd_v, const RealMatrix& g_sd_a, ModelParams& grad) {
    if (!trace_) throw Error(ErrorCode::ShapeMismatch, "backward() without a traced forward()");
    PipelineTrace& tr = *trace_;
    const bool use_audio = mode_ != Mode::VideoOnly;
    const bool use_video = mode_ != Mode::AudioOnly;
    const std::size_t segments = tr.segments;

    const RealMatrix g_fused = classify_backward(tr.cls, p.head, g_probs, grad.head);
    RealMatrix g_ma, g_mv;
    if (mode_ == Mode::Multimodal) {
        RealMatrix gv = scale(g_fused, 0.5), ga = scale(g_fused, 0.5);
        if (!g_sd_v.empty()) add_inplace(gv, g_sd_v);
        if (!g_sd_a.empty()) add_inplace(ga, g_sd_a);
        PspInputGrads gin = psp_backward(tr.psp, p.psp, gv, ga, grad.psp);
        g_mv = std::move(gin.mv);
        g_ma = std::move(gin.ma);
    } else if (mode_ == Mode::AudioOnly) {
        g_ma = g_fused;
    } else {
        g_mv = g_fused;
    }

    // Receiver side back to the detected streams.
    const std::size_t k_users = users();
    ComplexMatrix g_xhat(k_users, mimo_length(segments));
    std::size_t row = 0;
    if (use_audio) {
        const ComplexMatrix g = channel_decode_backward(tr.audio_dec, p.audio_decoder, g_ma, grad.audio_decoder);
        std::copy(g.data().begin(), g.data().end(), g_xhat.row(row++).begin());
    }
    if (use_video) {
        const ComplexMatrix g = channel_decode_backward(tr.visual_dec, p.visual_decoder, g_mv, grad.visual_decoder);
        std::copy(g.data().begin(), g.data().end(), g_xhat.row(row++).begin());
    }
    const ComplexMatrix g_x = matmul(hermitian(links.mimo.effective_gain()), g_xhat);

    ComplexMatrix g_audio_tx;
    row = 0;
    if (use_audio) {
        g_audio_tx = ComplexMatrix(1, tr.audio_len);
        std::copy_n(g_x.row(row++).begin(), tr.audio_len, g_audio_tx.data().begin());
    }

    if (use_video) {
        ComplexMatrix g_video_tx(1, tr.visual_len);
        std::copy_n(g_x.row(row++).begin(), tr.visual_len, g_video_tx.data().begin());
        const ComplexMatrix g_raw = normalize_stream_backward(tr.visual_norm, g_video_tx);
        const RealMatrix g_vatt = channel_encode_backward(
            tr.visual_enc, p.visual_encoder, reshape_prefix(g_raw, 0, segments, dims_.visual_code / 2),
            grad.visual_encoder);
        RealMatrix g_astar(segments, dims_.audio_code);
        for (std::size_t t = 0; t < segments; ++t) {
            const auto g = agva_attend_backward(tr.agva[t], p.agva, g_vatt.row(t), grad.agva);
            std::copy(g.begin(), g.end(), g_astar.row(t).begin());
        }
        if (mode_ == Mode::Multimodal) {
            const ComplexMatrix g_rx = flatten(euler_forward_rows(g_astar));
            const ComplexMatrix g_siso = matmul(hermitian(links.siso.effective_gain()), g_rx);
            for (std::size_t i = 0; i < g_audio_tx.size(); ++i) g_audio_tx[i] += g_siso[i];
        }
    }

    if (use_audio) {
        const ComplexMatrix g_raw = normalize_stream_backward(tr.audio_norm, g_audio_tx);
        const RealMatrix g_hs = channel_encode_backward(
            tr.audio_enc, p.audio_encoder, reshape_prefix(g_raw, 0, segments, dims_.audio_code / 2),
            grad.audio_encoder);
        encode_audio_semantic_backward(tr.semantic, p.audio_semantic, g_hs, grad.audio_semantic);
    }
}

std::uint64_t Pipeline::branch_signature() const {
    if (!trace_) throw Error(ErrorCode::ShapeMismatch, "branch_signature() without a traced forward()");
    const PipelineTrace& tr = *trace_;
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](bool bit) {
        h ^= bit ? 1u : 0u;
        h *= 0x100000001b3ULL;
    };
    auto positive = [&](const RealMatrix& m) {
        for (Real v : m.data()) mix(v > 0.0);
    };
    for (const auto& a : tr.agva) {
        positive(a.mv);
        positive(a.ma);
    }
    positive(tr.audio_enc.hidden);
    positive(tr.visual_enc.hidden);
    positive(tr.audio_dec.h1);
    positive(tr.audio_dec.h2);
    positive(tr.visual_dec.h1);
    positive(tr.visual_dec.h2);
    positive(tr.psp.omega.va);
    for (Real v : tr.psp.w_hat_va.data()) mix(v > dims_.tau1);
    for (Real v : tr.psp.w_hat_av.data()) mix(v > dims_.tau1);
    positive(tr.cls.hidden);
    return h;
}

}  // namespace pgsc
