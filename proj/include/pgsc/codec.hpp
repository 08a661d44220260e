// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------
//
// Semantic and channel encoders/decoders for the audio and visual users.
// Every forward op can record a trace; the matching *_backward op consumes
// it, accumulates parameter gradients and returns the input gradient.
// Complex gradients use the convention g = dL/dRe + i dL/dIm.

#pragma once

#include <span>
#include <vector>

#include "pgsc/numeric.hpp"
#include "pgsc/rng.hpp"

namespace pgsc {

/// T segments of `dim` features. Visual sequences carry `locations` spatial
/// rows per segment, stored consecutively (data is (T*locations) x dim).
struct FeatureSequence {
    std::size_t locations = 1;
    RealMatrix data;

    std::size_t segments() const noexcept { return locations ? data.rows() / locations : 0; }
    std::size_t dim() const noexcept { return data.cols(); }
    /// locations x dim block of segment t.
    RealMatrix segment(std::size_t t) const;
};

// ---- dense layers ------------------------------------------------------

/// y = x W + b with W: in x out, b: 1 x out.
struct DenseParams {
    RealMatrix w;
    RealMatrix b;

    std::size_t in() const noexcept { return w.rows(); }
    std::size_t out() const noexcept { return w.cols(); }
};

DenseParams make_dense(std::size_t in, std::size_t out, SeededRng& rng, bool bias = true);
DenseParams zeros_like(const DenseParams& p);

RealMatrix dense_forward(const RealMatrix& x, const DenseParams& p);
/// Accumulates dW, db into grad and returns dx.
RealMatrix dense_backward(const RealMatrix& x, const DenseParams& p, const RealMatrix& g, DenseParams& grad);

void relu_inplace(RealMatrix& x) noexcept;
/// g masked where the post-activation output is not positive.
void relu_backward_inplace(const RealMatrix& out, RealMatrix& g);

// ---- recurrent audio semantic encoder --------------------------------------

enum class CellKind { Tanh, Lstm };

/// Simple cell:  h_t = tanh(a_t Wx + h_{t-1} Wh + b)
/// LSTM cell:    gates [i f g o] = a_t Wx + h_{t-1} Wh + b (width 4h).
struct RecurrentParams {
    CellKind kind = CellKind::Tanh;
    RealMatrix wx;
    RealMatrix wh;
    RealMatrix b;

    std::size_t hidden() const noexcept { return wh.rows(); }
};

RecurrentParams make_recurrent(CellKind kind, std::size_t in, std::size_t hidden, SeededRng& rng);
RecurrentParams zeros_like(const RecurrentParams& p);

struct RecurrentTrace {
    RealMatrix input;   ///< T x d_a
    RealMatrix states;  ///< T x h
    RealMatrix gates;   ///< T x 4h, post-activation (LSTM only)
    RealMatrix cells;   ///< T x h (LSTM only)
};

FeatureSequence encode_audio_semantic(const FeatureSequence& a, const RecurrentParams& p,
                                      RecurrentTrace* trace = nullptr);
RealMatrix encode_audio_semantic_backward(const RecurrentTrace& trace, const RecurrentParams& p,
                                          const RealMatrix& g_states, RecurrentParams& grad);

// ---- audio-guided visual attention --------------------------------------

/// Scores each location j with z_j = tanh(M_v(v_j) Wv1 + M_a(a*) Wa1) wf,
/// where M_v, M_a are ReLU dense layers into the shared width d, and returns
/// the softmax(z)-weighted sum of the locations.
struct AgvaParams {
    DenseParams mv;     ///< d_v -> d
    DenseParams ma;     ///< d_a -> d
    RealMatrix wv1;     ///< d x d
    RealMatrix wa1;     ///< d x d
    RealMatrix wf;      ///< d x 1
};

AgvaParams make_agva(std::size_t d_v, std::size_t d_a, std::size_t d, SeededRng& rng);
AgvaParams zeros_like(const AgvaParams& p);

struct AgvaTrace {
    RealMatrix v;             ///< k x d_v
    std::vector<Real> a_star;
    RealMatrix mv;            ///< k x d, post-ReLU
    RealMatrix ma;            ///< 1 x d, post-ReLU
    RealMatrix u;             ///< k x d, post-tanh
    std::vector<Real> alpha;  ///< attention weights over the k locations
};

std::vector<Real> agva_attend(const RealMatrix& v_t, std::span<const Real> a_star_t, const AgvaParams& p,
                              AgvaTrace* trace = nullptr);
/// Returns the gradient with respect to a_star_t.
std::vector<Real> agva_attend_backward(const AgvaTrace& trace, const AgvaParams& p, std::span<const Real> g_out,
                                       AgvaParams& grad);

// ---- channel encoder / decoder -------------------------------------------

/// Two dense layers (ReLU, then linear) followed by the Euler mapping per
/// segment. The output width must be even.
struct ChannelEncoderParams {
    DenseParams reduce;
    DenseParams shape;
};

ChannelEncoderParams make_channel_encoder(std::size_t in, std::size_t hidden, std::size_t code_width, SeededRng& rng);
ChannelEncoderParams zeros_like(const ChannelEncoderParams& p);

struct EncoderTrace {
    RealMatrix input;
    RealMatrix hidden;
};

/// T x in real -> T x (code_width/2) complex. Throws OddWidth.
ComplexMatrix channel_encode(const RealMatrix& x, const ChannelEncoderParams& p, EncoderTrace* trace = nullptr);
RealMatrix channel_encode_backward(const EncoderTrace& trace, const ChannelEncoderParams& p,
                                   const ComplexMatrix& g_symbols, ChannelEncoderParams& grad);

/// Complex decomposition, two ReLU dense layers, then a linear projection to
/// the common fusion width d_l.
struct ChannelDecoderParams {
    DenseParams first;
    DenseParams second;
    DenseParams proj;
};

ChannelDecoderParams make_channel_decoder(std::size_t code_width, std::size_t hidden, std::size_t d_l, SeededRng& rng);
ChannelDecoderParams zeros_like(const ChannelDecoderParams& p);

struct DecoderTrace {
    RealMatrix real_in;
    RealMatrix h1;
    RealMatrix h2;
};

RealMatrix channel_decode(const ComplexMatrix& z, const ChannelDecoderParams& p, DecoderTrace* trace = nullptr);
ComplexMatrix channel_decode_backward(const DecoderTrace& trace, const ChannelDecoderParams& p,
                                      const RealMatrix& g_out, ChannelDecoderParams& grad);

}  // namespace pgsc
