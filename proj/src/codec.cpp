// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#include "pgsc/codec.hpp"

#include <algorithm>
#include <cmath>

#include "pgsc/euler.hpp"

namespace pgsc {

namespace {

RealMatrix glorot(std::size_t in, std::size_t out, SeededRng& rng) {
    return sample_normal(rng, in, out, std::sqrt(2.0 / static_cast<Real>(in + out)));
}

void require_cols(const RealMatrix& x, std::size_t cols, const char* what) {
    if (x.cols() != cols)
        throw Error(ErrorCode::ShapeMismatch,
                    std::string(what) + ": expected width " + std::to_string(cols) + ", got " + shape_of(x));
}

}  // namespace

RealMatrix FeatureSequence::segment(std::size_t t) const {
    RealMatrix out(locations, data.cols());
    std::copy_n(&data(t * locations, 0), locations * data.cols(), out.data().begin());
    return out;
}

// ---- dense ------------------------------------------------------------------

DenseParams make_dense(std::size_t in, std::size_t out, SeededRng& rng, bool bias) {
    return DenseParams{glorot(in, out, rng), bias ? RealMatrix(1, out) : RealMatrix()};
}

DenseParams zeros_like(const DenseParams& p) {
    return DenseParams{RealMatrix(p.w.rows(), p.w.cols()), RealMatrix(p.b.rows(), p.b.cols())};
}

RealMatrix dense_forward(const RealMatrix& x, const DenseParams& p) {
    require_cols(x, p.in(), "dense layer");
    RealMatrix y = matmul(x, p.w);
    if (!p.b.empty())
        for (std::size_t r = 0; r < y.rows(); ++r)
            for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) += p.b[c];
    return y;
}

RealMatrix dense_backward(const RealMatrix& x, const DenseParams& p, const RealMatrix& g, DenseParams& grad) {
    add_inplace(grad.w, matmul_tn(x, g));
    if (!p.b.empty())
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t c = 0; c < g.cols(); ++c) grad.b[c] += g(r, c);
    return matmul_nt(g, p.w);
}

void relu_inplace(RealMatrix& x) noexcept {
    for (auto& v : x.data()) v = relu(v);
}

void relu_backward_inplace(const RealMatrix& out, RealMatrix& g) {
    for (std::size_t i = 0; i < g.size(); ++i)
        if (!(out[i] > 0.0)) g[i] = 0.0;
}

// ---- recurrent --------------------------------------------------------------

RecurrentParams make_recurrent(CellKind kind, std::size_t in, std::size_t hidden, SeededRng& rng) {
    const std::size_t width = kind == CellKind::Lstm ? 4 * hidden : hidden;
    RecurrentParams p{kind, glorot(in, width, rng), sample_normal(rng, hidden, width, 1.0 / std::sqrt(2.0 * hidden)),
                      RealMatrix(1, width)};
    if (kind == CellKind::Lstm)
        for (std::size_t j = hidden; j < 2 * hidden; ++j) p.b[j] = 1.0;  // forget gate
    return p;
}

RecurrentParams zeros_like(const RecurrentParams& p) {
    return RecurrentParams{p.kind, RealMatrix(p.wx.rows(), p.wx.cols()), RealMatrix(p.wh.rows(), p.wh.cols()),
                           RealMatrix(p.b.rows(), p.b.cols())};
}

FeatureSequence encode_audio_semantic(const FeatureSequence& a, const RecurrentParams& p, RecurrentTrace* trace) {
    const RealMatrix& x = a.data;
    require_cols(x, p.wx.rows(), "recurrent encoder input");
    const std::size_t steps = x.rows(), h = p.hidden(), width = p.wx.cols();
    RealMatrix states(steps, h);
    RealMatrix gates(p.kind == CellKind::Lstm ? steps : 0, width);
    RealMatrix cells(p.kind == CellKind::Lstm ? steps : 0, h);
    std::vector<Real> pre(width);

    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t j = 0; j < width; ++j) pre[j] = p.b[j];
        for (std::size_t i = 0; i < x.cols(); ++i) {
            const Real xi = x(t, i);
            for (std::size_t j = 0; j < width; ++j) pre[j] += xi * p.wx(i, j);
        }
        if (t > 0)
            for (std::size_t i = 0; i < h; ++i) {
                const Real hi = states(t - 1, i);
                for (std::size_t j = 0; j < width; ++j) pre[j] += hi * p.wh(i, j);
            }
        if (p.kind == CellKind::Tanh) {
            for (std::size_t j = 0; j < h; ++j) states(t, j) = std::tanh(pre[j]);
        } else {
            for (std::size_t j = 0; j < h; ++j) {
                const Real ig = sigmoid(pre[j]);
                const Real fg = sigmoid(pre[h + j]);
                const Real gg = std::tanh(pre[2 * h + j]);
                const Real og = sigmoid(pre[3 * h + j]);
                const Real c_prev = t > 0 ? cells(t - 1, j) : 0.0;
                const Real c = fg * c_prev + ig * gg;
                gates(t, j) = ig;
                gates(t, h + j) = fg;
                gates(t, 2 * h + j) = gg;
                gates(t, 3 * h + j) = og;
                cells(t, j) = c;
                states(t, j) = og * std::tanh(c);
            }
        }
    }
    if (trace) *trace = RecurrentTrace{x, states, std::move(gates), std::move(cells)};
    return FeatureSequence{1, std::move(states)};
}

RealMatrix encode_audio_semantic_backward(const RecurrentTrace& trace, const RecurrentParams& p,
                                          const RealMatrix& g_states, RecurrentParams& grad) {
    const std::size_t steps = trace.states.rows(), h = p.hidden(), width = p.wx.cols(), d_in = p.wx.rows();
    RealMatrix g_input(steps, d_in);
    std::vector<Real> carry_h(h, 0.0), carry_c(h, 0.0), dz(width);

    for (std::size_t t = steps; t-- > 0;) {
        if (p.kind == CellKind::Tanh) {
            for (std::size_t j = 0; j < h; ++j) {
                const Real s = trace.states(t, j);
                dz[j] = (g_states(t, j) + carry_h[j]) * (1.0 - s * s);
            }
        } else {
            for (std::size_t j = 0; j < h; ++j) {
                const Real ig = trace.gates(t, j), fg = trace.gates(t, h + j);
                const Real gg = trace.gates(t, 2 * h + j), og = trace.gates(t, 3 * h + j);
                const Real c = trace.cells(t, j);
                const Real c_prev = t > 0 ? trace.cells(t - 1, j) : 0.0;
                const Real tc = std::tanh(c);
                const Real gh = g_states(t, j) + carry_h[j];
                const Real gc = gh * og * (1.0 - tc * tc) + carry_c[j];
                dz[j] = gc * gg * ig * (1.0 - ig);
                dz[h + j] = gc * c_prev * fg * (1.0 - fg);
                dz[2 * h + j] = gc * ig * (1.0 - gg * gg);
                dz[3 * h + j] = gh * tc * og * (1.0 - og);
                carry_c[j] = gc * fg;
            }
        }
        for (std::size_t j = 0; j < width; ++j) grad.b[j] += dz[j];
        for (std::size_t i = 0; i < d_in; ++i) {
            const Real xi = trace.input(t, i);
            Real gi = 0.0;
            for (std::size_t j = 0; j < width; ++j) {
                grad.wx(i, j) += xi * dz[j];
                gi += dz[j] * p.wx(i, j);
            }
            g_input(t, i) = gi;
        }
        for (std::size_t i = 0; i < h; ++i) {
            const Real hp = t > 0 ? trace.states(t - 1, i) : 0.0;
            Real gi = 0.0;
            for (std::size_t j = 0; j < width; ++j) {
                grad.wh(i, j) += hp * dz[j];
                gi += dz[j] * p.wh(i, j);
            }
            carry_h[i] = gi;
        }
    }
    return g_input;
}

// ---- AGVA -------------------------------------------------------------------

AgvaParams make_agva(std::size_t d_v, std::size_t d_a, std::size_t d, SeededRng& rng) {
    AgvaParams p;
    p.mv = make_dense(d_v, d, rng);
    p.ma = make_dense(d_a, d, rng);
    p.wv1 = glorot(d, d, rng);
    p.wa1 = glorot(d, d, rng);
    p.wf = glorot(d, 1, rng);
    return p;
}

AgvaParams zeros_like(const AgvaParams& p) {
    return AgvaParams{zeros_like(p.mv), zeros_like(p.ma), RealMatrix(p.wv1.rows(), p.wv1.cols()),
                      RealMatrix(p.wa1.rows(), p.wa1.cols()), RealMatrix(p.wf.rows(), p.wf.cols())};
}

std::vector<Real> agva_attend(const RealMatrix& v_t, std::span<const Real> a_star_t, const AgvaParams& p,
                              AgvaTrace* trace) {
    require_cols(v_t, p.mv.in(), "AGVA visual input");
    if (a_star_t.size() != p.ma.in())
        throw Error(ErrorCode::ShapeMismatch, "AGVA audio input: expected " + std::to_string(p.ma.in()) + ", got " +
                                                  std::to_string(a_star_t.size()));
    if (v_t.rows() == 0) throw Error(ErrorCode::ShapeMismatch, "AGVA needs at least one location");
    const std::size_t k = v_t.rows(), d = p.wv1.rows();

    RealMatrix mv = dense_forward(v_t, p.mv);
    relu_inplace(mv);
    RealMatrix a_row(1, a_star_t.size(), std::vector<Real>(a_star_t.begin(), a_star_t.end()));
    RealMatrix ma = dense_forward(a_row, p.ma);
    relu_inplace(ma);

    const RealMatrix audio_term = matmul(ma, p.wa1);
    RealMatrix u = matmul(mv, p.wv1);
    std::vector<Real> z(k, 0.0);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t c = 0; c < d; ++c) {
            u(j, c) = std::tanh(u(j, c) + audio_term[c]);
            z[j] += u(j, c) * p.wf[c];
        }
    const Real zmax = *std::max_element(z.begin(), z.end());
    Real zsum = 0.0;
    for (auto& v : z) {
        v = std::exp(v - zmax);
        zsum += v;
    }
    for (auto& v : z) v /= zsum;

    std::vector<Real> out(v_t.cols(), 0.0);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t c = 0; c < v_t.cols(); ++c) out[c] += z[j] * v_t(j, c);

    if (trace)
        *trace = AgvaTrace{v_t, std::vector<Real>(a_star_t.begin(), a_star_t.end()), std::move(mv), std::move(ma),
                           std::move(u), std::move(z)};
    return out;
}

std::vector<Real> agva_attend_backward(const AgvaTrace& tr, const AgvaParams& p, std::span<const Real> g_out,
                                       AgvaParams& grad) {
    const std::size_t k = tr.v.rows(), d = p.wv1.rows();
    std::vector<Real> g_alpha(k, 0.0);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t c = 0; c < tr.v.cols(); ++c) g_alpha[j] += tr.v(j, c) * g_out[c];
    Real dot = 0.0;
    for (std::size_t j = 0; j < k; ++j) dot += g_alpha[j] * tr.alpha[j];

    RealMatrix g_pre(k, d);
    RealMatrix g_audio_term(1, d);
    for (std::size_t j = 0; j < k; ++j) {
        const Real gz = tr.alpha[j] * (g_alpha[j] - dot);
        for (std::size_t c = 0; c < d; ++c) {
            const Real u = tr.u(j, c);
            grad.wf[c] += gz * u;
            const Real gp = gz * p.wf[c] * (1.0 - u * u);
            g_pre(j, c) = gp;
            g_audio_term[c] += gp;
        }
    }
    add_inplace(grad.wv1, matmul_tn(tr.mv, g_pre));
    RealMatrix g_mv = matmul_nt(g_pre, p.wv1);
    relu_backward_inplace(tr.mv, g_mv);
    dense_backward(tr.v, p.mv, g_mv, grad.mv);

    add_inplace(grad.wa1, matmul_tn(tr.ma, g_audio_term));
    RealMatrix g_ma = matmul_nt(g_audio_term, p.wa1);
    relu_backward_inplace(tr.ma, g_ma);
    const RealMatrix a_row(1, tr.a_star.size(), tr.a_star);
    const RealMatrix g_a = dense_backward(a_row, p.ma, g_ma, grad.ma);
    return std::vector<Real>(g_a.storage());
}

// ---- channel encoder / decoder ------------------------------------------------

ChannelEncoderParams make_channel_encoder(std::size_t in, std::size_t hidden, std::size_t code_width,
                                          SeededRng& rng) {
    if (code_width == 0 || code_width % 2 != 0)
        throw Error(ErrorCode::OddWidth, "channel code width must be even, got " + std::to_string(code_width));
    return ChannelEncoderParams{make_dense(in, hidden, rng), make_dense(hidden, code_width, rng)};
}

ChannelEncoderParams zeros_like(const ChannelEncoderParams& p) {
    return ChannelEncoderParams{zeros_like(p.reduce), zeros_like(p.shape)};
}

ComplexMatrix channel_encode(const RealMatrix& x, const ChannelEncoderParams& p, EncoderTrace* trace) {
    if (p.shape.out() % 2 != 0)
        throw Error(ErrorCode::OddWidth, "channel code width must be even, got " + std::to_string(p.shape.out()));
    RealMatrix hidden = dense_forward(x, p.reduce);
    relu_inplace(hidden);
    const RealMatrix code = dense_forward(hidden, p.shape);
    if (trace) *trace = EncoderTrace{x, std::move(hidden)};
    return euler_forward_rows(code);
}

RealMatrix channel_encode_backward(const EncoderTrace& trace, const ChannelEncoderParams& p,
                                   const ComplexMatrix& g_symbols, ChannelEncoderParams& grad) {
    // Euler forward is a coordinate relabeling; its adjoint is the decomposition.
    const RealMatrix g_code = euler_inverse_rows(g_symbols);
    RealMatrix g_hidden = dense_backward(trace.hidden, p.shape, g_code, grad.shape);
    relu_backward_inplace(trace.hidden, g_hidden);
    return dense_backward(trace.input, p.reduce, g_hidden, grad.reduce);
}

ChannelDecoderParams make_channel_decoder(std::size_t code_width, std::size_t hidden, std::size_t d_l,
                                          SeededRng& rng) {
    return ChannelDecoderParams{make_dense(code_width, hidden, rng), make_dense(hidden, hidden, rng),
                                make_dense(hidden, d_l, rng)};
}

ChannelDecoderParams zeros_like(const ChannelDecoderParams& p) {
    return ChannelDecoderParams{zeros_like(p.first), zeros_like(p.second), zeros_like(p.proj)};
}

RealMatrix channel_decode(const ComplexMatrix& z, const ChannelDecoderParams& p, DecoderTrace* trace) {
    RealMatrix real_in = euler_inverse_rows(z);
    RealMatrix h1 = dense_forward(real_in, p.first);
    relu_inplace(h1);
    RealMatrix h2 = dense_forward(h1, p.second);
    relu_inplace(h2);
    RealMatrix out = dense_forward(h2, p.proj);
    if (trace) *trace = DecoderTrace{std::move(real_in), std::move(h1), std::move(h2)};
    return out;
}

ComplexMatrix channel_decode_backward(const DecoderTrace& trace, const ChannelDecoderParams& p,
                                      const RealMatrix& g_out, ChannelDecoderParams& grad) {
    RealMatrix g2 = dense_backward(trace.h2, p.proj, g_out, grad.proj);
    relu_backward_inplace(trace.h2, g2);
    RealMatrix g1 = dense_backward(trace.h1, p.second, g2, grad.second);
    relu_backward_inplace(trace.h1, g1);
    const RealMatrix g_real = dense_backward(trace.real_in, p.first, g1, grad.first);
    return euler_forward_rows(g_real);
}

}  // namespace pgsc
