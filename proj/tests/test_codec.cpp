// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "pgsc/channel.hpp"
#include "pgsc/codec.hpp"
#include "pgsc/equalizer.hpp"
#include "pgsc/rng.hpp"

using namespace pgsc;

namespace {

// Central-difference derivative of a scalar function of one matrix entry.
Real numeric_partial(RealMatrix& m, std::size_t i, const std::function<Real()>& f, Real h = 1e-6) {
    const Real keep = m[i];
    m[i] = keep + h;
    const Real up = f();
    m[i] = keep - h;
    const Real down = f();
    m[i] = keep;
    return (up - down) / (2.0 * h);
}

Real dot(const RealMatrix& a, const RealMatrix& b) {
    Real s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

TEST(Dense, ForwardAddsBiasPerRow) {
    const DenseParams p{RealMatrix{{1.0, 2.0}, {3.0, 4.0}}, RealMatrix{{0.5, -0.5}}};
    const RealMatrix y = dense_forward(RealMatrix{{1.0, 1.0}, {0.0, 2.0}}, p);
    EXPECT_EQ(y, (RealMatrix{{4.5, 5.5}, {6.5, 7.5}}));
}

TEST(Dense, BackwardMatchesFiniteDifferences) {
    SeededRng rng(41);
    DenseParams p = make_dense(5, 3, rng);
    p.b = sample_normal(rng, 1, 3, 1.0);
    RealMatrix x = sample_normal(rng, 4, 5, 1.0);
    const RealMatrix probe = sample_normal(rng, 4, 3, 1.0);
    auto f = [&] { return dot(dense_forward(x, p), probe); };
    DenseParams grad = zeros_like(p);
    const RealMatrix gx = dense_backward(x, p, probe, grad);
    for (std::size_t i = 0; i < p.w.size(); ++i) EXPECT_NEAR(grad.w[i], numeric_partial(p.w, i, f), 1e-7);
    for (std::size_t i = 0; i < p.b.size(); ++i) EXPECT_NEAR(grad.b[i], numeric_partial(p.b, i, f), 1e-7);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(gx[i], numeric_partial(x, i, f), 1e-7);
}

TEST(Recurrent, TanhCellMatchesUnrolledOracle) {
    SeededRng rng(42);
    const RecurrentParams p = make_recurrent(CellKind::Tanh, 3, 4, rng);
    const RealMatrix x = sample_normal(rng, 5, 3, 1.0);
    const RealMatrix out = encode_audio_semantic(FeatureSequence{1, x}, p).data;

    RealMatrix h(1, 4);
    for (std::size_t t = 0; t < 5; ++t) {
        RealMatrix xt(1, 3);
        for (std::size_t i = 0; i < 3; ++i) xt[i] = x(t, i);
        RealMatrix pre = add(add(matmul(xt, p.wx), matmul(h, p.wh)), p.b);
        for (auto& v : pre.data()) v = std::tanh(v);
        h = pre;
        for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(out(t, j), h[j], 1e-14);
    }
}

TEST(Recurrent, LstmCellMatchesUnrolledOracle) {
    SeededRng rng(43);
    const std::size_t hid = 3;
    const RecurrentParams p = make_recurrent(CellKind::Lstm, 2, hid, rng);
    const RealMatrix x = sample_normal(rng, 4, 2, 1.0);
    const RealMatrix out = encode_audio_semantic(FeatureSequence{1, x}, p).data;

    std::vector<Real> h(hid, 0.0), c(hid, 0.0);
    for (std::size_t t = 0; t < 4; ++t) {
        std::vector<Real> z(4 * hid);
        for (std::size_t j = 0; j < 4 * hid; ++j) {
            z[j] = p.b[j];
            for (std::size_t i = 0; i < 2; ++i) z[j] += x(t, i) * p.wx(i, j);
            for (std::size_t i = 0; i < hid; ++i) z[j] += h[i] * p.wh(i, j);
        }
        for (std::size_t j = 0; j < hid; ++j) {
            c[j] = sigmoid(z[hid + j]) * c[j] + sigmoid(z[j]) * std::tanh(z[2 * hid + j]);
            h[j] = sigmoid(z[3 * hid + j]) * std::tanh(c[j]);
            EXPECT_NEAR(out(t, j), h[j], 1e-14);
        }
    }
}

TEST(Recurrent, BackwardMatchesFiniteDifferences) {
    for (CellKind kind : {CellKind::Tanh, CellKind::Lstm}) {
        SeededRng rng(44);
        RecurrentParams p = make_recurrent(kind, 3, 4, rng);
        RealMatrix x = sample_normal(rng, 5, 3, 1.0);
        const RealMatrix probe = sample_normal(rng, 5, 4, 1.0);
        auto f = [&] { return dot(encode_audio_semantic(FeatureSequence{1, x}, p).data, probe); };
        RecurrentTrace trace;
        encode_audio_semantic(FeatureSequence{1, x}, p, &trace);
        RecurrentParams grad = zeros_like(p);
        const RealMatrix gx = encode_audio_semantic_backward(trace, p, probe, grad);
        for (std::size_t i = 0; i < p.wx.size(); ++i) EXPECT_NEAR(grad.wx[i], numeric_partial(p.wx, i, f), 1e-7);
        for (std::size_t i = 0; i < p.wh.size(); ++i) EXPECT_NEAR(grad.wh[i], numeric_partial(p.wh, i, f), 1e-7);
        for (std::size_t i = 0; i < p.b.size(); ++i) EXPECT_NEAR(grad.b[i], numeric_partial(p.b, i, f), 1e-7);
        for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(gx[i], numeric_partial(x, i, f), 1e-7);
    }
}

TEST(Agva, SingleLocationReturnsIt) {
    SeededRng rng(45);
    const AgvaParams p = make_agva(6, 4, 5, rng);
    const RealMatrix v = sample_normal(rng, 1, 6, 1.0);
    const std::vector<Real> a{0.1, -0.2, 0.3, 0.4};
    const auto out = agva_attend(v, a, p);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(out[i], v[i], 1e-15);
}

TEST(Agva, ZeroScoresGiveUniformAverage) {
    SeededRng rng(46);
    AgvaParams p = make_agva(3, 2, 4, rng);
    p.wf.fill(0.0);
    const RealMatrix v = sample_normal(rng, 4, 3, 1.0);
    AgvaTrace trace;
    const auto out = agva_attend(v, std::vector<Real>{1.0, 2.0}, p, &trace);
    for (Real a : trace.alpha) EXPECT_NEAR(a, 0.25, 1e-15);
    for (std::size_t c = 0; c < 3; ++c) {
        const Real mean = (v(0, c) + v(1, c) + v(2, c) + v(3, c)) / 4.0;
        EXPECT_NEAR(out[c], mean, 1e-14);
    }
}

TEST(Agva, MatchesBruteForceAttention) {
    SeededRng rng(47);
    AgvaParams p = make_agva(5, 3, 4, rng);
    p.mv.b = sample_normal(rng, 1, 4, 0.3);
    p.ma.b = sample_normal(rng, 1, 4, 0.3);
    const RealMatrix v = sample_normal(rng, 6, 5, 1.0);
    const RealMatrix a = sample_normal(rng, 1, 3, 1.0);

    RealMatrix ma = dense_forward(a, p.ma);
    relu_inplace(ma);
    const RealMatrix qa = matmul(ma, p.wa1);
    std::vector<Real> z(6);
    Real zmax = -1e300;
    for (std::size_t j = 0; j < 6; ++j) {
        RealMatrix vj(1, 5);
        for (std::size_t c = 0; c < 5; ++c) vj[c] = v(j, c);
        RealMatrix mv = dense_forward(vj, p.mv);
        relu_inplace(mv);
        RealMatrix u = add(matmul(mv, p.wv1), qa);
        for (auto& x : u.data()) x = std::tanh(x);
        z[j] = matmul(u, p.wf)[0];
        zmax = std::max(zmax, z[j]);
    }
    Real norm = 0.0;
    for (auto& x : z) norm += (x = std::exp(x - zmax));
    std::vector<Real> expect(5, 0.0);
    Real alpha_sum = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
        const Real alpha = z[j] / norm;
        EXPECT_GE(alpha, 0.0);
        alpha_sum += alpha;
        for (std::size_t c = 0; c < 5; ++c) expect[c] += alpha * v(j, c);
    }
    EXPECT_NEAR(alpha_sum, 1.0, 1e-14);

    const auto out = agva_attend(v, a.row(0), p);
    for (std::size_t c = 0; c < 5; ++c) {
        EXPECT_NEAR(out[c], expect[c], 1e-13);
        // Convex combination of the locations.
        Real lo = 1e300, hi = -1e300;
        for (std::size_t j = 0; j < 6; ++j) {
            lo = std::min(lo, v(j, c));
            hi = std::max(hi, v(j, c));
        }
        EXPECT_GE(out[c], lo - 1e-12);
        EXPECT_LE(out[c], hi + 1e-12);
    }
}

TEST(Agva, BackwardMatchesFiniteDifferences) {
    SeededRng rng(48);
    AgvaParams p = make_agva(5, 3, 4, rng);
    p.mv.b = sample_normal(rng, 1, 4, 0.3);
    p.ma.b = sample_normal(rng, 1, 4, 0.3);
    const RealMatrix v = sample_normal(rng, 3, 5, 1.0);
    RealMatrix a = sample_normal(rng, 1, 3, 1.0);
    const RealMatrix probe = sample_normal(rng, 1, 5, 1.0);
    auto f = [&] { return dot(RealMatrix(1, 5, agva_attend(v, a.row(0), p)), probe); };
    AgvaTrace trace;
    agva_attend(v, a.row(0), p, &trace);
    AgvaParams grad = zeros_like(p);
    const auto ga = agva_attend_backward(trace, p, probe.row(0), grad);
    for (std::size_t i = 0; i < p.wf.size(); ++i) EXPECT_NEAR(grad.wf[i], numeric_partial(p.wf, i, f), 1e-7);
    for (std::size_t i = 0; i < p.wv1.size(); ++i) EXPECT_NEAR(grad.wv1[i], numeric_partial(p.wv1, i, f), 1e-7);
    for (std::size_t i = 0; i < p.wa1.size(); ++i) EXPECT_NEAR(grad.wa1[i], numeric_partial(p.wa1, i, f), 1e-7);
    for (std::size_t i = 0; i < p.mv.w.size(); ++i) EXPECT_NEAR(grad.mv.w[i], numeric_partial(p.mv.w, i, f), 1e-7);
    for (std::size_t i = 0; i < p.ma.w.size(); ++i) EXPECT_NEAR(grad.ma.w[i], numeric_partial(p.ma.w, i, f), 1e-7);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(ga[i], numeric_partial(a, i, f), 1e-7);
}

TEST(ChannelEncoder, IdentityLayersMapToOneSymbol) {
    const ChannelEncoderParams p{{RealMatrix::identity(2), RealMatrix(1, 2)}, {RealMatrix::identity(2), RealMatrix(1, 2)}};
    const ComplexMatrix z = channel_encode(RealMatrix{{1.0, 0.0}}, p);
    ASSERT_EQ(z.rows(), 1u);
    ASSERT_EQ(z.cols(), 1u);
    EXPECT_EQ(z(0, 0), Complex(1.0, 0.0));
}

TEST(ChannelEncoder, OddWidthRejected) {
    SeededRng rng(49);
    try {
        make_channel_encoder(4, 4, 3, rng);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::OddWidth);
    }
}

TEST(ChannelEncoder, BackwardMatchesFiniteDifferences) {
    SeededRng rng(50);
    ChannelEncoderParams p = make_channel_encoder(5, 6, 4, rng);
    p.reduce.b = sample_normal(rng, 1, 6, 0.2);
    RealMatrix x = sample_normal(rng, 3, 5, 1.0);
    const ComplexMatrix probe = sample_cn(rng, 3, 2, 1.0);
    // Real pairing <z, g> = sum Re(z) Re(g) + Im(z) Im(g).
    auto f = [&] {
        const ComplexMatrix z = channel_encode(x, p);
        Real s = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) s += z[i].real() * probe[i].real() + z[i].imag() * probe[i].imag();
        return s;
    };
    EncoderTrace trace;
    channel_encode(x, p, &trace);
    ChannelEncoderParams grad = zeros_like(p);
    const RealMatrix gx = channel_encode_backward(trace, p, probe, grad);
    for (std::size_t i = 0; i < p.shape.w.size(); ++i)
        EXPECT_NEAR(grad.shape.w[i], numeric_partial(p.shape.w, i, f), 1e-7);
    for (std::size_t i = 0; i < p.reduce.w.size(); ++i)
        EXPECT_NEAR(grad.reduce.w[i], numeric_partial(p.reduce.w, i, f), 1e-7);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(gx[i], numeric_partial(x, i, f), 1e-7);
}

TEST(ChannelDecoder, IdentityLayersPassPositiveInput) {
    const ChannelDecoderParams p{{RealMatrix::identity(2), RealMatrix(1, 2)},
                                 {RealMatrix::identity(2), RealMatrix(1, 2)},
                                 {RealMatrix::identity(2), RealMatrix(1, 2)}};
    const RealMatrix out = channel_decode(ComplexMatrix{{Complex(2.0, 3.0)}}, p);
    EXPECT_EQ(out, (RealMatrix{{2.0, 3.0}}));
    // Negative parts are cut by the ReLU layers.
    EXPECT_EQ(channel_decode(ComplexMatrix{{Complex(-2.0, 3.0)}}, p), (RealMatrix{{0.0, 3.0}}));
}

TEST(ChannelDecoder, BackwardMatchesFiniteDifferences) {
    SeededRng rng(51);
    ChannelDecoderParams p = make_channel_decoder(4, 7, 5, rng);
    p.first.b = sample_normal(rng, 1, 7, 0.2);
    p.second.b = sample_normal(rng, 1, 7, 0.2);
    const ComplexMatrix z = sample_cn(rng, 3, 2, 1.0);
    const RealMatrix probe = sample_normal(rng, 3, 5, 1.0);
    auto f = [&] { return dot(channel_decode(z, p), probe); };
    DecoderTrace trace;
    channel_decode(z, p, &trace);
    ChannelDecoderParams grad = zeros_like(p);
    const ComplexMatrix gz = channel_decode_backward(trace, p, probe, grad);
    for (std::size_t i = 0; i < p.first.w.size(); ++i)
        EXPECT_NEAR(grad.first.w[i], numeric_partial(p.first.w, i, f), 1e-7);
    for (std::size_t i = 0; i < p.proj.w.size(); ++i)
        EXPECT_NEAR(grad.proj.w[i], numeric_partial(p.proj.w, i, f), 1e-7);
    // Input gradient, real and imaginary parts.
    for (std::size_t i = 0; i < z.size(); ++i) {
        for (int part = 0; part < 2; ++part) {
            const Complex bump = part == 0 ? Complex(1e-6, 0.0) : Complex(0.0, 1e-6);
            ComplexMatrix up = z, down = z;
            up[i] += bump;
            down[i] -= bump;
            const Real fd = (dot(channel_decode(up, p), probe) - dot(channel_decode(down, p), probe)) / 2e-6;
            EXPECT_NEAR(part == 0 ? gz[i].real() : gz[i].imag(), fd, 1e-7);
        }
    }
}

TEST(ChannelCodec, NoiselessMimoLoopback) {
    SeededRng rng(52);
    const ChannelEncoderParams enc = make_channel_encoder(6, 8, 4, rng);
    const ChannelDecoderParams dec = make_channel_decoder(4, 8, 5, rng);
    const RealMatrix xa = sample_normal(rng, 5, 6, 1.0);
    const RealMatrix xb = sample_normal(rng, 5, 6, 1.0);
    const ComplexMatrix za = channel_encode(xa, enc), zb = channel_encode(xb, enc);

    // Each user's code as one row of channel uses.
    ComplexMatrix x(2, za.size());
    for (std::size_t i = 0; i < za.size(); ++i) {
        x(0, i) = za[i];
        x(1, i) = zb[i];
    }
    for (int trial = 0; trial < 20; ++trial) {
        const auto ch = draw_channel({ChannelKind::Rayleigh, 1.0}, 2, 2, rng);
        const ComplexMatrix y = transmit_with_noise(x, ch.h, ComplexMatrix(2, x.cols()));
        const ComplexMatrix x_hat = zf_detect(y, perfect_estimate(ch.h));
        ComplexMatrix za_hat(za.rows(), za.cols());
        for (std::size_t i = 0; i < za.size(); ++i) za_hat[i] = x_hat(0, i);
        EXPECT_LE(max_abs_diff(channel_decode(za_hat, dec), channel_decode(za, dec)), 1e-9);
    }
}

TEST(Recurrent, ZeroWeightsGiveZeroStates) {
    SeededRng rng(48);
    for (CellKind kind : {CellKind::Tanh, CellKind::Lstm}) {
        const RecurrentParams p = zeros_like(make_recurrent(kind, 3, 4, rng));
        const RealMatrix out = encode_audio_semantic(FeatureSequence{1, sample_normal(rng, 6, 3, 1.0)}, p).data;
        for (Real v : out.data()) EXPECT_EQ(v, 0.0);
    }
}

TEST(ChannelEncoder, ZeroLayersGiveZeroFrame) {
    SeededRng rng(49);
    const ChannelEncoderParams p = zeros_like(make_channel_encoder(5, 6, 4, rng));
    const ComplexMatrix z = channel_encode(sample_normal(rng, 3, 5, 1.0), p);
    ASSERT_EQ(z.rows(), 3u);
    ASSERT_EQ(z.cols(), 2u);
    for (const Complex& v : z.data()) EXPECT_EQ(v, Complex(0.0, 0.0));
}

TEST(ChannelDecoder, ZeroInputAndBiasesGiveZero) {
    SeededRng rng(50);
    ChannelDecoderParams p = make_channel_decoder(4, 6, 5, rng);
    for (DenseParams* layer : {&p.first, &p.second, &p.proj}) layer->b.fill(0.0);
    const RealMatrix out = channel_decode(ComplexMatrix(3, 2), p);
    ASSERT_EQ(out.rows(), 3u);
    ASSERT_EQ(out.cols(), 5u);
    for (Real v : out.data()) EXPECT_EQ(v, 0.0);
}
