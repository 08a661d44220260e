// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#include "pgsc/channel.hpp"

#include <algorithm>
#include <cmath>

namespace pgsc {

std::string_view to_string(ChannelKind kind) noexcept {
    switch (kind) {
        case ChannelKind::Awgn: return "awgn";
        case ChannelKind::Rayleigh: return "rayleigh";
        case ChannelKind::Rician: return "rician";
    }
    return "unknown";
}

std::optional<ChannelKind> parse_channel_kind(std::string_view name) {
    if (name == "awgn" || name == "AWGN") return ChannelKind::Awgn;
    if (name == "rayleigh" || name == "Rayleigh") return ChannelKind::Rayleigh;
    if (name == "rician" || name == "Rician") return ChannelKind::Rician;
    return std::nullopt;
}

Real snr_to_noise_power(Real power, Real snr_db) {
    if (!(power > 0.0)) throw Error(ErrorCode::NonPositivePower, "signal power must be positive");
    return power / std::pow(10.0, snr_db / 10.0);
}

Real mean_power(const ComplexMatrix& x) noexcept {
    if (x.empty()) return 0.0;
    return frobenius_norm_sq(x) / static_cast<Real>(x.size());
}

TransmitFrame normalize_power(const ComplexMatrix& x, Real power) {
    const Real p = mean_power(x);
    if (!(p > 0.0)) throw Error(ErrorCode::ZeroFrame, "cannot normalize an all-zero frame");
    const Real s = std::sqrt(power / p);
    return TransmitFrame{scale(x, Complex(s, 0.0)), power, s};
}

ChannelRealization draw_channel(const ChannelModel& model, std::size_t m, std::size_t k, SeededRng& rng) {
    if (m == 0 || k == 0) throw Error(ErrorCode::DimensionMismatch, "channel needs at least one antenna and user");
    ChannelRealization ch{ComplexMatrix(m, k), model};
    switch (model.kind) {
        case ChannelKind::Awgn:
            for (std::size_t i = 0; i < std::min(m, k); ++i) ch.h(i, i) = 1.0;
            break;
        case ChannelKind::Rayleigh:
            ch.h = sample_cn(rng, m, k, 1.0);
            break;
        case ChannelKind::Rician: {
            if (model.rician_k < 0.0) throw Error(ErrorCode::ConfigError, "Rician K-factor must be nonnegative");
            const Real los = std::sqrt(model.rician_k / (model.rician_k + 1.0));
            const Real nlos = std::sqrt(1.0 / (model.rician_k + 1.0));
            const ComplexMatrix scatter = sample_cn(rng, m, k, 1.0);
            for (std::size_t i = 0; i < ch.h.size(); ++i) ch.h[i] = los + nlos * scatter[i];
            break;
        }
    }
    return ch;
}

ComplexMatrix transmit_with_noise(const ComplexMatrix& x, const ComplexMatrix& h, const ComplexMatrix& noise) {
    if (h.cols() != x.rows())
        throw Error(ErrorCode::DimensionMismatch, "channel " + shape_of(h) + " vs frame " + shape_of(x));
    ComplexMatrix y = matmul(h, x);
    if (!noise.same_shape(y)) throw Error(ErrorCode::DimensionMismatch, "noise shape " + shape_of(noise));
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += noise[i];
    return y;
}

ComplexMatrix transmit(const TransmitFrame& frame, const ChannelRealization& ch, Real snr_db, SeededRng& rng) {
    if (ch.h.cols() != frame.x.rows())
        throw Error(ErrorCode::DimensionMismatch, "channel " + shape_of(ch.h) + " vs frame " + shape_of(frame.x));
    const Real sigma2 = snr_to_noise_power(frame.power, snr_db);
    return transmit_with_noise(frame.x, ch.h, sample_cn(rng, ch.h.rows(), frame.x.cols(), sigma2));
}

}  // namespace pgsc
