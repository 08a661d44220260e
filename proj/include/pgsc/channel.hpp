// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "pgsc/numeric.hpp"
#include "pgsc/rng.hpp"

namespace pgsc {

enum class ChannelKind { Awgn, Rayleigh, Rician };

std::string_view to_string(ChannelKind kind) noexcept;
std::optional<ChannelKind> parse_channel_kind(std::string_view name);

struct ChannelModel {
    ChannelKind kind = ChannelKind::Awgn;
    /// Rician K-factor (LOS to scatter power ratio). Ignored for other kinds.
    Real rician_k = 1.0;
};

/// One slow-fading draw: H is M receive antennas x K transmit users and is
/// held fixed for a whole frame.
struct ChannelRealization {
    ComplexMatrix h;
    ChannelModel model;
};

/// K users x L_c channel uses, scaled to average symbol power `power`.
struct TransmitFrame {
    ComplexMatrix x;
    Real power = 1.0;
    /// Factor that was applied to the raw symbols; divide by it to undo.
    Real scale = 1.0;
};

/// sigma^2 = P / 10^(snr_db / 10). snr_db = +inf gives a noiseless link.
Real snr_to_noise_power(Real power, Real snr_db);

/// Scales X so that mean(|X|^2) = P. Throws ZeroFrame for an all-zero X.
TransmitFrame normalize_power(const ComplexMatrix& x, Real power);

Real mean_power(const ComplexMatrix& x) noexcept;

ChannelRealization draw_channel(const ChannelModel& model, std::size_t m, std::size_t k, SeededRng& rng);

/// Y = H X + N with N ~ CN(0, sigma^2) from the frame power and snr_db.
ComplexMatrix transmit(const TransmitFrame& frame, const ChannelRealization& ch, Real snr_db, SeededRng& rng);

/// Y = H X + noise with the noise already drawn (for common random numbers
/// across SNR points: pass unit-variance noise scaled by sqrt(sigma^2)).
ComplexMatrix transmit_with_noise(const ComplexMatrix& x, const ComplexMatrix& h, const ComplexMatrix& noise);

}  // namespace pgsc
