// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#pragma once

#include <vector>

#include "pgsc/numeric.hpp"

namespace pgsc {

struct PilotConfig {
    /// Sinusoid frequency (cycles per pilot block) of user 0.
    int base_frequency = 1;
    /// Frequency increment between consecutive users; keeps f_k distinct.
    int frequency_step = 1;
    /// Pilot slots per user; the block length is this times K.
    std::size_t length_per_user = 32;
};

/// Time-orthogonal pilot: in each timestep exactly one user sends a
/// unit-modulus sinusoid sample, all others send 0.
struct PilotSchedule {
    ComplexMatrix symbols;                 ///< K x L_p
    std::vector<std::size_t> active_user;  ///< length L_p
};

/// Builds the pilot for K users over L_p timesteps. User k owns the
/// contiguous block of slots [k*L_p/K, (k+1)*L_p/K) (the last user also takes
/// any remainder) and sends exp(i*2*pi*f_k*t/L_p) there.
/// Throws TooShort when L_p < 2K.
PilotSchedule make_pilot(std::size_t users, std::size_t length, const PilotConfig& cfg = {});

struct ChannelEstimate {
    ComplexMatrix h_best;           ///< M x K
    std::vector<Real> per_t_error;  ///< +inf where the estimate is not yet complete
    std::size_t t_min = 0;
};

/// Per-timestep least-squares channel estimation with minimum-error selection.
///
/// At timestep t with active user k the column estimate is
///     h_k = y_t * conj(x_t) / |x_t|^2,
/// and the full estimate H_t holds the most recent estimate of every column.
/// H_t is scored by its squared fitting error over the whole pilot block,
///     e_t = sum_tau || H_t x_tau - y_tau ||^2,
/// and H_best = H_{t_min} with t_min = argmin e_t (smallest index on ties).
/// Timesteps before every user has been seen get e_t = +inf.
ChannelEstimate ls_estimate(const ComplexMatrix& y_pilot, const PilotSchedule& sched);

/// Wraps a known channel matrix as an estimate (perfect CSI).
ChannelEstimate perfect_estimate(const ComplexMatrix& h);

/// Zero-forcing weights (H^H H)^{-1} H^H, K x M. Throws IllConditioned.
ComplexMatrix zf_weights(const ComplexMatrix& h_est);

/// X_hat = (H^H H)^{-1} H^H Y. Throws DimensionMismatch when M < K and
/// IllConditioned when the Gram matrix cannot be inverted.
ComplexMatrix zf_detect(const ComplexMatrix& y, const ChannelEstimate& est);

}  // namespace pgsc
