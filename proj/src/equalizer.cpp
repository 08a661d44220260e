// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#include "pgsc/equalizer.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace pgsc {

PilotSchedule make_pilot(std::size_t users, std::size_t length, const PilotConfig& cfg) {
    if (users == 0) throw Error(ErrorCode::DimensionMismatch, "pilot needs at least one user");
    if (length < 2 * users)
        throw Error(ErrorCode::TooShort,
                    "pilot length " + std::to_string(length) + " < 2*K for K=" + std::to_string(users));
    PilotSchedule s{ComplexMatrix(users, length), std::vector<std::size_t>(length)};
    const std::size_t block = length / users;
    for (std::size_t t = 0; t < length; ++t) {
        const std::size_t k = std::min(t / block, users - 1);
        const Real f = static_cast<Real>(cfg.base_frequency + cfg.frequency_step * static_cast<int>(k));
        const Real phase = 2.0 * std::numbers::pi * f * static_cast<Real>(t) / static_cast<Real>(length);
        s.symbols(k, t) = Complex(std::cos(phase), std::sin(phase));
        s.active_user[t] = k;
    }
    return s;
}

ChannelEstimate ls_estimate(const ComplexMatrix& y_pilot, const PilotSchedule& sched) {
    const std::size_t m = y_pilot.rows();
    const std::size_t k = sched.symbols.rows();
    const std::size_t lp = sched.symbols.cols();
    if (y_pilot.cols() != lp || sched.active_user.size() != lp)
        throw Error(ErrorCode::DimensionMismatch,
                    "pilot observation " + shape_of(y_pilot) + " vs schedule " + shape_of(sched.symbols));

    ChannelEstimate est;
    est.per_t_error.assign(lp, std::numeric_limits<Real>::infinity());
    std::vector<ComplexMatrix> candidates(lp);
    ComplexMatrix current(m, k);
    std::vector<bool> seen(k, false);
    std::size_t n_seen = 0;

    for (std::size_t t = 0; t < lp; ++t) {
        const std::size_t u = sched.active_user[t];
        const Complex x = sched.symbols(u, t);
        const Real energy = std::norm(x);
        if (energy < 1e-12) throw Error(ErrorCode::ZeroPilotSymbol, "pilot symbol at t=" + std::to_string(t));
        for (std::size_t i = 0; i < m; ++i) current(i, u) = y_pilot(i, t) * std::conj(x) / energy;
        if (!seen[u]) {
            seen[u] = true;
            ++n_seen;
        }
        if (n_seen < k) continue;
        candidates[t] = current;

        Real err = 0.0;
        for (std::size_t tau = 0; tau < lp; ++tau) {
            for (std::size_t i = 0; i < m; ++i) {
                Complex pred = 0.0;
                for (std::size_t j = 0; j < k; ++j) pred += current(i, j) * sched.symbols(j, tau);
                err += std::norm(pred - y_pilot(i, tau));
            }
        }
        est.per_t_error[t] = err;
    }

    // First minimum wins, which gives the smallest index on ties.
    est.t_min = static_cast<std::size_t>(
        std::distance(est.per_t_error.begin(), std::min_element(est.per_t_error.begin(), est.per_t_error.end())));
    est.h_best = candidates[est.t_min];
    return est;
}

ChannelEstimate perfect_estimate(const ComplexMatrix& h) { return ChannelEstimate{h, {0.0}, 0}; }

ComplexMatrix zf_weights(const ComplexMatrix& h_est) {
    if (h_est.rows() < h_est.cols())
        throw Error(ErrorCode::DimensionMismatch, "zero-forcing needs M >= K, got " + shape_of(h_est));
    const ComplexMatrix hh = hermitian(h_est);
    return solve_hermitian_system(matmul(hh, h_est), hh);
}

ComplexMatrix zf_detect(const ComplexMatrix& y, const ChannelEstimate& est) {
    const ComplexMatrix& h = est.h_best;
    if (h.rows() < h.cols())
        throw Error(ErrorCode::DimensionMismatch, "zero-forcing needs M >= K, got " + shape_of(h));
    if (y.rows() != h.rows())
        throw Error(ErrorCode::DimensionMismatch, "observation " + shape_of(y) + " vs channel " + shape_of(h));
    const ComplexMatrix hh = hermitian(h);
    return solve_hermitian_system(matmul(hh, h), matmul(hh, y));
}

}  // namespace pgsc
