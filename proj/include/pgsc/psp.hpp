// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------
//
// Positive sample propagation: cross-modal segment similarity, positive and
// above-threshold connection filtering, residual propagation, and the event
// classifier head.

#pragma once

#include "pgsc/codec.hpp"
#include "pgsc/numeric.hpp"

namespace pgsc {

inline constexpr Real kDefaultTau1 = 0.099;

struct PspParams {
    RealMatrix sim_proj_v;  ///< d_l x d_s, visual side of the similarity
    RealMatrix sim_proj_a;  ///< d_l x d_s, audio side of the similarity
    RealMatrix fuse_a;      ///< d_l x d_l, visual -> audio propagation map
    RealMatrix fuse_v;      ///< d_l x d_l, audio -> visual propagation map
    Real tau1 = kDefaultTau1;
};

PspParams make_psp(std::size_t d_l, std::size_t d_s, SeededRng& rng, Real tau1 = kDefaultTau1);
PspParams zeros_like(const PspParams& p);

struct Similarity {
    RealMatrix va;  ///< T x T, rows index visual segments
    RealMatrix av;  ///< T x T, rows index audio segments
};

/// omega_va = (Mv Wv)(Ma Wa)^T / sqrt(d_l); omega_av uses the same
/// projection pair with the roles swapped, i.e. omega_av = omega_va^T.
Similarity similarity(const RealMatrix& mv, const RealMatrix& ma, const PspParams& p);

/// row_l1_normalize(relu(omega)).
RealMatrix normalize_connections(const RealMatrix& omega);

/// Zeroes entries <= tau1, then one row-wise l1 re-normalization.
RealMatrix threshold_connections(const RealMatrix& w_hat, Real tau1);

struct Propagated {
    RealMatrix sd_v;
    RealMatrix sd_a;
};

/// SD_a = eta_av (Mv fuse_a) + Ma,  SD_v = eta_va (Ma fuse_v) + Mv.
Propagated propagate(const RealMatrix& mv, const RealMatrix& ma, const RealMatrix& eta_va, const RealMatrix& eta_av,
                     const PspParams& p);

struct PspTrace {
    RealMatrix mv, ma;
    RealMatrix proj_v, proj_a;          ///< Mv Wv, Ma Wa
    Similarity omega;
    RealMatrix relu_va, relu_av;        ///< relu(omega)
    RealMatrix w_hat_va, w_hat_av;
    RealMatrix kept_va, kept_av;        ///< w_hat masked by the threshold
    RealMatrix eta_va, eta_av;
    RealMatrix prop_v, prop_a;          ///< Ma fuse_v, Mv fuse_a
};

/// Full PSP pass (similarity through propagation).
Propagated psp_forward(const RealMatrix& mv, const RealMatrix& ma, const PspParams& p, PspTrace* trace = nullptr);

struct PspInputGrads {
    RealMatrix mv;
    RealMatrix ma;
};

PspInputGrads psp_backward(const PspTrace& trace, const PspParams& p, const RealMatrix& g_sd_v,
                           const RealMatrix& g_sd_a, PspParams& grad);

/// Backward of row_l1_normalize for a nonnegative input x (rows at or below
/// the normalization floor pass the gradient through unchanged).
RealMatrix row_l1_normalize_backward(const RealMatrix& x, const RealMatrix& g);

// ---- classifier head ---------------------------------------------------------

/// Averages the two streams, then dense(ReLU) -> dense -> row softmax.
struct ClassifierHead {
    DenseParams hidden;
    DenseParams out;
};

ClassifierHead make_classifier(std::size_t d_l, std::size_t hidden, std::size_t classes, SeededRng& rng);
ClassifierHead zeros_like(const ClassifierHead& p);

struct ClassifierTrace {
    RealMatrix fused;
    RealMatrix hidden;
    RealMatrix probs;
};

/// T x C row-stochastic predictions.
RealMatrix classify(const RealMatrix& sd_v, const RealMatrix& sd_a, const ClassifierHead& head,
                    ClassifierTrace* trace = nullptr);
/// Single-stream variant used by the unimodal pipelines (fused = features).
RealMatrix classify_single(const RealMatrix& features, const ClassifierHead& head, ClassifierTrace* trace = nullptr);

/// Gradient with respect to the fused features given dL/dprobs.
RealMatrix classify_backward(const ClassifierTrace& trace, const ClassifierHead& head, const RealMatrix& g_probs,
                             ClassifierHead& grad);

}  // namespace pgsc
