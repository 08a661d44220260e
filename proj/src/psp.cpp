// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#include "pgsc/psp.hpp"

#include <cmath>

namespace pgsc {

namespace {

RealMatrix glorot(std::size_t in, std::size_t out, SeededRng& rng) {
    return sample_normal(rng, in, out, std::sqrt(2.0 / static_cast<Real>(in + out)));
}

void require_same(const RealMatrix& a, const RealMatrix& b, const char* what) {
    if (!a.same_shape(b)) throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": " + shape_of(a) + " vs " + shape_of(b));
}

RealMatrix mask_above(const RealMatrix& w, Real tau) {
    RealMatrix out = w;
    for (auto& v : out.data())
        if (!(v > tau)) v = 0.0;
    return out;
}

}  // namespace

PspParams make_psp(std::size_t d_l, std::size_t d_s, SeededRng& rng, Real tau1) {
    if (!(tau1 >= 0.0 && tau1 < 1.0)) throw Error(ErrorCode::ConfigError, "tau1 must lie in [0, 1)");
    PspParams p;
    p.sim_proj_v = glorot(d_l, d_s, rng);
    p.sim_proj_a = glorot(d_l, d_s, rng);
    p.fuse_a = glorot(d_l, d_l, rng);
    p.fuse_v = glorot(d_l, d_l, rng);
    p.tau1 = tau1;
    return p;
}

PspParams zeros_like(const PspParams& p) {
    return PspParams{RealMatrix(p.sim_proj_v.rows(), p.sim_proj_v.cols()),
                     RealMatrix(p.sim_proj_a.rows(), p.sim_proj_a.cols()), RealMatrix(p.fuse_a.rows(), p.fuse_a.cols()),
                     RealMatrix(p.fuse_v.rows(), p.fuse_v.cols()), p.tau1};
}

Similarity similarity(const RealMatrix& mv, const RealMatrix& ma, const PspParams& p) {
    require_same(mv, ma, "similarity inputs");
    const Real inv = 1.0 / std::sqrt(static_cast<Real>(mv.cols()));
    RealMatrix va = scale(matmul_nt(matmul(mv, p.sim_proj_v), matmul(ma, p.sim_proj_a)), inv);
    RealMatrix av = transpose(va);
    return Similarity{std::move(va), std::move(av)};
}

RealMatrix normalize_connections(const RealMatrix& omega) {
    return row_l1_normalize(elementwise(omega, Activation::Relu));
}

RealMatrix threshold_connections(const RealMatrix& w_hat, Real tau1) { return row_l1_normalize(mask_above(w_hat, tau1)); }

Propagated propagate(const RealMatrix& mv, const RealMatrix& ma, const RealMatrix& eta_va, const RealMatrix& eta_av,
                     const PspParams& p) {
    require_same(mv, ma, "propagation inputs");
    const std::size_t t = mv.rows();
    if (eta_va.rows() != t || eta_va.cols() != t || eta_av.rows() != t || eta_av.cols() != t)
        throw Error(ErrorCode::ShapeMismatch, "connection matrices must be T x T");
    return Propagated{add(matmul(eta_va, matmul(ma, p.fuse_v)), mv), add(matmul(eta_av, matmul(mv, p.fuse_a)), ma)};
}

Propagated psp_forward(const RealMatrix& mv, const RealMatrix& ma, const PspParams& p, PspTrace* trace) {
    require_same(mv, ma, "PSP inputs");
    PspTrace tr;
    tr.mv = mv;
    tr.ma = ma;
    tr.proj_v = matmul(mv, p.sim_proj_v);
    tr.proj_a = matmul(ma, p.sim_proj_a);
    const Real inv = 1.0 / std::sqrt(static_cast<Real>(mv.cols()));
    tr.omega.va = scale(matmul_nt(tr.proj_v, tr.proj_a), inv);
    tr.omega.av = transpose(tr.omega.va);
    tr.relu_va = elementwise(tr.omega.va, Activation::Relu);
    tr.relu_av = elementwise(tr.omega.av, Activation::Relu);
    tr.w_hat_va = row_l1_normalize(tr.relu_va);
    tr.w_hat_av = row_l1_normalize(tr.relu_av);
    tr.kept_va = mask_above(tr.w_hat_va, p.tau1);
    tr.kept_av = mask_above(tr.w_hat_av, p.tau1);
    tr.eta_va = row_l1_normalize(tr.kept_va);
    tr.eta_av = row_l1_normalize(tr.kept_av);
    tr.prop_v = matmul(ma, p.fuse_v);
    tr.prop_a = matmul(mv, p.fuse_a);
    Propagated out{add(matmul(tr.eta_va, tr.prop_v), mv), add(matmul(tr.eta_av, tr.prop_a), ma)};
    if (trace) *trace = std::move(tr);
    return out;
}

RealMatrix row_l1_normalize_backward(const RealMatrix& x, const RealMatrix& g) {
    RealMatrix out = g;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        Real s = 0.0, gx = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) {
            s += x(r, c);
            gx += g(r, c) * x(r, c);
        }
        if (!(s > kNormalizeEpsilon)) continue;
        for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = (g(r, c) - gx / s) / s;
    }
    return out;
}

PspInputGrads psp_backward(const PspTrace& tr, const PspParams& p, const RealMatrix& g_sd_v, const RealMatrix& g_sd_a,
                           PspParams& grad) {
    PspInputGrads in{g_sd_v, g_sd_a};

    // Propagation branch.
    const RealMatrix g_eta_va = matmul_nt(g_sd_v, tr.prop_v);
    const RealMatrix g_prop_v = matmul_tn(tr.eta_va, g_sd_v);
    add_inplace(grad.fuse_v, matmul_tn(tr.ma, g_prop_v));
    add_inplace(in.ma, matmul_nt(g_prop_v, p.fuse_v));

    const RealMatrix g_eta_av = matmul_nt(g_sd_a, tr.prop_a);
    const RealMatrix g_prop_a = matmul_tn(tr.eta_av, g_sd_a);
    add_inplace(grad.fuse_a, matmul_tn(tr.mv, g_prop_a));
    add_inplace(in.mv, matmul_nt(g_prop_a, p.fuse_a));

    // Threshold + normalizations back to omega.
    auto back_to_omega = [&](const RealMatrix& g_eta, const RealMatrix& kept, const RealMatrix& w_hat,
                             const RealMatrix& relu_out) {
        RealMatrix g_kept = row_l1_normalize_backward(kept, g_eta);
        for (std::size_t i = 0; i < g_kept.size(); ++i)
            if (!(w_hat[i] > p.tau1)) g_kept[i] = 0.0;
        RealMatrix g_relu = row_l1_normalize_backward(relu_out, g_kept);
        relu_backward_inplace(relu_out, g_relu);
        return g_relu;
    };
    RealMatrix g_omega = back_to_omega(g_eta_va, tr.kept_va, tr.w_hat_va, tr.relu_va);
    add_inplace(g_omega, transpose(back_to_omega(g_eta_av, tr.kept_av, tr.w_hat_av, tr.relu_av)));

    const Real inv = 1.0 / std::sqrt(static_cast<Real>(tr.mv.cols()));
    const RealMatrix g_proj_v = scale(matmul(g_omega, tr.proj_a), inv);
    const RealMatrix g_proj_a = scale(matmul_tn(g_omega, tr.proj_v), inv);
    add_inplace(grad.sim_proj_v, matmul_tn(tr.mv, g_proj_v));
    add_inplace(grad.sim_proj_a, matmul_tn(tr.ma, g_proj_a));
    add_inplace(in.mv, matmul_nt(g_proj_v, p.sim_proj_v));
    add_inplace(in.ma, matmul_nt(g_proj_a, p.sim_proj_a));
    return in;
}

// ---- classifier head -----------------------------------------------------------

ClassifierHead make_classifier(std::size_t d_l, std::size_t hidden, std::size_t classes, SeededRng& rng) {
    return ClassifierHead{make_dense(d_l, hidden, rng), make_dense(hidden, classes, rng)};
}

ClassifierHead zeros_like(const ClassifierHead& p) { return ClassifierHead{zeros_like(p.hidden), zeros_like(p.out)}; }

RealMatrix classify_single(const RealMatrix& features, const ClassifierHead& head, ClassifierTrace* trace) {
    RealMatrix hidden = dense_forward(features, head.hidden);
    relu_inplace(hidden);
    RealMatrix probs = elementwise(dense_forward(hidden, head.out), Activation::SoftmaxRow);
    if (trace) *trace = ClassifierTrace{features, std::move(hidden), probs};
    return probs;
}

RealMatrix classify(const RealMatrix& sd_v, const RealMatrix& sd_a, const ClassifierHead& head,
                    ClassifierTrace* trace) {
    require_same(sd_v, sd_a, "classifier inputs");
    RealMatrix fused = add(sd_v, sd_a);
    for (auto& v : fused.data()) v *= 0.5;
    return classify_single(fused, head, trace);
}

RealMatrix classify_backward(const ClassifierTrace& tr, const ClassifierHead& head, const RealMatrix& g_probs,
                             ClassifierHead& grad) {
    RealMatrix g_logits(tr.probs.rows(), tr.probs.cols());
    for (std::size_t r = 0; r < tr.probs.rows(); ++r) {
        Real dot = 0.0;
        for (std::size_t c = 0; c < tr.probs.cols(); ++c) dot += g_probs(r, c) * tr.probs(r, c);
        for (std::size_t c = 0; c < tr.probs.cols(); ++c) g_logits(r, c) = tr.probs(r, c) * (g_probs(r, c) - dot);
    }
    RealMatrix g_hidden = dense_backward(tr.hidden, head.out, g_logits, grad.out);
    relu_backward_inplace(tr.hidden, g_hidden);
    return dense_backward(tr.fused, head.hidden, g_hidden, grad.hidden);
}

}  // namespace pgsc
