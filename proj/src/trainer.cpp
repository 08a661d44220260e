// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#include "pgsc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "pgsc/tensor_io.hpp"

namespace pgsc {

namespace {

struct TensorRef {
    std::string_view name;
    ParamGroup group;
    RealMatrix* m;
};

std::vector<TensorRef> collect(ModelParams& p) {
    std::vector<TensorRef> out;
    for_each_param(p, [&](std::string_view name, ParamGroup g, RealMatrix& m) { out.push_back({name, g, &m}); });
    return out;
}

std::vector<const RealMatrix*> collect(const ModelParams& p) {
    std::vector<const RealMatrix*> out;
    for_each_param(p, [&](std::string_view, ParamGroup, const RealMatrix& m) { out.push_back(&m); });
    return out;
}

Real norm2(std::span<const Real> v) {
    Real s = 0.0;
    for (Real x : v) s += x * x;
    return std::sqrt(s);
}

Real norm1(std::span<const Real> v) {
    Real s = 0.0;
    for (Real x : v) s += std::abs(x);
    return s;
}

}  // namespace

// ---- losses --------------------------------------------------------------------

Real ce_loss(const RealMatrix& x, const RealMatrix& y) {
    if (!x.same_shape(y)) throw Error(ErrorCode::ShapeMismatch, "ce_loss: " + shape_of(x) + " vs " + shape_of(y));
    Real s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (y[i] != 0.0) s += y[i] * std::log(std::clamp(x[i], kProbabilityFloor, 1.0));
    return -s / static_cast<Real>(x.size());
}

RealMatrix ce_loss_grad(const RealMatrix& x, const RealMatrix& y) {
    if (!x.same_shape(y)) throw Error(ErrorCode::ShapeMismatch, "ce_loss_grad: " + shape_of(x) + " vs " + shape_of(y));
    RealMatrix g(x.rows(), x.cols());
    const Real inv = 1.0 / static_cast<Real>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        if (y[i] != 0.0 && x[i] > kProbabilityFloor && x[i] <= 1.0) g[i] = -y[i] * inv / x[i];
    return g;
}

// Cosine similarity is invariant to a positive rescaling of either argument,
// so the l1 normalization only matters for detecting zero vectors.
AvsLoss avs_loss(const RealMatrix& sd_v, const RealMatrix& sd_a, std::span<const Real> g) {
    if (!sd_v.same_shape(sd_a) || g.size() != sd_v.rows())
        throw Error(ErrorCode::ShapeMismatch, "avs_loss: inconsistent shapes");
    AvsLoss out;
    Real s = 0.0;
    for (std::size_t t = 0; t < sd_v.rows(); ++t) {
        const auto v = sd_v.row(t);
        const auto a = sd_a.row(t);
        if (!(norm1(v) > 0.0) || !(norm1(a) > 0.0)) {
            ++out.skipped;
            continue;
        }
        const Real cos = std::inner_product(v.begin(), v.end(), a.begin(), 0.0) / (norm2(v) * norm2(a));
        s += (cos - g[t]) * (cos - g[t]);
        ++out.used;
    }
    out.value = out.used ? s / static_cast<Real>(out.used) : 0.0;
    return out;
}

void avs_loss_grad(const RealMatrix& sd_v, const RealMatrix& sd_a, std::span<const Real> g, Real scale,
                   RealMatrix& g_v, RealMatrix& g_a) {
    const AvsLoss info = avs_loss(sd_v, sd_a, g);
    if (info.used == 0) return;
    for (std::size_t t = 0; t < sd_v.rows(); ++t) {
        const auto v = sd_v.row(t);
        const auto a = sd_a.row(t);
        if (!(norm1(v) > 0.0) || !(norm1(a) > 0.0)) continue;
        const Real nv = norm2(v), na = norm2(a);
        const Real cos = std::inner_product(v.begin(), v.end(), a.begin(), 0.0) / (nv * na);
        const Real d = scale * 2.0 * (cos - g[t]) / static_cast<Real>(info.used);
        auto gv = g_v.row(t);
        auto ga = g_a.row(t);
        for (std::size_t j = 0; j < v.size(); ++j) {
            gv[j] += d * (a[j] / (nv * na) - cos * v[j] / (nv * nv));
            ga[j] += d * (v[j] / (nv * na) - cos * a[j] / (na * na));
        }
    }
}

Real total_loss(Real cls, Real avs, Real beta) noexcept { return cls + beta * avs; }

// ---- optimizer -----------------------------------------------------------------

std::string_view to_string(OptimizerKind k) noexcept {
    switch (k) {
        case OptimizerKind::Sgd: return "sgd";
        case OptimizerKind::Momentum: return "momentum";
        case OptimizerKind::Adam: return "adam";
    }
    return "unknown";
}

std::optional<OptimizerKind> parse_optimizer(std::string_view s) {
    if (s == "sgd") return OptimizerKind::Sgd;
    if (s == "momentum") return OptimizerKind::Momentum;
    if (s == "adam") return OptimizerKind::Adam;
    return std::nullopt;
}

OptimizerState::OptimizerState(const OptimizerConfig& c, const ModelParams& like)
    : cfg(c), step_size(c.step_size), first(zeros_like(like)), second(zeros_like(like)) {
    if (!(step_size > 0.0)) throw Error(ErrorCode::ConfigError, "step size must be positive");
}

void OptimizerState::end_epoch() {
    ++epoch;
    if (cfg.decay_every && epoch % cfg.decay_every == 0) step_size *= cfg.decay_factor;
}

GroupMask all_groups() noexcept {
    GroupMask m;
    m.fill(true);
    return m;
}

GroupMask receiver_groups() noexcept {
    GroupMask m;
    for (std::size_t i = 0; i < kParamGroupCount; ++i) m[i] = !is_transmitter(static_cast<ParamGroup>(i));
    return m;
}

void step(ModelParams& p, const ModelParams& g, OptimizerState& opt, const GroupMask& mask) {
    auto params = collect(p);
    auto grads = collect(g);
    auto m1 = collect(opt.first);
    auto m2 = collect(opt.second);
    ++opt.updates;
    const Real lr = opt.step_size;
    const auto& c = opt.cfg;
    const Real bc1 = 1.0 - std::pow(c.adam_beta1, static_cast<Real>(opt.updates));
    const Real bc2 = 1.0 - std::pow(c.adam_beta2, static_cast<Real>(opt.updates));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!mask[static_cast<std::size_t>(params[i].group)]) continue;
        auto w = params[i].m->data();
        auto gr = grads[i]->data();
        auto a = m1[i].m->data();
        auto b = m2[i].m->data();
        for (std::size_t j = 0; j < w.size(); ++j) {
            switch (c.kind) {
                case OptimizerKind::Sgd: w[j] -= lr * gr[j]; break;
                case OptimizerKind::Momentum:
                    a[j] = c.momentum * a[j] + gr[j];
                    w[j] -= lr * a[j];
                    break;
                case OptimizerKind::Adam:
                    a[j] = c.adam_beta1 * a[j] + (1.0 - c.adam_beta1) * gr[j];
                    b[j] = c.adam_beta2 * b[j] + (1.0 - c.adam_beta2) * gr[j] * gr[j];
                    w[j] -= lr * (a[j] / bc1) / (std::sqrt(b[j] / bc2) + c.adam_eps);
                    break;
            }
        }
    }
}

// ---- channel environment -------------------------------------------------------

FrameLinks draw_frame_links(const Pipeline& pipe, const ChannelEnv& env, Real snr_db, std::size_t segments,
                            SeededRng& rng) {
    if (env.bypass)
        return FrameLinks{bypass_link(1, pipe.siso_length(segments)),
                          bypass_link(pipe.users(), pipe.mimo_length(segments))};
    LinkSpec mimo{env.model, 2, pipe.users(), pipe.mimo_length(segments), snr_db, env.csi, env.pilot, 1.0};
    LinkSpec siso{env.model, 1, 1, pipe.siso_length(segments), snr_db, env.csi, env.pilot, 1.0};
    FrameLinks out;
    out.mimo = draw_link(mimo, rng);
    out.siso = draw_link(siso, rng);
    return out;
}

// ---- loss + gradient -----------------------------------------------------------

namespace {

LossReport loss_of(const Pipeline& pipe, const ForwardOutput& out, const Sample& s, Real beta) {
    LossReport r;
    r.beta = beta;
    r.cls = ce_loss(out.probs, s.labels);
    const bool multimodal = pipe.mode() == Mode::Multimodal;
    if (multimodal) {
        const AvsLoss a = avs_loss(out.sd_v, out.sd_a, s.presence);
        r.avs = a.value;
        r.skipped_segments = a.skipped;
    }
    r.total = total_loss(r.cls, r.avs, beta);
    return r;
}

}  // namespace

LossReport sample_loss(Pipeline& pipe, const ModelParams& p, const Sample& s, const FrameLinks& links, Real beta,
                       ModelParams* grad, Real weight) {
    const ForwardOutput out = pipe.forward(p, s, links, grad != nullptr);
    const LossReport r = loss_of(pipe, out, s, beta);
    if (!grad) return r;
    const bool multimodal = pipe.mode() == Mode::Multimodal;

    const RealMatrix g_probs = scale(ce_loss_grad(out.probs, s.labels), weight);
    RealMatrix g_v, g_a;
    if (multimodal && beta != 0.0) {
        g_v = RealMatrix(out.sd_v.rows(), out.sd_v.cols());
        g_a = RealMatrix(out.sd_a.rows(), out.sd_a.cols());
        avs_loss_grad(out.sd_v, out.sd_a, s.presence, beta * weight, g_v, g_a);
    }
    pipe.backward(p, links, g_probs, g_v, g_a, *grad);
    return r;
}

GradCheckReport gradcheck(Pipeline& pipe, const ModelParams& p, const Sample& s, const FrameLinks& links, Real beta,
                          Real h, Real threshold, std::size_t max_per_tensor) {
    ModelParams analytic = zeros_like(p);
    sample_loss(pipe, p, s, links, beta, &analytic);
    const auto grads = collect(static_cast<const ModelParams&>(analytic));

    pipe.forward(p, s, links, true);
    const std::uint64_t base_sig = pipe.branch_signature();

    ModelParams q = p;
    auto refs = collect(q);
    GradCheckReport rep;
    rep.threshold = threshold;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        GradCheckEntry e{std::string(refs[i].name), refs[i].group, 0.0, 0, 0};
        auto w = refs[i].m->data();
        const std::size_t stride = (max_per_tensor && w.size() > max_per_tensor) ? w.size() / max_per_tensor : 1;
        for (std::size_t j = 0; j < w.size(); j += stride) {
            const Real orig = w[j];
            // Shrink the step while the stencil straddles a ReLU or threshold
            // decision; central differences are meaningless across a branch.
            Real step_h = h;
            std::optional<Real> fd;
            auto central = [&](Real step, bool& same) {
                w[j] = orig + step;
                const Real up = loss_of(pipe, pipe.forward(q, s, links, true), s, beta).total;
                same = pipe.branch_signature() == base_sig;
                w[j] = orig - step;
                const Real down = loss_of(pipe, pipe.forward(q, s, links, true), s, beta).total;
                same = same && pipe.branch_signature() == base_sig;
                return (up - down) / (2.0 * step);
            };
            for (int attempt = 0; attempt < 3 && !fd; ++attempt, step_h *= 0.1) {
                bool same_fine = false, same_coarse = false;
                const Real d_fine = central(step_h, same_fine);
                const Real d_coarse = central(2.0 * step_h, same_coarse);
                // Richardson extrapolation cancels the h^2 truncation term.
                if (same_fine && same_coarse) fd = (4.0 * d_fine - d_coarse) / 3.0;
            }
            w[j] = orig;
            if (!fd) {
                ++e.skipped;
                continue;
            }
            const Real ga = grads[i]->data()[j];
            const Real rel = std::abs(ga - *fd) / std::max({std::abs(ga), std::abs(*fd), 1e-8});
            e.max_rel_error = std::max(e.max_rel_error, rel);
            ++e.checked;
        }
        auto& gm = rep.group_max[static_cast<std::size_t>(e.group)];
        gm = std::max(gm, e.max_rel_error);
        rep.entries.push_back(std::move(e));
    }
    rep.passed = std::all_of(rep.entries.begin(), rep.entries.end(),
                             [&](const GradCheckEntry& e) { return e.max_rel_error <= threshold; });
    return rep;
}

// ---- training ------------------------------------------------------------------

std::vector<EpochLog> train(Pipeline& pipe, ModelParams& p, std::span<const Sample> data, const TrainConfig& cfg,
                            SeededRng& rng, const EpochCallback& on_epoch) {
    if (cfg.snr_grid.empty()) throw Error(ErrorCode::ConfigError, "training SNR grid is empty");
    if (cfg.batch_size == 0) throw Error(ErrorCode::ConfigError, "batch size must be positive");
    OptimizerState opt(cfg.optimizer, p);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<EpochLog> history;
    history.reserve(cfg.epochs);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_int(i)]);
        EpochLog log;
        log.epoch = epoch;
        log.step_size = opt.step_size;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            const Real snr = cfg.snr_grid[rng.uniform_int(cfg.snr_grid.size())];
            const Real weight = 1.0 / static_cast<Real>(stop - start);
            ModelParams grad = zeros_like(p);
            for (std::size_t b = start; b < stop; ++b) {
                const Sample& s = data[order[b]];
                const FrameLinks links = draw_frame_links(pipe, cfg.env, snr, segment_count(s), rng);
                try {
                    const LossReport r = sample_loss(pipe, p, s, links, cfg.beta, &grad, weight);
                    log.mean_loss += r.total;
                    log.mean_cls += r.cls;
                    ++seen;
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::IllConditioned) throw;
                    ++log.skipped_frames;
                }
            }
            step(p, grad, opt, cfg.trainable);
        }
        if (seen) {
            log.mean_loss /= static_cast<Real>(seen);
            log.mean_cls /= static_cast<Real>(seen);
        }
        if (!std::isfinite(log.mean_loss)) throw Error(ErrorCode::NonFinite, "training loss diverged");
        bool finite = true;
        for_each_param(static_cast<const ModelParams&>(p), [&](const char*, ParamGroup, const RealMatrix& m) {
            for (Real v : m.data()) finite = finite && std::isfinite(v);
        });
        if (!finite) throw Error(ErrorCode::NonFinite, "parameters diverged");
        opt.end_epoch();
        history.push_back(log);
        if (on_epoch) on_epoch(log);
    }
    return history;
}

std::size_t argmax_row(std::span<const Real> row) noexcept {
    return static_cast<std::size_t>(std::distance(row.begin(), std::max_element(row.begin(), row.end())));
}

EvalResult evaluate(Pipeline& pipe, const ModelParams& p, std::span<const Sample> data, const ChannelEnv& env,
                    Real snr_db, const SeededRng& rng) {
    EvalResult r;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Sample& s = data[i];
        const std::size_t segments = segment_count(s);
        SeededRng stream = rng.split(static_cast<std::uint64_t>(i));
        const FrameLinks links = draw_frame_links(pipe, env, snr_db, segments, stream);
        r.total += segments;
        try {
            const ForwardOutput out = pipe.forward(p, s, links);
            for (std::size_t t = 0; t < segments; ++t)
                if (argmax_row(out.probs.row(t)) == argmax_row(s.labels.row(t))) ++r.correct;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::IllConditioned) throw;
            ++r.erasures;
        }
    }
    r.accuracy = r.total ? static_cast<Real>(r.correct) / static_cast<Real>(r.total) : 0.0;
    return r;
}

// ---- checkpoints ---------------------------------------------------------------

void save_checkpoint(const std::filesystem::path& path, const ModelParams& p) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    std::ostringstream manifest;
    std::size_t offset = 0;
    for_each_param(p, [&](std::string_view name, ParamGroup, const RealMatrix& m) {
        const std::uint32_t dims[2] = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
        write_tensor(os, dims, m.data());
        manifest << name << ' ' << m.rows() << ' ' << m.cols() << ' ' << offset << '\n';
        offset += tensor_record_size(dims);
    });
    if (!os) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());

    const std::filesystem::path mpath = path.string() + ".manifest";
    std::ofstream ms(mpath, std::ios::trunc);
    ms << manifest.str();
    if (!ms) throw Error(ErrorCode::IoFailure, "write failed: " + mpath.string());
}

void load_checkpoint(const std::filesystem::path& path, ModelParams& p) {
    struct Entry {
        std::size_t rows, cols, offset;
    };
    const std::filesystem::path mpath = path.string() + ".manifest";
    std::ifstream ms(mpath);
    if (!ms) throw Error(ErrorCode::IoFailure, "cannot open " + mpath.string());
    std::map<std::string, Entry, std::less<>> index;
    std::string line;
    while (std::getline(ms, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string name;
        Entry e{};
        if (!(ls >> name >> e.rows >> e.cols >> e.offset))
            throw Error(ErrorCode::FormatError, "bad checkpoint manifest line: " + line);
        index[name] = e;
    }

    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    for_each_param(p, [&](std::string_view name, ParamGroup, RealMatrix& m) {
        const auto it = index.find(name);
        if (it == index.end()) throw Error(ErrorCode::FormatError, "checkpoint lacks " + std::string(name));
        const Entry& e = it->second;
        if (e.rows != m.rows() || e.cols != m.cols())
            throw Error(ErrorCode::ShapeMismatch, "checkpoint shape differs for " + std::string(name));
        is.seekg(static_cast<std::streamoff>(e.offset));
        m = to_matrix(read_tensor(is), e.rows, e.cols);
    });
}

}  // namespace pgsc
