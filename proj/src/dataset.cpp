// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#include "pgsc/dataset.hpp"

#include <algorithm>

#include "pgsc/tensor_io.hpp"

namespace pgsc {

void validate(const DatasetConfig& cfg) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigError, what); };
    if (cfg.classes < 2) fail("need at least two classes (events + background)");
    if (cfg.segments < 2) fail("need at least two segments");
    if (cfg.min_span < 1 || cfg.min_span > cfg.segments) fail("min_span must lie in [1, T]");
    if (cfg.train_samples > cfg.samples) fail("train_samples exceeds samples");
    if (cfg.audio_dim == 0 || cfg.visual_dim == 0 || cfg.locations == 0) fail("feature dims must be positive");
    if (cfg.jitter < 0.0 || cfg.latent_weight < 0.0 || cfg.separation < 0.0) fail("scales must be nonnegative");
}

Prototypes make_prototypes(const DatasetConfig& cfg, SeededRng& rng) {
    Prototypes p{sample_normal(rng, cfg.classes, cfg.audio_dim, cfg.separation),
                 sample_normal(rng, cfg.classes, cfg.visual_dim, cfg.separation)};
    if (cfg.cross_modal_ambiguity && cfg.classes >= 5) {
        std::copy(p.audio.row(1).begin(), p.audio.row(1).end(), p.audio.row(2).begin());
        std::copy(p.visual.row(3).begin(), p.visual.row(3).end(), p.visual.row(4).begin());
    }
    return p;
}

Sample make_sample(FeatureSequence audio, FeatureSequence visual, RealMatrix labels) {
    Sample s;
    s.presence.resize(labels.rows());
    s.classes.resize(labels.rows());
    for (std::size_t t = 0; t < labels.rows(); ++t) {
        const auto row = labels.row(t);
        s.classes[t] = static_cast<std::size_t>(std::distance(row.begin(), std::max_element(row.begin(), row.end())));
        s.presence[t] = s.classes[t] == 0 ? 0.0 : 1.0;
    }
    s.audio = std::move(audio);
    s.visual = std::move(visual);
    s.labels = std::move(labels);
    return s;
}

std::vector<Sample> synth_dataset(const DatasetConfig& cfg, const SeededRng& rng) {
    validate(cfg);
    SeededRng proto_rng = rng.split("prototypes");
    const Prototypes proto = make_prototypes(cfg, proto_rng);
    SeededRng mix_rng = rng.split("latent-maps");
    const RealMatrix latent_a = sample_normal(mix_rng, cfg.latent_dim, cfg.audio_dim, 1.0);
    const RealMatrix latent_v = sample_normal(mix_rng, cfg.latent_dim, cfg.visual_dim, 1.0);

    const std::size_t T = cfg.segments;
    const std::size_t k = cfg.locations;
    std::vector<Sample> out;
    out.reserve(cfg.samples);
    for (std::size_t n = 0; n < cfg.samples; ++n) {
        SeededRng r = rng.split(static_cast<std::uint64_t>(n));
        const std::size_t cls = 1 + static_cast<std::size_t>(r.uniform_int(cfg.classes - 1));
        const std::size_t span = cfg.min_span + static_cast<std::size_t>(r.uniform_int(T - cfg.min_span + 1));
        const std::size_t start = static_cast<std::size_t>(r.uniform_int(T - span + 1));
        const std::size_t where = static_cast<std::size_t>(r.uniform_int(k));
        const RealMatrix z = sample_normal(r, 1, cfg.latent_dim, 1.0);
        const RealMatrix shared_a = scale(matmul(z, latent_a), cfg.latent_weight * cfg.jitter);
        const RealMatrix shared_v = scale(matmul(z, latent_v), cfg.latent_weight * cfg.jitter);

        FeatureSequence audio{1, RealMatrix(T, cfg.audio_dim)};
        FeatureSequence visual{k, RealMatrix(T * k, cfg.visual_dim)};
        RealMatrix labels(T, cfg.classes);
        for (std::size_t t = 0; t < T; ++t) {
            const bool event = t >= start && t < start + span;
            const std::size_t c = event ? cls : 0;
            labels(t, c) = 1.0;
            auto a = audio.data.row(t);
            for (std::size_t j = 0; j < a.size(); ++j)
                a[j] = proto.audio(c, j) + cfg.jitter * r.normal() + (event ? shared_a(0, j) : 0.0);
            for (std::size_t loc = 0; loc < k; ++loc) {
                const bool carries = event && loc == where;
                const std::size_t vc = carries ? cls : 0;
                auto v = visual.data.row(t * k + loc);
                for (std::size_t j = 0; j < v.size(); ++j)
                    v[j] = proto.visual(vc, j) + cfg.jitter * r.normal() + (carries ? shared_v(0, j) : 0.0);
            }
        }
        out.push_back(make_sample(std::move(audio), std::move(visual), std::move(labels)));
    }
    return out;
}

void save_dataset(const std::filesystem::path& dir, const std::vector<Sample>& data) {
    if (data.empty()) throw Error(ErrorCode::ConfigError, "empty dataset");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());
    const auto n = static_cast<std::uint32_t>(data.size());
    const auto& s0 = data.front();
    const auto T = static_cast<std::uint32_t>(segment_count(s0));
    const auto da = static_cast<std::uint32_t>(s0.audio.dim());
    const auto k = static_cast<std::uint32_t>(s0.visual.locations);
    const auto dv = static_cast<std::uint32_t>(s0.visual.dim());
    const auto C = static_cast<std::uint32_t>(s0.labels.cols());
    std::vector<Real> a, v, y;
    for (const auto& s : data) {
        if (segment_count(s) != T || s.audio.dim() != da || s.visual.locations != k || s.visual.dim() != dv ||
            s.labels.cols() != C)
            throw Error(ErrorCode::ShapeMismatch, "dataset samples differ in shape");
        a.insert(a.end(), s.audio.data.data().begin(), s.audio.data.data().end());
        v.insert(v.end(), s.visual.data.data().begin(), s.visual.data.data().end());
        y.insert(y.end(), s.labels.data().begin(), s.labels.data().end());
    }
    const std::uint32_t da_dims[] = {n, T, da};
    const std::uint32_t dv_dims[] = {n, T, k, dv};
    const std::uint32_t dy_dims[] = {n, T, C};
    save_tensor(dir / "audio.pgsc", da_dims, a);
    save_tensor(dir / "visual.pgsc", dv_dims, v);
    save_tensor(dir / "labels.pgsc", dy_dims, y);
}

std::vector<Sample> load_dataset(const std::filesystem::path& dir) {
    const Tensor a = load_tensor(dir / "audio.pgsc");
    const Tensor v = load_tensor(dir / "visual.pgsc");
    const Tensor y = load_tensor(dir / "labels.pgsc");
    if (a.dims.size() != 3 || v.dims.size() != 4 || y.dims.size() != 3)
        throw Error(ErrorCode::FormatError, "expected audio N x T x d_a, visual N x T x k x d_v, labels N x T x C");
    const std::size_t n = a.dims[0], T = a.dims[1], da = a.dims[2];
    const std::size_t k = v.dims[2], dv = v.dims[3], C = y.dims[2];
    if (v.dims[0] != n || y.dims[0] != n || v.dims[1] != T || y.dims[1] != T)
        throw Error(ErrorCode::ShapeMismatch, "feature files disagree on N or T");
    std::vector<Sample> out;
    out.reserve(n);
    auto slice = [](const Tensor& t, std::size_t i, std::size_t rows, std::size_t cols) {
        RealMatrix m(rows, cols);
        const std::size_t off = i * rows * cols;
        for (std::size_t j = 0; j < rows * cols; ++j) m[j] = static_cast<Real>(t.values[off + j]);
        return m;
    };
    for (std::size_t i = 0; i < n; ++i) {
        RealMatrix labels = slice(y, i, T, C);
        for (std::size_t t = 0; t < T; ++t) {
            Real sum = 0.0;
            for (Real x : labels.row(t)) {
                if (x != 0.0 && x != 1.0) throw Error(ErrorCode::FormatError, "labels must be one-hot");
                sum += x;
            }
            if (sum != 1.0) throw Error(ErrorCode::FormatError, "labels must be one-hot");
        }
        out.push_back(make_sample(FeatureSequence{1, slice(a, i, T, da)}, FeatureSequence{k, slice(v, i, T * k, dv)},
                                  std::move(labels)));
    }
    return out;
}

}  // namespace pgsc
