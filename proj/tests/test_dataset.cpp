// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "pgsc/dataset.hpp"
#include "pgsc/tensor_io.hpp"
#include "test_support.hpp"

using namespace pgsc;

TEST(Synth, SpansAndLabels) {
    DatasetConfig cfg;
    cfg.samples = 300;
    cfg.train_samples = 200;
    const auto data = synth_dataset(cfg, SeededRng(101));
    ASSERT_EQ(data.size(), 300u);
    for (const Sample& s : data) {
        ASSERT_EQ(s.labels.rows(), 10u);
        std::size_t first = 10, last = 0, span = 0, event_class = 0;
        for (std::size_t t = 0; t < 10; ++t) {
            Real sum = 0.0;
            for (Real v : s.labels.row(t)) {
                EXPECT_TRUE(v == 0.0 || v == 1.0);
                sum += v;
            }
            EXPECT_EQ(sum, 1.0);
            if (s.classes[t] != 0) {
                if (event_class == 0) event_class = s.classes[t];
                EXPECT_EQ(s.classes[t], event_class);
                first = std::min(first, t);
                last = t;
                ++span;
            }
            EXPECT_EQ(s.presence[t], s.classes[t] == 0 ? 0.0 : 1.0);
        }
        EXPECT_GE(span, 2u);
        EXPECT_LE(span, 10u);
        EXPECT_EQ(last - first + 1, span);  // contiguous
    }
}

TEST(Synth, ZeroJitterReproducesPrototypes) {
    DatasetConfig cfg;
    cfg.samples = 20;
    cfg.train_samples = 10;
    cfg.jitter = 0.0;
    const SeededRng root(102);
    const auto data = synth_dataset(cfg, root);
    SeededRng proto_rng = root.split("prototypes");
    const Prototypes proto = make_prototypes(cfg, proto_rng);
    for (const Sample& s : data) {
        for (std::size_t t = 0; t < cfg.segments; ++t) {
            const std::size_t c = s.classes[t];
            for (std::size_t j = 0; j < cfg.audio_dim; ++j) EXPECT_EQ(s.audio.data(t, j), proto.audio(c, j));
            std::size_t carriers = 0;
            for (std::size_t loc = 0; loc < cfg.locations; ++loc) {
                const auto row = s.visual.data.row(t * cfg.locations + loc);
                const bool is_event = c != 0 && row[0] == proto.visual(c, 0);
                const std::size_t vc = is_event ? c : 0;
                carriers += is_event;
                for (std::size_t j = 0; j < cfg.visual_dim; ++j) EXPECT_EQ(row[j], proto.visual(vc, j));
            }
            EXPECT_EQ(carriers, c == 0 ? 0u : 1u);
        }
    }
}

TEST(Synth, CrossModalAmbiguity) {
    DatasetConfig cfg;
    SeededRng rng(103);
    const Prototypes p = make_prototypes(cfg, rng);
    for (std::size_t j = 0; j < cfg.audio_dim; ++j) EXPECT_EQ(p.audio(1, j), p.audio(2, j));
    for (std::size_t j = 0; j < cfg.visual_dim; ++j) EXPECT_EQ(p.visual(3, j), p.visual(4, j));
    EXPECT_NE(p.visual(1, 0), p.visual(2, 0));
    EXPECT_NE(p.audio(3, 0), p.audio(4, 0));
}

TEST(Synth, Deterministic) {
    const auto a = synth_dataset(fixture::tiny_dataset(), SeededRng(104));
    const auto b = synth_dataset(fixture::tiny_dataset(), SeededRng(104));
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].audio.data, b[i].audio.data);
        EXPECT_EQ(a[i].visual.data, b[i].visual.data);
        EXPECT_EQ(a[i].labels, b[i].labels);
    }
}

TEST(Synth, InvalidConfig) {
    DatasetConfig cfg;
    cfg.classes = 1;
    EXPECT_THROW(synth_dataset(cfg, SeededRng(1)), Error);
    cfg = DatasetConfig{};
    cfg.min_span = 11;
    EXPECT_THROW(synth_dataset(cfg, SeededRng(1)), Error);
    cfg = DatasetConfig{};
    cfg.segments = 1;
    cfg.min_span = 1;
    EXPECT_THROW(synth_dataset(cfg, SeededRng(1)), Error);
}

TEST(DatasetFiles, RoundTrip) {
    fixture::ScratchDir dir("dataset");
    const auto data = synth_dataset(fixture::tiny_dataset(), SeededRng(105));
    save_dataset(dir.path(), data);
    const auto back = load_dataset(dir.path());
    ASSERT_EQ(back.size(), data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        EXPECT_EQ(back[i].labels, data[i].labels);
        EXPECT_EQ(back[i].visual.locations, data[i].visual.locations);
        for (std::size_t j = 0; j < data[i].audio.data.size(); ++j)
            EXPECT_EQ(back[i].audio.data[j], static_cast<Real>(static_cast<float>(data[i].audio.data[j])));
        for (std::size_t j = 0; j < data[i].visual.data.size(); ++j)
            EXPECT_EQ(back[i].visual.data[j], static_cast<Real>(static_cast<float>(data[i].visual.data[j])));
    }
}

TEST(DatasetFiles, RejectsNonOneHotLabels) {
    fixture::ScratchDir dir("dataset_bad");
    const auto data = synth_dataset(fixture::tiny_dataset(), SeededRng(106));
    save_dataset(dir.path(), data);
    const std::vector<std::uint32_t> dims{static_cast<std::uint32_t>(data.size()), 4, 5};
    std::vector<Real> labels(data.size() * 4 * 5, 0.5);
    save_tensor(dir.path() / "labels.pgsc", dims, labels);
    try {
        load_dataset(dir.path());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::FormatError);
    }
}

TEST(DatasetFiles, MissingDirectory) {
    try {
        load_dataset("/nonexistent/pgsc/dataset");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::IoFailure);
    }
}

// ---- tensor files ----------------------------------------------------------------

TEST(TensorIo, RoundTripAndLayout) {
    std::stringstream ss;
    const std::vector<std::uint32_t> dims{2, 3};
    const std::vector<Real> values{1, 2, 3, 4, 5, 6.5};
    write_tensor(ss, dims, values);
    const std::string bytes = ss.str();
    EXPECT_EQ(bytes.size(), tensor_record_size(dims));
    EXPECT_EQ(bytes.size(), 4u + 4u + 4u + 2u * 4u + 6u * 4u);
    EXPECT_EQ(bytes.substr(0, 4), "PGSC");
    EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1u);  // version, little-endian
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 2u);  // ndims
    const Tensor t = read_tensor(ss);
    EXPECT_EQ(t.dims, dims);
    EXPECT_EQ(t.element_count(), 6u);
    EXPECT_EQ(t.values[5], 6.5f);
    EXPECT_EQ(to_matrix(t, 2, 3)(1, 2), 6.5);
    EXPECT_THROW(to_matrix(t, 3, 3), Error);
}

TEST(TensorIo, BadMagic) {
    std::stringstream ss("PGSX\x01\0\0\0");
    try {
        read_tensor(ss);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::FormatError);
    }
}

TEST(TensorIo, Truncated) {
    std::stringstream full;
    const std::vector<std::uint32_t> dims{4};
    const std::vector<Real> values{1, 2, 3, 4};
    write_tensor(full, dims, values);
    std::stringstream cut(full.str().substr(0, 20));
    EXPECT_THROW(read_tensor(cut), Error);
}

TEST(TensorIo, LengthMismatch) {
    std::stringstream ss;
    const std::vector<std::uint32_t> dims{3};
    const std::vector<Real> values{1, 2};
    EXPECT_THROW(write_tensor(ss, dims, values), Error);
}
