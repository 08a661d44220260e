// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "pgsc/experiment.hpp"
#include "test_support.hpp"

using namespace pgsc;

namespace {

ExperimentConfig quick_config() {
    ExperimentConfig cfg;
    cfg.dataset.samples = 12;
    cfg.dataset.train_samples = 8;
    cfg.dataset.segments = 4;
    cfg.epochs = 1;
    cfg.batch_size = 4;
    cfg.seeds = {3, 4};
    return cfg;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::DimensionMismatch;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Config, Settings) {
    ExperimentConfig cfg;
    apply_setting(cfg, "channel", "rayleigh, rician");
    apply_setting(cfg, "snr_list", "0,15,30");
    apply_setting(cfg, "seeds", "7");
    apply_setting(cfg, "mode", "audio,video,multimodal");
    apply_setting(cfg, "csi", "perfect,pilot,none");
    apply_setting(cfg, "tau1", "0.2");
    apply_setting(cfg, "optimizer", "sgd");
    EXPECT_EQ(cfg.channels, (std::vector<ChannelKind>{ChannelKind::Rayleigh, ChannelKind::Rician}));
    EXPECT_EQ(cfg.snr_list, (std::vector<Real>{0, 15, 30}));
    EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{7}));
    EXPECT_EQ(cfg.modes.size(), 3u);
    EXPECT_EQ(cfg.csis.size(), 3u);
    EXPECT_DOUBLE_EQ(cfg.dims.tau1, 0.2);
    EXPECT_EQ(cfg.optimizer.kind, OptimizerKind::Sgd);
}

TEST(Config, Errors) {
    ExperimentConfig cfg;
    EXPECT_EQ(code_of([&] { apply_setting(cfg, "colour", "red"); }), ErrorCode::ConfigError);
    EXPECT_EQ(code_of([&] { apply_setting(cfg, "channel", "fading"); }), ErrorCode::ConfigError);
    EXPECT_EQ(code_of([&] { apply_setting(cfg, "epochs", "ten"); }), ErrorCode::ConfigError);
    EXPECT_EQ(code_of([&] {
                  apply_setting(cfg, "snr_list", "");
                  validate(cfg);
              }),
              ErrorCode::ConfigError);
    EXPECT_EQ(code_of([&] { load_config_file(cfg, "/nonexistent/pgsc.cfg"); }), ErrorCode::IoFailure);
    ExperimentConfig bad;
    bad.dataset.segments = 1;
    bad.dataset.min_span = 1;
    EXPECT_EQ(code_of([&] { validate(bad); }), ErrorCode::ConfigError);
    bad = ExperimentConfig{};
    bad.dims.classes = 1;
    EXPECT_EQ(code_of([&] { validate(bad); }), ErrorCode::ConfigError);
}

TEST(Config, FileWithComments) {
    fixture::ScratchDir dir("config");
    const auto path = dir.path() / "run.cfg";
    std::ofstream(path) << "# sweep\nchannel = awgn\n\nsnr_list=0,30  # two points\nepochs=3\n";
    ExperimentConfig cfg;
    load_config_file(cfg, path);
    EXPECT_EQ(cfg.channels, std::vector<ChannelKind>{ChannelKind::Awgn});
    EXPECT_EQ(cfg.snr_list, (std::vector<Real>{0, 30}));
    EXPECT_EQ(cfg.epochs, 3u);
    std::ofstream(path) << "no equals sign here\n";
    EXPECT_EQ(code_of([&] { load_config_file(cfg, path); }), ErrorCode::ConfigError);
}

TEST(Config, SettingsRoundTrip) {
    ExperimentConfig cfg = quick_config();
    cfg.rician_k = 2.5;
    cfg.csis = {CsiMode::Perfect, CsiMode::None};
    cfg.dims.cell = CellKind::Lstm;
    validate(cfg);
    const auto settings = config_settings(cfg);
    ExperimentConfig back;
    for (const auto& [k, v] : settings) apply_setting(back, k, v);
    validate(back);
    EXPECT_EQ(config_settings(back), settings);
}

TEST(Csv, HeaderSortAndRoundTrip) {
    std::vector<MetricsRow> rows{
        {ChannelKind::Rician, 3, 1, Mode::Multimodal, CsiMode::Pilot, 0.5, 0},
        {ChannelKind::Awgn, 30, 2, Mode::AudioOnly, CsiMode::None, 0.123456789, 3},
        {ChannelKind::Awgn, 0, 2, Mode::Multimodal, CsiMode::Perfect, 1.0, 0},
    };
    const std::string csv = format_csv(rows);
    std::istringstream lines(csv);
    std::string header, first;
    std::getline(lines, header);
    std::getline(lines, first);
    EXPECT_EQ(header, "channel,snr_db,seed,mode,csi,segment_accuracy,frame_erasures");
    EXPECT_EQ(first, "awgn,0,2,multimodal,perfect,1,0");
    EXPECT_EQ(csv.back(), '\n');
    EXPECT_NE(csv.find("0.123457"), std::string::npos);  // 6 significant digits

    const auto back = parse_csv(csv);
    ASSERT_EQ(back.size(), 3u);
    EXPECT_EQ(back[1].channel, ChannelKind::Awgn);
    EXPECT_EQ(back[1].snr_db, 30.0);
    EXPECT_EQ(back[1].mode, Mode::AudioOnly);
    EXPECT_EQ(back[1].csi, CsiMode::None);
    EXPECT_EQ(back[1].frame_erasures, 3u);
    EXPECT_NEAR(back[1].segment_accuracy, 0.123457, 1e-12);
    EXPECT_EQ(format_csv(back), csv);
}

TEST(Csv, EmitErrors) {
    EXPECT_EQ(code_of([] { emit_csv({}, "/tmp/pgsc_empty.csv"); }), ErrorCode::ConfigError);
    const std::vector<MetricsRow> one{MetricsRow{}};
    EXPECT_EQ(code_of([&] { emit_csv(one, "/nonexistent/dir/out.csv"); }), ErrorCode::IoFailure);
}

TEST(Sweep, RowCountAndBounds) {
    ExperimentConfig cfg = quick_config();
    const SweepResult r = run_sweep(cfg);
    EXPECT_EQ(r.rows.size(), 11u * 3u * cfg.seeds.size());
    for (const auto& row : r.rows) {
        EXPECT_GE(row.segment_accuracy, 0.0);
        EXPECT_LE(row.segment_accuracy, 1.0);
    }
    EXPECT_EQ(r.manifest.seeds, cfg.seeds);
    EXPECT_EQ(r.manifest.artifact_version, "1.0.0");
    EXPECT_EQ(r.manifest.sub_seeds.at("3.data"), module_seed(3, "data"));
    EXPECT_TRUE(std::is_sorted(r.rows.begin(), r.rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
        if (a.channel != b.channel) return to_string(a.channel) < to_string(b.channel);
        if (a.snr_db != b.snr_db) return a.snr_db < b.snr_db;
        return a.seed < b.seed;
    }));
}

TEST(Sweep, ByteIdenticalReruns) {
    fixture::ScratchDir dir("sweep");
    ExperimentConfig cfg = quick_config();
    cfg.channels = {ChannelKind::Rayleigh};
    cfg.snr_list = {0, 30};
    cfg.csis = {CsiMode::Pilot, CsiMode::Perfect, CsiMode::None};
    cfg.modes = {Mode::Multimodal, Mode::VideoOnly};
    for (const char* run : {"a", "b"}) {
        const SweepResult r = run_sweep(cfg);
        emit_csv(r.rows, dir.path() / (std::string(run) + ".csv"));
        write_manifest(r.manifest, dir.path() / (std::string(run) + ".manifest"));
    }
    EXPECT_EQ(slurp(dir.path() / "a.csv"), slurp(dir.path() / "b.csv"));
    EXPECT_EQ(slurp(dir.path() / "a.manifest"), slurp(dir.path() / "b.manifest"));
    EXPECT_FALSE(slurp(dir.path() / "a.csv").empty());
}

TEST(Manifest, RecordsConfigAndSeeds) {
    ExperimentConfig cfg = quick_config();
    validate(cfg);
    RunManifest m;
    m.config = config_settings(cfg);
    m.seeds = cfg.seeds;
    m.sub_seeds["3.eval"] = module_seed(3, "eval");
    const std::string text = format_manifest(m);
    EXPECT_NE(text.find("artifact_version=1.0.0"), std::string::npos);
    EXPECT_NE(text.find("master_seeds=3,4"), std::string::npos);
    EXPECT_NE(text.find("config.epochs=1"), std::string::npos);
    EXPECT_NE(text.find("subseed.3.eval=" + std::to_string(module_seed(3, "eval"))), std::string::npos);
    EXPECT_EQ(text.find("wall_clock_start"), std::string::npos);
}

TEST(SplitList, TrimsAndDropsEmpty) {
    EXPECT_EQ(split_list(" a, b ,,c "), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_TRUE(split_list("").empty());
}
