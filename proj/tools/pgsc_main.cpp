// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------
//
// Command line front end: simulate, train, gradcheck, pilot-demo, synth.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pgsc/experiment.hpp"

namespace {

using namespace pgsc;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

/// Flags shared by the verbs that build an ExperimentConfig. Everything is
/// kept as text and funneled through apply_setting so the config file and
/// the command line accept the same syntax.
struct ConfigFlags {
    std::string config_file;
    std::optional<std::string> channel, rician_k, snr_list, seeds, mode, csi, epochs;
    std::vector<std::string> overrides;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_file, "key=value configuration file");
        cmd->add_option("--channel", channel, "awgn, rayleigh, rician (comma list)");
        cmd->add_option("--rician-k", rician_k, "Rician K-factor");
        cmd->add_option("--snr-list", snr_list, "evaluation SNRs in dB (comma list)");
        cmd->add_option("--seeds", seeds, "master seeds (comma list)");
        cmd->add_option("--mode", mode, "audio, video, multimodal (comma list)");
        cmd->add_option("--csi", csi, "pilot, perfect, none (comma list)");
        cmd->add_option("--epochs", epochs, "training epochs");
        cmd->add_option("--set", overrides, "any config key as key=value (repeatable)");
    }

    ExperimentConfig build() const {
        ExperimentConfig cfg;
        if (!config_file.empty()) load_config_file(cfg, config_file);
        auto put = [&](const char* key, const std::optional<std::string>& v) {
            if (v) apply_setting(cfg, key, *v);
        };
        put("channel", channel);
        put("rician_k", rician_k);
        put("snr_list", snr_list);
        put("seeds", seeds);
        put("mode", mode);
        put("csi", csi);
        put("epochs", epochs);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "--set expects key=value, got " + kv);
            apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        validate(cfg);
        return cfg;
    }
};

void log_line(const std::string& s) { std::cerr << s << '\n'; }

int run_simulate(const ConfigFlags& flags, const std::string& out, std::string manifest, bool quiet) {
    const ExperimentConfig cfg = flags.build();
    const SweepResult res = run_sweep(cfg, quiet ? ProgressCallback{} : ProgressCallback{log_line});
    emit_csv(res.rows, out);
    if (manifest.empty()) manifest = out + ".manifest";
    write_manifest(res.manifest, manifest);
    if (!quiet) log_line("wrote " + std::to_string(res.rows.size()) + " rows to " + out);
    return kExitOk;
}

int run_train(const ConfigFlags& flags, const std::string& checkpoint, const std::string& data_dir, bool quiet) {
    ExperimentConfig cfg = flags.build();
    const std::uint64_t seed = cfg.seeds.front();
    const ChannelModel model{cfg.channels.front(), cfg.rician_k};
    const Mode mode = cfg.modes.front();
    const CsiMode csi = cfg.csis.front();

    std::vector<Sample> data;
    std::size_t n_train = cfg.dataset.train_samples;
    if (!data_dir.empty()) {
        data = load_dataset(data_dir);
        if (data.size() < 2) throw Error(ErrorCode::ConfigError, "imported dataset needs at least two samples");
        const Sample& s0 = data.front();
        cfg.dims.audio_dim = s0.audio.dim();
        cfg.dims.visual_dim = s0.visual.dim();
        cfg.dims.locations = s0.visual.locations;
        cfg.dims.classes = s0.labels.cols();
        validate(cfg.dims);
        n_train = std::min(n_train, data.size() - 1);
    } else {
        data = synth_dataset(cfg.dataset, SeededRng(module_seed(seed, "data")));
    }
    const std::span<const Sample> train_split(data.data(), n_train);
    const std::span<const Sample> test_split(data.data() + n_train, data.size() - n_train);

    Pipeline pipe(cfg.dims, mode);
    SeededRng init_rng = SeededRng(module_seed(seed, "model")).split(to_string(mode));
    ModelParams params = init_model(cfg.dims, init_rng);
    TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.beta = cfg.beta;
    tc.optimizer = cfg.optimizer;
    tc.env = ChannelEnv{model, csi, cfg.pilot, false};
    tc.snr_grid = cfg.train_snr;
    SeededRng train_rng = SeededRng(module_seed(seed, "train")).split(to_string(model.kind));
    train(pipe, params, train_split, tc, train_rng, [&](const EpochLog& l) {
        if (quiet) return;
        char buf[160];
        std::snprintf(buf, sizeof buf, "epoch %zu loss %.6g cls %.6g step %.3g skipped %zu", l.epoch + 1, l.mean_loss,
                      l.mean_cls, l.step_size, l.skipped_frames);
        log_line(buf);
    });
    if (!checkpoint.empty()) save_checkpoint(checkpoint, params);

    std::printf("snr_db,csi,segment_accuracy,frame_erasures\n");
    const SeededRng eval_rng = SeededRng(module_seed(seed, "eval")).split(to_string(model.kind));
    for (const Real snr : cfg.snr_list) {
        const EvalResult r = evaluate(pipe, params, test_split, tc.env, snr, eval_rng);
        std::printf("%.6g,%s,%.6g,%zu\n", snr, std::string(to_string(csi)).c_str(), r.accuracy, r.erasures);
    }
    return kExitOk;
}

int run_gradcheck(const ConfigFlags& flags, std::size_t segments, Real snr, bool all_modes) {
    ExperimentConfig cfg = flags.build();
    cfg.dataset.segments = segments;
    cfg.dataset.samples = 2;
    cfg.dataset.train_samples = 1;
    cfg.dataset.min_span = std::min<std::size_t>(cfg.dataset.min_span, segments);
    const std::uint64_t seed = cfg.seeds.front();
    const auto data = synth_dataset(cfg.dataset, SeededRng(module_seed(seed, "data")));
    std::vector<Mode> modes = all_modes ? std::vector<Mode>{Mode::AudioOnly, Mode::VideoOnly, Mode::Multimodal}
                                        : std::vector<Mode>{cfg.modes.front()};
    bool ok = true;
    for (const Mode mode : modes) {
        Pipeline pipe(cfg.dims, mode);
        SeededRng init_rng = SeededRng(module_seed(seed, "model")).split(to_string(mode));
        const ModelParams params = init_model(cfg.dims, init_rng);
        SeededRng link_rng(module_seed(seed, "links"));
        const ChannelEnv env{ChannelModel{cfg.channels.front(), cfg.rician_k}, cfg.csis.front(), cfg.pilot, false};
        const FrameLinks links = draw_frame_links(pipe, env, snr, segments, link_rng);
        const GradCheckReport rep = gradcheck(pipe, params, data.front(), links, cfg.beta);
        std::printf("mode %s\n%-28s %8s %8s %12s\n", std::string(to_string(mode)).c_str(), "tensor", "checked",
                    "skipped", "max_rel_err");
        for (const auto& e : rep.entries)
            std::printf("%-28s %8zu %8zu %12.3e\n", e.name.c_str(), e.checked, e.skipped, e.max_rel_error);
        std::printf("%s (threshold %.1e)\n\n", rep.passed ? "PASS" : "FAIL", rep.threshold);
        ok = ok && rep.passed;
    }
    return ok ? kExitOk : kExitNumerical;
}

int run_pilot_demo(const ConfigFlags& flags, std::size_t trials, std::size_t antennas, std::size_t users) {
    const ExperimentConfig cfg = flags.build();
    if (antennas < users) throw Error(ErrorCode::ConfigError, "need at least as many antennas as users");
    const PilotSchedule sched = make_pilot(users, cfg.pilot.length_per_user * users, cfg.pilot);
    std::printf("channel,snr_db,mean_sq_error,mean_t_min\n");
    for (const ChannelKind kind : cfg.channels) {
        const ChannelModel model{kind, cfg.rician_k};
        for (const Real snr : cfg.snr_list) {
            SeededRng rng = SeededRng(module_seed(cfg.seeds.front(), "pilot-demo")).split(to_string(kind));
            const Real sigma2 = snr_to_noise_power(1.0, snr);
            Real err = 0.0, tmin = 0.0;
            for (std::size_t i = 0; i < trials; ++i) {
                const ChannelRealization ch = draw_channel(model, antennas, users, rng);
                const ComplexMatrix y = transmit_with_noise(
                    sched.symbols, ch.h, sample_cn(rng, antennas, sched.symbols.cols(), sigma2));
                const ChannelEstimate est = ls_estimate(y, sched);
                err += frobenius_norm_sq(sub(est.h_best, ch.h));
                tmin += static_cast<Real>(est.t_min);
            }
            std::printf("%s,%.6g,%.6g,%.6g\n", std::string(to_string(kind)).c_str(), snr,
                        err / static_cast<Real>(trials), tmin / static_cast<Real>(trials));
        }
    }
    return kExitOk;
}

int run_synth(const ConfigFlags& flags, const std::string& out_dir) {
    const ExperimentConfig cfg = flags.build();
    const auto data = synth_dataset(cfg.dataset, SeededRng(module_seed(cfg.seeds.front(), "data")));
    save_dataset(out_dir, data);
    return kExitOk;
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::IoFailure: return kExitIo;
        case ErrorCode::IllConditioned:
        case ErrorCode::NonFinite: return kExitNumerical;
        default: return kExitConfig;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pgsc: pilot-guided multimodal semantic communication simulator"};
    app.require_subcommand(1);

    ConfigFlags sim_flags, train_flags, grad_flags, pilot_flags, synth_flags;

    auto* sim = app.add_subcommand("simulate", "run an SNR / modality / CSI sweep and write CSV");
    sim_flags.attach(sim);
    std::string out = "results.csv", manifest;
    bool quiet = false;
    sim->add_option("--out", out, "CSV output path");
    sim->add_option("--manifest", manifest, "run manifest path (default <out>.manifest)");
    sim->add_flag("--quiet", quiet, "no progress on stderr");

    auto* tr = app.add_subcommand("train", "train one model and report held-out accuracy");
    train_flags.attach(tr);
    std::string checkpoint, data_dir;
    bool train_quiet = false;
    tr->add_option("--checkpoint", checkpoint, "write the trained parameters here");
    tr->add_option("--data", data_dir, "directory with audio.pgsc, visual.pgsc, labels.pgsc");
    tr->add_flag("--quiet", train_quiet, "no per-epoch log");

    auto* gc = app.add_subcommand("gradcheck", "compare analytic gradients with central differences");
    grad_flags.attach(gc);
    std::size_t segments = 4;
    Real grad_snr = 15.0;
    bool all_modes = false;
    gc->add_option("--segments", segments, "segments per sample")->check(CLI::Range(2, 64));
    gc->add_option("--snr", grad_snr, "SNR of the frozen link");
    gc->add_flag("--all-modes", all_modes, "check audio, video and multimodal pipelines");

    auto* pd = app.add_subcommand("pilot-demo", "print the channel-estimation error per SNR");
    pilot_flags.attach(pd);
    std::size_t trials = 1000, antennas = 2, users = 2;
    pd->add_option("--trials", trials, "Monte-Carlo trials per SNR")->check(CLI::PositiveNumber);
    pd->add_option("--antennas", antennas, "receive antennas M")->check(CLI::PositiveNumber);
    pd->add_option("--users", users, "users K")->check(CLI::PositiveNumber);

    auto* sy = app.add_subcommand("synth", "write a synthetic dataset as PGSC feature files");
    synth_flags.attach(sy);
    std::string synth_dir;
    sy->add_option("--out", synth_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (sim->parsed()) return run_simulate(sim_flags, out, manifest, quiet);
        if (tr->parsed()) return run_train(train_flags, checkpoint, data_dir, train_quiet);
        if (gc->parsed()) return run_gradcheck(grad_flags, segments, grad_snr, all_modes);
        if (pd->parsed()) return run_pilot_demo(pilot_flags, trials, antennas, users);
        if (sy->parsed()) return run_synth(synth_flags, synth_dir);
    } catch (const Error& e) {
        std::cerr << "pgsc: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "pgsc: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitConfig;
}
