// SPDX-License-Identifier: Apache-2.0
//
// pgsc - pilot-guided multimodal semantic communication simulator
// ------------------------------------------------------------------------

#include "pgsc/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <tuple>

namespace pgsc {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

Real parse_real(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    char* end = nullptr;
    const double x = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || std::isnan(x)) config_error(key + ": not a number: '" + v + "'");
    return x;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
        config_error(key + ": not a nonnegative integer: '" + v + "'");
    return std::strtoull(t.c_str(), nullptr, 10);
}

bool parse_bool(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    if (t == "1" || t == "true" || t == "on" || t == "yes") return true;
    if (t == "0" || t == "false" || t == "off" || t == "no") return false;
    config_error(key + ": not a boolean: '" + v + "'");
}

std::string fmt_real(Real x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F&& f) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += f(v[i]);
    }
    return out;
}

std::vector<Real> parse_real_list(const std::string& key, const std::string& v) {
    std::vector<Real> out;
    for (const auto& item : split_list(v)) out.push_back(parse_real(key, item));
    return out;
}

struct Setting {
    std::string_view key;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

#define PGSC_SIZE_SETTING(name, field)                                                                  \
    Setting {                                                                                            \
        name, [](ExperimentConfig& c, const std::string& v) { c.field = parse_uint(name, v); },         \
            [](const ExperimentConfig& c) { return std::to_string(c.field); }                            \
    }
#define PGSC_REAL_SETTING(name, field)                                                                  \
    Setting {                                                                                            \
        name, [](ExperimentConfig& c, const std::string& v) { c.field = parse_real(name, v); },         \
            [](const ExperimentConfig& c) { return fmt_real(c.field); }                                  \
    }

const std::vector<Setting>& settings() {
    static const std::vector<Setting> table = {
        {"channel",
         [](ExperimentConfig& c, const std::string& v) {
             c.channels.clear();
             for (const auto& item : split_list(v)) {
                 const auto k = parse_channel_kind(item);
                 if (!k) config_error("channel: unknown model '" + item + "'");
                 c.channels.push_back(*k);
             }
         },
         [](const ExperimentConfig& c) { return join(c.channels, [](ChannelKind k) { return std::string(to_string(k)); }); }},
        PGSC_REAL_SETTING("rician_k", rician_k),
        {"snr_list", [](ExperimentConfig& c, const std::string& v) { c.snr_list = parse_real_list("snr_list", v); },
         [](const ExperimentConfig& c) { return join(c.snr_list, fmt_real); }},
        {"seeds",
         [](ExperimentConfig& c, const std::string& v) {
             c.seeds.clear();
             for (const auto& item : split_list(v)) c.seeds.push_back(parse_uint("seeds", item));
         },
         [](const ExperimentConfig& c) {
             return join(c.seeds, [](std::uint64_t s) { return std::to_string(s); });
         }},
        {"mode",
         [](ExperimentConfig& c, const std::string& v) {
             c.modes.clear();
             for (const auto& item : split_list(v)) {
                 const auto m = parse_mode(item);
                 if (!m) config_error("mode: unknown mode '" + item + "'");
                 c.modes.push_back(*m);
             }
         },
         [](const ExperimentConfig& c) { return join(c.modes, [](Mode m) { return std::string(to_string(m)); }); }},
        {"csi",
         [](ExperimentConfig& c, const std::string& v) {
             c.csis.clear();
             for (const auto& item : split_list(v)) {
                 const auto m = parse_csi(item);
                 if (!m) config_error("csi: unknown setting '" + item + "'");
                 c.csis.push_back(*m);
             }
         },
         [](const ExperimentConfig& c) { return join(c.csis, [](CsiMode m) { return std::string(to_string(m)); }); }},
        {"train_csi",
         [](ExperimentConfig& c, const std::string& v) {
             const auto m = parse_csi(trim(v));
             if (!m) config_error("train_csi: unknown setting '" + v + "'");
             c.train_csi = *m;
         },
         [](const ExperimentConfig& c) { return std::string(to_string(c.train_csi)); }},
        {"train_snr", [](ExperimentConfig& c, const std::string& v) { c.train_snr = parse_real_list("train_snr", v); },
         [](const ExperimentConfig& c) { return join(c.train_snr, fmt_real); }},
        PGSC_SIZE_SETTING("samples", dataset.samples),
        PGSC_SIZE_SETTING("train_samples", dataset.train_samples),
        PGSC_SIZE_SETTING("segments", dataset.segments),
        PGSC_SIZE_SETTING("min_span", dataset.min_span),
        PGSC_REAL_SETTING("separation", dataset.separation),
        PGSC_REAL_SETTING("jitter", dataset.jitter),
        PGSC_REAL_SETTING("latent_weight", dataset.latent_weight),
        PGSC_SIZE_SETTING("latent_dim", dataset.latent_dim),
        {"cross_modal_ambiguity",
         [](ExperimentConfig& c, const std::string& v) {
             c.dataset.cross_modal_ambiguity = parse_bool("cross_modal_ambiguity", v);
         },
         [](const ExperimentConfig& c) { return std::string(c.dataset.cross_modal_ambiguity ? "true" : "false"); }},
        PGSC_SIZE_SETTING("classes", dims.classes),
        PGSC_SIZE_SETTING("audio_dim", dims.audio_dim),
        PGSC_SIZE_SETTING("visual_dim", dims.visual_dim),
        PGSC_SIZE_SETTING("locations", dims.locations),
        PGSC_SIZE_SETTING("attention_dim", dims.attention_dim),
        PGSC_SIZE_SETTING("semantic_hidden", dims.semantic_hidden),
        {"cell",
         [](ExperimentConfig& c, const std::string& v) {
             const std::string t = trim(v);
             if (t == "tanh") c.dims.cell = CellKind::Tanh;
             else if (t == "lstm") c.dims.cell = CellKind::Lstm;
             else config_error("cell: expected tanh or lstm, got '" + v + "'");
         },
         [](const ExperimentConfig& c) { return std::string(c.dims.cell == CellKind::Tanh ? "tanh" : "lstm"); }},
        PGSC_SIZE_SETTING("audio_enc_hidden", dims.audio_enc_hidden),
        PGSC_SIZE_SETTING("visual_enc_hidden", dims.visual_enc_hidden),
        PGSC_SIZE_SETTING("audio_code", dims.audio_code),
        PGSC_SIZE_SETTING("visual_code", dims.visual_code),
        PGSC_SIZE_SETTING("audio_dec_hidden", dims.audio_dec_hidden),
        PGSC_SIZE_SETTING("visual_dec_hidden", dims.visual_dec_hidden),
        PGSC_SIZE_SETTING("fusion_dim", dims.fusion_dim),
        PGSC_SIZE_SETTING("sim_dim", dims.sim_dim),
        PGSC_SIZE_SETTING("head_hidden", dims.head_hidden),
        PGSC_REAL_SETTING("tau1", dims.tau1),
        PGSC_SIZE_SETTING("pilot_length", pilot.length_per_user),
        {"pilot_frequency",
         [](ExperimentConfig& c, const std::string& v) {
             c.pilot.base_frequency = static_cast<int>(parse_uint("pilot_frequency", v));
         },
         [](const ExperimentConfig& c) { return std::to_string(c.pilot.base_frequency); }},
        PGSC_SIZE_SETTING("epochs", epochs),
        PGSC_SIZE_SETTING("batch_size", batch_size),
        PGSC_REAL_SETTING("beta", beta),
        {"optimizer",
         [](ExperimentConfig& c, const std::string& v) {
             const auto k = parse_optimizer(trim(v));
             if (!k) config_error("optimizer: expected sgd, momentum or adam, got '" + v + "'");
             c.optimizer.kind = *k;
         },
         [](const ExperimentConfig& c) { return std::string(to_string(c.optimizer.kind)); }},
        PGSC_REAL_SETTING("step_size", optimizer.step_size),
        PGSC_SIZE_SETTING("decay_every", optimizer.decay_every),
        PGSC_REAL_SETTING("decay_factor", optimizer.decay_factor),
        PGSC_REAL_SETTING("momentum", optimizer.momentum),
        {"manifest_wall_clock",
         [](ExperimentConfig& c, const std::string& v) {
             c.manifest_wall_clock = parse_bool("manifest_wall_clock", v);
         },
         [](const ExperimentConfig& c) { return std::string(c.manifest_wall_clock ? "true" : "false"); }},
    };
    return table;
}

#undef PGSC_SIZE_SETTING
#undef PGSC_REAL_SETTING

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

auto row_key(const MetricsRow& r) {
    return std::make_tuple(to_string(r.channel), r.snr_db, r.seed, to_string(r.mode), to_string(r.csi));
}

}  // namespace

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void validate(ExperimentConfig& cfg) {
    if (cfg.channels.empty()) config_error("channel list is empty");
    if (cfg.snr_list.empty()) config_error("snr list is empty");
    if (cfg.seeds.empty()) config_error("seed list is empty");
    if (cfg.modes.empty()) config_error("mode list is empty");
    if (cfg.csis.empty()) config_error("csi list is empty");
    if (cfg.train_snr.empty()) config_error("training SNR grid is empty");
    if (cfg.rician_k < 0.0) config_error("rician_k must be nonnegative");
    if (cfg.epochs == 0 || cfg.batch_size == 0) config_error("epochs and batch_size must be positive");
    if (!(cfg.optimizer.step_size > 0.0)) config_error("step_size must be positive");
    if (cfg.dataset.segments < 2) config_error("T must be at least 2");
    if (cfg.dataset.train_samples == 0 || cfg.dataset.train_samples >= cfg.dataset.samples)
        config_error("need a nonempty training split and a nonempty held-out split");
    if (cfg.pilot.length_per_user < 2) config_error("pilot_length must be at least 2");
    cfg.dataset.classes = cfg.dims.classes;
    cfg.dataset.audio_dim = cfg.dims.audio_dim;
    cfg.dataset.visual_dim = cfg.dims.visual_dim;
    cfg.dataset.locations = cfg.dims.locations;
    validate(cfg.dims);
    validate(cfg.dataset);
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const std::string k = trim(key);
    for (const auto& s : settings())
        if (s.key == k) {
            s.set(cfg, value);
            return;
        }
    config_error("unknown setting '" + k + "'");
}

void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::IoFailure, "cannot open config " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            config_error(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
    }
}

std::map<std::string, std::string> config_settings(const ExperimentConfig& cfg) {
    std::map<std::string, std::string> out;
    for (const auto& s : settings()) out.emplace(std::string(s.key), s.get(cfg));
    return out;
}

std::uint64_t module_seed(std::uint64_t seed, std::string_view tag) { return derive_seed(seed, tag); }

SweepResult run_sweep(const ExperimentConfig& input, const ProgressCallback& progress) {
    ExperimentConfig cfg = input;
    validate(cfg);
    SweepResult out;
    out.manifest.config = config_settings(cfg);
    out.manifest.seeds = cfg.seeds;
    if (cfg.manifest_wall_clock) out.manifest.started = utc_now();

    const bool need_none = std::find(cfg.csis.begin(), cfg.csis.end(), CsiMode::None) != cfg.csis.end() &&
                           cfg.train_csi != CsiMode::None;

    for (const std::uint64_t seed : cfg.seeds) {
        const std::string prefix = std::to_string(seed) + ".";
        for (const char* module : {"data", "model", "train", "train_none", "eval"})
            out.manifest.sub_seeds[prefix + module] = module_seed(seed, module);
    }

    for (const ChannelKind channel : cfg.channels) {
        const ChannelModel model{channel, cfg.rician_k};
        for (const std::uint64_t seed : cfg.seeds) {
            const std::vector<Sample> data = synth_dataset(cfg.dataset, SeededRng(module_seed(seed, "data")));
            const std::span<const Sample> train_split(data.data(), cfg.dataset.train_samples);
            const std::span<const Sample> test_split(data.data() + cfg.dataset.train_samples,
                                                     data.size() - cfg.dataset.train_samples);
            for (const Mode mode : cfg.modes) {
                const std::string cell = std::string(to_string(channel)) + "/" + std::string(to_string(mode));
                Pipeline pipe(cfg.dims, mode);
                SeededRng init_rng = SeededRng(module_seed(seed, "model")).split(to_string(mode));
                ModelParams params = init_model(cfg.dims, init_rng);

                TrainConfig tc;
                tc.epochs = cfg.epochs;
                tc.batch_size = cfg.batch_size;
                tc.beta = cfg.beta;
                tc.optimizer = cfg.optimizer;
                tc.env = ChannelEnv{model, cfg.train_csi, cfg.pilot, false};
                tc.snr_grid = cfg.train_snr;
                SeededRng train_rng = SeededRng(module_seed(seed, "train")).split(cell);
                const auto log = train(pipe, params, train_split, tc, train_rng);
                if (progress)
                    progress("trained " + cell + " seed " + std::to_string(seed) + " loss " +
                             fmt_real(log.empty() ? 0.0 : log.back().mean_loss));

                // The ablation model gets the same initialization and budget,
                // only without the estimation block.
                ModelParams params_none = params;
                if (need_none) {
                    SeededRng none_init = SeededRng(module_seed(seed, "model")).split(to_string(mode));
                    params_none = init_model(cfg.dims, none_init);
                    tc.env.csi = CsiMode::None;
                    SeededRng none_rng = SeededRng(module_seed(seed, "train_none")).split(cell);
                    train(pipe, params_none, train_split, tc, none_rng);
                    if (progress) progress("trained without CSI " + cell + " seed " + std::to_string(seed));
                }

                const SeededRng eval_rng = SeededRng(module_seed(seed, "eval")).split(to_string(channel));
                for (const Real snr : cfg.snr_list)
                    for (const CsiMode csi : cfg.csis) {
                        const ChannelEnv env{model, csi, cfg.pilot, false};
                        const ModelParams& p = csi == CsiMode::None ? params_none : params;
                        const EvalResult r = evaluate(pipe, p, test_split, env, snr, eval_rng);
                        out.rows.push_back(MetricsRow{channel, snr, seed, mode, csi, r.accuracy, r.erasures});
                    }
            }
        }
    }
    sort_rows(out.rows);
    if (cfg.manifest_wall_clock) out.manifest.finished = utc_now();
    return out;
}

void sort_rows(std::vector<MetricsRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const MetricsRow& a, const MetricsRow& b) { return row_key(a) < row_key(b); });
}

std::string format_csv(std::vector<MetricsRow> rows) {
    sort_rows(rows);
    std::string out = "channel,snr_db,seed,mode,csi,segment_accuracy,frame_erasures\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.6g,%llu,%s,%s,%.6g,%zu\n", std::string(to_string(r.channel)).c_str(),
                      r.snr_db, static_cast<unsigned long long>(r.seed), std::string(to_string(r.mode)).c_str(),
                      std::string(to_string(r.csi)).c_str(), r.segment_accuracy, r.frame_erasures);
        out += buf;
    }
    return out;
}

void emit_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path) {
    if (rows.empty()) throw Error(ErrorCode::ConfigError, "no metrics rows to write");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    os << format_csv(rows);
    if (!os) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

std::vector<MetricsRow> parse_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "channel,snr_db,seed,mode,csi,segment_accuracy,frame_erasures")
        throw Error(ErrorCode::FormatError, "unexpected CSV header");
    std::vector<MetricsRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string item;
        while (std::getline(ls, item, ',')) f.push_back(item);
        if (f.size() != 7) throw Error(ErrorCode::FormatError, "expected 7 fields: " + line);
        const auto ch = parse_channel_kind(f[0]);
        const auto mode = parse_mode(f[3]);
        const auto csi = parse_csi(f[4]);
        if (!ch || !mode || !csi) throw Error(ErrorCode::FormatError, "bad enum field: " + line);
        MetricsRow r;
        r.channel = *ch;
        r.snr_db = std::strtod(f[1].c_str(), nullptr);
        r.seed = std::strtoull(f[2].c_str(), nullptr, 10);
        r.mode = *mode;
        r.csi = *csi;
        r.segment_accuracy = std::strtod(f[5].c_str(), nullptr);
        r.frame_erasures = std::strtoull(f[6].c_str(), nullptr, 10);
        rows.push_back(r);
    }
    return rows;
}

std::string format_manifest(const RunManifest& m) {
    std::ostringstream os;
    os << "artifact_version=" << m.artifact_version << '\n';
    os << "master_seeds=" << join(m.seeds, [](std::uint64_t s) { return std::to_string(s); }) << '\n';
    for (const auto& [k, v] : m.config) os << "config." << k << '=' << v << '\n';
    for (const auto& [k, v] : m.sub_seeds) os << "subseed." << k << '=' << v << '\n';
    if (!m.started.empty()) os << "wall_clock_start=" << m.started << '\n';
    if (!m.finished.empty()) os << "wall_clock_end=" << m.finished << '\n';
    return os.str();
}

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    os << format_manifest(m);
    if (!os) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

}  // namespace pgsc
