#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "gazeprompt/error.hpp"
#include "gazeprompt/formats.hpp"
#include "gazeprompt/json_io.hpp"
#include "gazeprompt/metrics.hpp"
#include "gazeprompt/server.hpp"
#include "gazeprompt/session.hpp"
#include "gazeprompt/simulator.hpp"
#include "gazeprompt/text_layout.hpp"

namespace fs = std::filesystem;
using namespace gazeprompt;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

PageLayout load_layout(const std::string& path) { return layout_from_json(parse_json(read_file(path))); }

bool is_session_log(const std::string& text) { return text.rfind("{", 0) == 0; }

std::optional<GroundTruth> load_truth(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return ground_truth_from_json(parse_json(read_file(path)));
}

// Runs a gaze log through a fresh session; scrolls come from the truth file when given.
std::string run_gaze_log(const std::string& text, const PageLayout& layout, const GroundTruth* truth,
                         const SessionSettings& settings) {
    GazeLog log = parse_gaze_log(text);
    RunOptions opt;
    opt.settings = settings;
    opt.settings.engine.sample_rate_hz = log.sample_rate_hz;
    opt.layout = layout;
    if (truth) opt.layout_changes = layout_schedule(layout, *truth);
    VectorSource source(std::move(log.samples));
    return run_session(source, nullptr, opt).text();
}

void print_table(const PassageMetrics& m) {
    std::printf("%-34s %12s\n", "measure", "value");
    std::printf("%-34s %12zu\n", "lines", m.line_count);
    std::printf("%-34s %12zu\n", "line switches", m.line_switches.size());
    std::printf("%-34s %12.1f\n", "mean line switch time (ms)", m.mean_line_switch_time_ms);
    std::printf("%-34s %12zu\n", "deviations", m.deviations.size());
    std::printf("%-34s %12.3f\n", "deviation frequency", m.deviation_frequency);
    std::printf("%-34s %12.2f\n", "mean deviation magnitude (lines)", m.mean_deviation_magnitude_lines);
    std::printf("%-34s %12.1f\n", "max one-pass fixation (ms)", m.max_one_pass_fixation_ms);
    if (m.max_one_pass_word) std::printf("%-34s %12d\n", "max one-pass word", *m.max_one_pass_word);
    std::printf("%-34s %12zu\n", "scroll events", m.scroll_event_count);
    std::printf("%-34s %12.1f\n", "mean scroll distance (px)", m.mean_scroll_distance_px);
    std::printf("%-34s %12.3f\n", "data loss", m.data_loss_fraction);
    for (const auto& w : m.warnings) std::printf("warning: %s\n", w.c_str());
}

int cmd_serve(int port, const std::string& config, const std::string& bind, const std::string& log_dir) {
    ServerOptions opt;
    opt.port = port;
    opt.bind_address = bind;
    opt.settings = load_settings(config.empty() ? std::nullopt : std::optional<std::string>(config));
    if (!log_dir.empty()) opt.log_dir = log_dir;
    opt.stop = &g_stop;
    opt.on_listening = [](int p) {
        std::printf("listening on %d\n", p);
        std::fflush(stdout);
    };
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    serve(opt);
    return 0;
}

int cmd_replay(const std::string& log_path, const std::string& layout_path, const std::string& truth_path,
               const std::string& config, const std::string& out) {
    const std::string text = read_file(log_path);
    if (is_session_log(text)) {
        const ReplayResult r = replay_session_log(text);
        if (!out.empty()) write_file(out, r.replayed_log);
        std::printf("session %s: %zu outbound messages, %s\n", r.session_id.c_str(), r.replayed_outbound.size(),
                    r.identical() ? "identical" : "DIFFERENT");
        return r.identical() ? 0 : 1;
    }
    if (layout_path.empty()) throw Error(ErrorCode::no_layout, "replaying a gaze log needs --layout");
    const auto truth = load_truth(truth_path);
    const SessionSettings settings = load_settings(config.empty() ? std::nullopt : std::optional<std::string>(config));
    const std::string log = run_gaze_log(text, load_layout(layout_path), truth ? &*truth : nullptr, settings);
    if (out.empty())
        std::fwrite(log.data(), 1, log.size(), stdout);
    else
        write_file(out, log);
    return 0;
}

int cmd_simulate(const std::string& profile_path, const std::string& layout_path, std::optional<std::uint64_t> seed,
                 const std::string& out, const std::string& calibration, std::size_t words) {
    ReaderProfile profile;
    if (!profile_path.empty()) profile = reader_profile_from_json(parse_json(read_file(profile_path)));
    if (seed) profile.seed = *seed;
    fs::create_directories(out);
    if (!calibration.empty()) {
        const auto kind = target_kind_from_string(calibration);
        if (!kind || (*kind != TargetKind::lines5 && *kind != TargetKind::lines4))
            throw Error(ErrorCode::invalid_config, "--calibration must be lines5 or lines4");
        SweepLog log{profile.sample_rate_hz, simulate_sweep_session(*kind, profile, ScreenGeometry::study_default())};
        write_file(fs::path(out) / (calibration + ".sweeplog"), emit_sweep_log(log));
        return 0;
    }
    PageLayout layout;
    if (!layout_path.empty()) {
        layout = load_layout(layout_path);
    } else {
        layout = build_layout(random_passage(words, profile.seed));
        write_file(fs::path(out) / "layout.json", to_json(layout).dump(1) + "\n");
    }
    const Simulation sim = simulate(layout, profile);
    write_file(fs::path(out) / "gaze.log", emit_gaze_log({profile.sample_rate_hz, sim.samples}));
    write_file(fs::path(out) / "truth.json", to_json(sim.truth).dump() + "\n");
    std::printf("%zu samples, %zu fixations, %zu sweeps, %zu deviations\n", sim.samples.size(),
                sim.truth.fixations.size(), sim.truth.sweeps.size(), sim.truth.deviations.size());
    return 0;
}

int cmd_metrics(const std::string& log_path, const std::string& layout_path, const std::string& truth_path,
                const std::string& config) {
    const std::string text = read_file(log_path);
    const auto truth = load_truth(truth_path);
    ReplayResult r;
    if (is_session_log(text)) {
        r = replay_session_log(text);
    } else {
        if (layout_path.empty()) throw Error(ErrorCode::no_layout, "metrics on a gaze log needs --layout");
        const SessionSettings settings =
            load_settings(config.empty() ? std::nullopt : std::optional<std::string>(config));
        r = replay_session_log(run_gaze_log(text, load_layout(layout_path), truth ? &*truth : nullptr, settings));
    }
    if (r.layouts.empty() && !layout_path.empty()) r.layouts.add(load_layout(layout_path));
    const PassageMetrics m = compute_metrics(r.metrics_input, r.layouts, truth ? &*truth : nullptr,
                                             r.settings.engine.scroll_pause_gap_us);
    Json record = to_json(m);
    record["passage"] = fs::path(log_path).stem().string();
    std::printf("%s\n\n", dump_line(record).c_str());
    print_table(m);
    return 0;
}

int cmd_drift_check(const std::string& sweeps_path, const std::string& lines_path) {
    const SweepLog fit = parse_sweep_log(read_file(sweeps_path));
    const SweepLog check = parse_sweep_log(read_file(lines_path));
    const DriftProfile profile = fit_drift_profile(fit.sweeps);
    const double raw = score_line_validation(check.sweeps);
    const double corrected = score_line_validation(check.sweeps, &profile);
    Json j = {{"profile", to_json(profile)},
              {"raw_px", raw},
              {"corrected_px", corrected},
              {"apply", decide_apply_correction(raw, corrected)}};
    std::printf("%s\n", dump_line(j).c_str());
    return 0;
}

int cmd_typeset(const std::string& text_path, const std::string& out, double font_px) {
    TextStyle style;
    style.font_px = font_px;
    const std::string json = to_json(build_layout(read_file(text_path), style)).dump(1) + "\n";
    if (out.empty())
        std::fwrite(json.data(), 1, json.size(), stdout);
    else
        write_file(out, json);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gazeprompt reading engine"};
    app.require_subcommand(1);
    std::string config;
    app.add_option("--config", config, "settings JSON (default: $GAZEPROMPT_CONFIG)");

    int port = kDefaultPort;
    std::string bind = "127.0.0.1", log_dir;
    auto* serve_cmd = app.add_subcommand("serve", "run the protocol server");
    serve_cmd->add_option("--port", port)->capture_default_str();
    serve_cmd->add_option("--config", config);
    serve_cmd->add_option("--bind", bind)->capture_default_str();
    serve_cmd->add_option("--log-dir", log_dir, "write session logs here");

    std::string log_path, layout_path, truth_path, out;
    auto* replay_cmd = app.add_subcommand("replay", "run a gaze log or re-run a session log");
    replay_cmd->add_option("--log", log_path)->required()->check(CLI::ExistingFile);
    replay_cmd->add_option("--layout", layout_path)->check(CLI::ExistingFile);
    replay_cmd->add_option("--truth", truth_path, "simulator truth; supplies scrolls")->check(CLI::ExistingFile);
    replay_cmd->add_option("--config", config);
    replay_cmd->add_option("--out", out);

    std::string profile_path, calibration;
    std::optional<std::uint64_t> seed;
    std::size_t words = 150;
    auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic reading session");
    sim_cmd->add_option("--profile", profile_path)->check(CLI::ExistingFile);
    sim_cmd->add_option("--layout", layout_path, "default: a generated passage")->check(CLI::ExistingFile);
    sim_cmd->add_option("--seed", seed);
    sim_cmd->add_option("--out", out)->required();
    sim_cmd->add_option("--calibration", calibration, "write a lines5 or lines4 sweep log instead");
    sim_cmd->add_option("--words", words, "length of the generated passage")->capture_default_str();

    auto* metrics_cmd = app.add_subcommand("metrics", "reading measures for one passage");
    metrics_cmd->add_option("--log", log_path)->required()->check(CLI::ExistingFile);
    metrics_cmd->add_option("--layout", layout_path)->check(CLI::ExistingFile);
    metrics_cmd->add_option("--truth", truth_path)->check(CLI::ExistingFile);
    metrics_cmd->add_option("--config", config);

    std::string sweeps_path, lines_path;
    auto* drift_cmd = app.add_subcommand("drift-check", "fit drift on calibration sweeps, score validation sweeps");
    drift_cmd->add_option("--sweeps", sweeps_path, "lines5 sweep log")->required()->check(CLI::ExistingFile);
    drift_cmd->add_option("--lines", lines_path, "lines4 sweep log")->required()->check(CLI::ExistingFile);

    std::string text_path;
    double font_px = 48.0;
    auto* typeset_cmd = app.add_subcommand("typeset", "layout JSON for a plain-text passage");
    typeset_cmd->add_option("--text", text_path)->required()->check(CLI::ExistingFile);
    typeset_cmd->add_option("--font-px", font_px)->capture_default_str();
    typeset_cmd->add_option("--out", out);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*serve_cmd) return cmd_serve(port, config, bind, log_dir);
        if (*replay_cmd) return cmd_replay(log_path, layout_path, truth_path, config, out);
        if (*sim_cmd) return cmd_simulate(profile_path, layout_path, seed, out, calibration, words);
        if (*metrics_cmd) return cmd_metrics(log_path, layout_path, truth_path, config);
        if (*drift_cmd) return cmd_drift_check(sweeps_path, lines_path);
        if (*typeset_cmd) return cmd_typeset(text_path, out, font_px);
    } catch (const Error& e) {
        std::fprintf(stderr, "error [%s]: %s\n", to_string(e.code()), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
