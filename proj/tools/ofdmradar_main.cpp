// Command-line driver: wires configs and presets to the simulation modules
// and writes CSV/PGM outputs plus a run.json manifest per run.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ofdmradar/config.hpp"
#include "ofdmradar/errors.hpp"
#include "ofdmradar/io.hpp"
#include "ofdmradar/metrics.hpp"
#include "ofdmradar/pipeline.hpp"

namespace fs = std::filesystem;
using namespace ofdmradar;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct CommonOpts {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool estimate_noise = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "JSON config file (or a run.json manifest)");
    cmd->add_option("--preset", o.preset, "named preset (table1, fig4, ..., fig10)");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "override the channel seed");
    cmd->add_flag("--estimate-noise", o.estimate_noise,
                  "estimate the noise power from the data instead of using the known value");
}

SimulationConfig resolve_config(const CommonOpts& o) {
    SimulationConfig cfg;
    if (!o.config_path.empty())
        cfg = load_config(o.config_path);
    else if (!o.preset.empty())
        cfg = preset_config(o.preset);
    else
        cfg = preset_config("table1");
    if (o.seed) cfg.channel.seed = *o.seed;
    if (o.estimate_noise) cfg.detector.estimate_noise = true;
    if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
    fs::create_directories(cfg.output_dir);
    return cfg;
}

/// Restores a sweep parameter recorded in a replayed manifest unless the
/// user passed the flag explicitly.
template <typename T>
void restore_param(const CommonOpts& o, const CLI::App* cmd, const std::string& flag,
                   const std::string& key, T& value) {
    if (o.config_path.empty() || cmd->count(flag) > 0) return;
    for (const auto& [k, v] : read_manifest_extra(o.config_path)) {
        if (k != key) continue;
        std::istringstream ss(v);
        ss >> value;
    }
}

std::vector<double> parse_list_d(const std::string& spec) {
    std::vector<double> out;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    if (out.empty()) throw ConfigError("empty list: " + spec);
    return out;
}

std::vector<std::size_t> parse_list_u(const std::string& spec) {
    std::vector<std::size_t> out;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoul(tok));
    if (out.empty()) throw ConfigError("empty list: " + spec);
    return out;
}

void finish_manifest(const SimulationConfig& cfg, const std::string& command,
                     std::vector<std::pair<std::string, std::string>> extra, double t0) {
    RunManifest m;
    m.command = command;
    m.seed = cfg.channel.seed;
    m.config = cfg;
    m.extra = std::move(extra);
    m.wall_ms = now_ms() - t0;
    write_run_manifest((fs::path(cfg.output_dir) / "run.json").string(), m);
}

int cmd_detect(const CommonOpts& o) {
    const double t0 = now_ms();
    SimulationConfig cfg = resolve_config(o);
    PipelineResult res = run_pipeline(cfg, std::nullopt, /*want_map=*/true);
    const fs::path dir(cfg.output_dir);
    write_detections_csv((dir / "detections.csv").string(), res.detections);
    write_map_csv((dir / "map.csv").string(), res.map);
    write_map_pgm((dir / "map.pgm").string(), res.map);
    std::vector<std::pair<std::string, std::string>> extra;
    if (cfg.estimator.kind == EstimatorKind::ZcpLs) {
        const double amp = zc_matrix_cached(cfg.estimator.zcp).noise_amplification();
        extra.emplace_back("zcp_noise_amplification", format_double(amp));
        std::cout << "zcp deprecoder noise amplification " << format_double(amp) << "\n";
    }
    finish_manifest(cfg, "detect", std::move(extra), t0);
    std::cout << res.detections.size() << " detections -> " << dir.string() << "\n";
    return 0;
}

int cmd_resolutions(const CommonOpts& o) {
    const double t0 = now_ms();
    SimulationConfig cfg = resolve_config(o);
    const Resolutions r = resolutions(cfg.waveform);
    std::cout << "range_resolution_m " << format_double(r.range_resolution_m) << "\n"
              << "velocity_resolution_mps " << format_double(r.velocity_resolution_mps) << "\n"
              << "unambiguous_range_m " << format_double(r.unambiguous_range_m) << "\n"
              << "unambiguous_velocity_mps " << format_double(r.unambiguous_velocity_mps) << "\n"
              << "cp_range_limit_m " << format_double(r.cp_range_limit_m) << "\n"
              << "velocity_model_bound_mps " << format_double(r.velocity_model_bound_mps)
              << "\n";
    finish_manifest(cfg, "resolutions", {}, t0);
    return 0;
}

int cmd_sweep_rmse(CLI::App* cmd, const CommonOpts& o, std::string snr_spec, std::size_t trials,
                   std::string estimators_spec) {
    const double t0 = now_ms();
    SimulationConfig cfg = resolve_config(o);
    restore_param(o, cmd, "--snr", "snr", snr_spec);
    restore_param(o, cmd, "--trials", "trials", trials);
    restore_param(o, cmd, "--estimators", "estimators", estimators_spec);
    const auto grid = parse_list_d(snr_spec);
    std::vector<RmseRow> rows;
    std::stringstream ss(estimators_spec);
    std::string est;
    while (std::getline(ss, est, ',')) {
        EstimatorKind kind;
        if (est == "ls") kind = EstimatorKind::Ls;
        else if (est == "dft-ce") kind = EstimatorKind::DftCe;
        else if (est == "zcp-ls") kind = EstimatorKind::ZcpLs;
        else throw ConfigError("unknown estimator in --estimators: " + est);
        auto part = rmse_sweep(cfg, kind, grid, trials, cfg.channel.seed);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    write_rmse_csv((fs::path(cfg.output_dir) / "rmse.csv").string(), rows);
    finish_manifest(cfg, "sweep-rmse",
                    {{"snr", snr_spec},
                     {"trials", std::to_string(trials)},
                     {"estimators", estimators_spec}},
                    t0);
    std::cout << "rmse.csv: " << rows.size() << " rows -> " << cfg.output_dir << "\n";
    return 0;
}

int cmd_mse(CLI::App* cmd, const CommonOpts& o, std::string snr_spec, std::size_t trials,
            std::string estimators_spec) {
    const double t0 = now_ms();
    SimulationConfig cfg = resolve_config(o);
    restore_param(o, cmd, "--snr", "snr", snr_spec);
    restore_param(o, cmd, "--trials", "trials", trials);
    restore_param(o, cmd, "--estimators", "estimators", estimators_spec);
    const auto grid = parse_list_d(snr_spec);
    std::vector<MseRow> rows;
    std::stringstream ss(estimators_spec);
    std::string est;
    while (std::getline(ss, est, ',')) {
        EstimatorKind kind;
        if (est == "ls") kind = EstimatorKind::Ls;
        else if (est == "dft-ce") kind = EstimatorKind::DftCe;
        else if (est == "zcp-ls") kind = EstimatorKind::ZcpLs;
        else throw ConfigError("unknown estimator in --estimators: " + est);
        auto part = mse_sweep(cfg, kind, grid, trials, cfg.channel.seed);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    write_mse_csv((fs::path(cfg.output_dir) / "mse.csv").string(), rows);
    finish_manifest(cfg, "mse",
                    {{"snr", snr_spec},
                     {"trials", std::to_string(trials)},
                     {"estimators", estimators_spec}},
                    t0);
    std::cout << "mse.csv: " << rows.size() << " rows -> " << cfg.output_dir << "\n";
    return 0;
}

int cmd_bench(CLI::App* cmd, const CommonOpts& o, std::string sizes_spec, std::size_t k_targets,
              std::size_t repeats) {
    const double t0 = now_ms();
    CommonOpts opts = o;
    if (opts.config_path.empty() && opts.preset.empty()) opts.preset = "fig6";
    SimulationConfig cfg = resolve_config(opts);
    restore_param(o, cmd, "--sizes", "sizes", sizes_spec);
    restore_param(o, cmd, "--targets", "targets", k_targets);
    restore_param(o, cmd, "--repeats", "repeats", repeats);
    const auto sizes = parse_list_u(sizes_spec);
    const auto rows = bench_estimators(cfg, sizes, k_targets, repeats, cfg.channel.seed);
    write_bench_csv((fs::path(cfg.output_dir) / "bench.csv").string(), rows);
    finish_manifest(cfg, "bench",
                    {{"sizes", sizes_spec},
                     {"targets", std::to_string(k_targets)},
                     {"repeats", std::to_string(repeats)}},
                    t0);
    for (const auto& r : rows) {
        std::cout << "N=" << r.n << " periodogram " << format_double(r.periodogram_ms)
                  << " ms, fps-sft " << format_double(r.sft_ms) << " ms, speedup "
                  << format_double(r.speedup) << "x, time reduction "
                  << format_double(100.0 * (1.0 - r.sft_ms / r.periodogram_ms)) << "%\n";
    }
    return 0;
}

int cmd_spectrum(CLI::App* cmd, const CommonOpts& o, std::size_t frames) {
    const double t0 = now_ms();
    CommonOpts opts = o;
    if (opts.config_path.empty() && opts.preset.empty()) opts.preset = "fig7";
    SimulationConfig cfg = resolve_config(opts);
    restore_param(o, cmd, "--frames", "frames", frames);
    std::vector<SpectrumRow> rows;
    std::cout.setf(std::ios::fmtflags(0));
    for (bool zcp : {false, true}) {
        for (bool amp : {false, true}) {
            const auto res = symbol_spectrum(cfg, zcp, amp, frames, cfg.channel.seed);
            rows.insert(rows.end(), res.rows.begin(), res.rows.end());
            std::cout << (zcp ? "zcp" : "plain") << (amp ? "+hpa" : "")
                      << " out-of-band fraction " << format_double(res.out_of_band_fraction)
                      << "\n";
        }
    }
    write_spectrum_csv((fs::path(cfg.output_dir) / "spectrum.csv").string(), rows);
    finish_manifest(cfg, "spectrum", {{"frames", std::to_string(frames)}}, t0);
    return 0;
}

int cmd_calibrate_pfa(CLI::App* cmd, const CommonOpts& o, std::size_t cells_min) {
    const double t0 = now_ms();
    SimulationConfig cfg = resolve_config(o);
    restore_param(o, cmd, "--cells", "cells", cells_min);
    const WaveformConfig& w = cfg.waveform;
    const Window2d window = make_window(w.window, w.n_subcarriers, w.n_symbols);
    const double sigma2 = 1.0;
    const double eta = detection_threshold(sigma2, w.pfa, window.power_factor());
    std::size_t cells = 0, exceed = 0;
    Rng rng(cfg.channel.seed);
    const double sd = std::sqrt(sigma2 / 2.0);
    while (cells < cells_min) {
        ComplexGrid h(w.n_subcarriers, w.n_symbols, AxisTag::SubcarrierSymbol);
        for (auto& v : h.storage()) v = cplx(sd * rng.normal(), sd * rng.normal());
        const RealGrid p = periodogram(h, window, w.n_prime, w.m_prime);
        for (const double v : p.storage()) exceed += v >= eta ? 1 : 0;
        cells += p.size();
    }
    const double rate = double(exceed) / double(cells);
    write_calibration_csv((fs::path(cfg.output_dir) / "calibration.csv").string(),
                          to_string(w.window), cells, exceed, rate);
    finish_manifest(cfg, "calibrate-pfa", {{"cells", std::to_string(cells_min)}}, t0);
    std::cout << "window " << to_string(w.window) << ": exceedance " << format_double(rate)
              << " (target " << format_double(w.pfa) << ") over " << cells << " cells\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OFDM joint radar-communication simulator and benchmark harness"};
    app.require_subcommand(1);

    CommonOpts o_detect, o_res, o_rmse, o_mse, o_bench, o_spec, o_cal;

    auto* detect = app.add_subcommand("detect", "run the detection pipeline on a scenario");
    add_common(detect, o_detect);

    auto* res = app.add_subcommand("resolutions", "print numerology-derived resolutions/limits");
    add_common(res, o_res);

    auto* rmse = app.add_subcommand("sweep-rmse", "Monte-Carlo range/velocity RMSE vs SNR");
    add_common(rmse, o_rmse);
    std::string rmse_snr = "-25,-20,-15,-10,-5,0,5,10,15,20";
    std::size_t rmse_trials = 200;
    std::string rmse_est = "ls,dft-ce,zcp-ls";
    rmse->add_option("--snr", rmse_snr, "comma-separated SNR grid in dB");
    rmse->add_option("--trials", rmse_trials, "Monte-Carlo trials per SNR point");
    rmse->add_option("--estimators", rmse_est, "comma-separated estimator list");

    auto* mse = app.add_subcommand("mse", "channel-estimation MSE vs SNR");
    add_common(mse, o_mse);
    std::string mse_snr = "-10,-5,0,5,10";
    std::size_t mse_trials = 50;
    std::string mse_est = "ls,dft-ce";
    mse->add_option("--snr", mse_snr, "comma-separated SNR grid in dB");
    mse->add_option("--trials", mse_trials, "trials per SNR point");
    mse->add_option("--estimators", mse_est, "comma-separated estimator list");

    auto* bench = app.add_subcommand("bench", "periodogram vs fps-sft execution time");
    add_common(bench, o_bench);
    std::string bench_sizes = "256,512,1024,2048";
    std::size_t bench_k = 5, bench_repeats = 7;
    bench->add_option("--sizes", bench_sizes, "comma-separated subcarrier counts");
    bench->add_option("--targets", bench_k, "number of targets (sparsity)");
    bench->add_option("--repeats", bench_repeats, "timed repeats (after one warmup)");

    auto* spec = app.add_subcommand("spectrum", "per-symbol spectrum with/without ZCP and HPA");
    add_common(spec, o_spec);
    std::size_t spec_frames = 100;
    spec->add_option("--frames", spec_frames, "frames to average");

    auto* cal = app.add_subcommand("calibrate-pfa", "noise-only false-alarm calibration");
    add_common(cal, o_cal);
    std::size_t cal_cells = 1 << 20;
    cal->add_option("--cells", cal_cells, "minimum number of cells to test");

    try {
        app.parse(argc, argv);
        if (detect->parsed()) return cmd_detect(o_detect);
        if (res->parsed()) return cmd_resolutions(o_res);
        if (rmse->parsed()) return cmd_sweep_rmse(rmse, o_rmse, rmse_snr, rmse_trials, rmse_est);
        if (mse->parsed()) return cmd_mse(mse, o_mse, mse_snr, mse_trials, mse_est);
        if (bench->parsed()) return cmd_bench(bench, o_bench, bench_sizes, bench_k, bench_repeats);
        if (spec->parsed()) return cmd_spectrum(spec, o_spec, spec_frames);
        if (cal->parsed()) return cmd_calibrate_pfa(cal, o_cal, cal_cells);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    } catch (const ModelValidityError& e) {
        std::cerr << "model validity error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
