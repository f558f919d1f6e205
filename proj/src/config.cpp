#include "ofdmradar/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ofdmradar/errors.hpp"

namespace ofdmradar {
namespace {

using json = nlohmann::ordered_json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

double get_snr(const json& v) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "+inf" || s == "infinity")
            return std::numeric_limits<double>::infinity();
        throw ConfigError("channel.snr_db: expected a number or \"inf\"");
    }
    return v.get<double>();
}

WindowKind parse_window(const std::string& s) {
    if (s == "rectangular") return WindowKind::Rectangular;
    if (s == "hamming") return WindowKind::Hamming;
    throw ConfigError("detector.window must be 'rectangular' or 'hamming'");
}

EstimatorKind parse_estimator(const std::string& s) {
    if (s == "ls") return EstimatorKind::Ls;
    if (s == "dft-ce") return EstimatorKind::DftCe;
    if (s == "zcp-ls") return EstimatorKind::ZcpLs;
    throw ConfigError("estimator.kind must be 'ls', 'dft-ce' or 'zcp-ls'");
}

DetectorKind parse_detector(const std::string& s) {
    if (s == "periodogram") return DetectorKind::Periodogram;
    if (s == "fps-sft") return DetectorKind::FpsSft;
    throw ConfigError("detector.kind must be 'periodogram' or 'fps-sft'");
}

AmplitudeMode parse_amplitude(const std::string& s) {
    if (s == "normalized") return AmplitudeMode::Normalized;
    if (s == "friis") return AmplitudeMode::Friis;
    throw ConfigError("channel.amplitude_mode must be 'normalized' or 'friis'");
}

SimulationConfig from_json(const json& root) {
    reject_unknown(root, {"waveform", "targets", "channel", "estimator", "detector", "output"},
                   "config");
    SimulationConfig cfg;

    if (root.contains("waveform")) {
        const auto& w = root["waveform"];
        reject_unknown(w,
                       {"n_subcarriers", "n_symbols", "subcarrier_spacing_hz", "carrier_hz",
                        "n_cp", "qam_order"},
                       "waveform");
        if (w.contains("n_subcarriers")) cfg.waveform.n_subcarriers = w["n_subcarriers"];
        if (w.contains("n_symbols")) cfg.waveform.n_symbols = w["n_symbols"];
        if (w.contains("subcarrier_spacing_hz"))
            cfg.waveform.subcarrier_spacing_hz = w["subcarrier_spacing_hz"];
        if (w.contains("carrier_hz")) cfg.waveform.carrier_hz = w["carrier_hz"];
        if (w.contains("n_cp")) cfg.waveform.n_cp = w["n_cp"];
        if (w.contains("qam_order")) cfg.waveform.qam_order = w["qam_order"];
    }
    cfg.waveform.n_prime = cfg.waveform.n_subcarriers;
    cfg.waveform.m_prime = cfg.waveform.n_symbols;

    if (root.contains("targets")) {
        for (const auto& t : root["targets"]) {
            reject_unknown(t, {"range_m", "velocity_mps", "rcs", "phase"}, "targets[]");
            RadarTarget tgt;
            tgt.range_m = t.at("range_m");
            tgt.velocity_mps = t.at("velocity_mps");
            if (t.contains("rcs")) tgt.rcs_m2 = t["rcs"];
            if (t.contains("phase")) tgt.phase_rad = t["phase"];
            cfg.targets.push_back(tgt);
        }
    }

    if (root.contains("channel")) {
        const auto& c = root["channel"];
        reject_unknown(c, {"snr_db", "amplitude_mode", "seed"}, "channel");
        if (c.contains("snr_db")) cfg.channel.snr_db = get_snr(c["snr_db"]);
        if (c.contains("amplitude_mode"))
            cfg.channel.amplitude_mode = parse_amplitude(c["amplitude_mode"]);
        if (c.contains("seed")) cfg.channel.seed = c["seed"].get<std::uint64_t>();
    }

    if (root.contains("estimator")) {
        const auto& e = root["estimator"];
        reject_unknown(e, {"kind", "zcp"}, "estimator");
        if (e.contains("kind")) cfg.estimator.kind = parse_estimator(e["kind"]);
        if (e.contains("zcp")) {
            const auto& z = e["zcp"];
            reject_unknown(z, {"length", "root", "offset"}, "estimator.zcp");
            if (z.contains("length")) cfg.estimator.zcp.length = z["length"];
            if (z.contains("root")) cfg.estimator.zcp.root = z["root"];
            if (z.contains("offset")) cfg.estimator.zcp.offset = z["offset"];
        }
    }

    if (root.contains("detector")) {
        const auto& d = root["detector"];
        reject_unknown(d,
                       {"kind", "pfa", "window", "n_prime", "m_prime", "sft", "max_targets",
                        "estimate_noise"},
                       "detector");
        if (d.contains("kind")) cfg.detector.kind = parse_detector(d["kind"]);
        if (d.contains("pfa")) cfg.waveform.pfa = d["pfa"];
        if (d.contains("window")) cfg.waveform.window = parse_window(d["window"]);
        if (d.contains("n_prime")) cfg.waveform.n_prime = d["n_prime"];
        if (d.contains("m_prime")) cfg.waveform.m_prime = d["m_prime"];
        if (d.contains("max_targets")) cfg.detector.max_targets = d["max_targets"];
        if (d.contains("estimate_noise")) cfg.detector.estimate_noise = d["estimate_noise"];
        if (d.contains("sft")) {
            const auto& s = d["sft"];
            reject_unknown(s, {"i_max"}, "detector.sft");
            if (s.contains("i_max")) cfg.detector.sft_i_max = s["i_max"];
        }
    }

    if (root.contains("output")) {
        const auto& o = root["output"];
        reject_unknown(o, {"dir"}, "output");
        if (o.contains("dir")) cfg.output_dir = o["dir"];
    }

    cfg.validate();
    return cfg;
}

json to_json(const SimulationConfig& cfg) {
    json root;
    root["waveform"] = {{"n_subcarriers", cfg.waveform.n_subcarriers},
                        {"n_symbols", cfg.waveform.n_symbols},
                        {"subcarrier_spacing_hz", cfg.waveform.subcarrier_spacing_hz},
                        {"carrier_hz", cfg.waveform.carrier_hz},
                        {"n_cp", cfg.waveform.n_cp},
                        {"qam_order", cfg.waveform.qam_order}};
    root["targets"] = json::array();
    for (const auto& t : cfg.targets) {
        json jt = {{"range_m", t.range_m}, {"velocity_mps", t.velocity_mps}, {"rcs", t.rcs_m2}};
        if (t.has_fixed_phase()) jt["phase"] = t.phase_rad;
        root["targets"].push_back(jt);
    }
    root["channel"] = {{"snr_db", std::isfinite(cfg.channel.snr_db)
                                      ? json(cfg.channel.snr_db)
                                      : json("inf")},
                       {"amplitude_mode", to_string(cfg.channel.amplitude_mode)},
                       {"seed", cfg.channel.seed}};
    root["estimator"] = {{"kind", to_string(cfg.estimator.kind)},
                         {"zcp",
                          {{"length", cfg.estimator.zcp.length},
                           {"root", cfg.estimator.zcp.root},
                           {"offset", cfg.estimator.zcp.offset}}}};
    root["detector"] = {{"kind", to_string(cfg.detector.kind)},
                        {"pfa", cfg.waveform.pfa},
                        {"window", to_string(cfg.waveform.window)},
                        {"n_prime", cfg.waveform.n_prime},
                        {"m_prime", cfg.waveform.m_prime},
                        {"max_targets", cfg.detector.max_targets},
                        {"estimate_noise", cfg.detector.estimate_noise},
                        {"sft", {{"i_max", cfg.detector.sft_i_max}}}};
    root["output"] = {{"dir", cfg.output_dir}};
    return root;
}

/// On-bin target: range and velocity computed with the same expressions the
/// detector uses, so a perfect detection reproduces the floats exactly.
RadarTarget target_from_bins(const WaveformConfig& w, long delay_bin, long doppler_bin) {
    RadarTarget t;
    t.range_m = kSpeedOfLight * double(delay_bin) /
                (2.0 * double(w.n_subcarriers) * w.subcarrier_spacing_hz);
    t.velocity_mps = kSpeedOfLight * double(doppler_bin) /
                     (2.0 * w.carrier_hz * double(w.n_symbols) * w.symbol_time());
    return t;
}

WaveformConfig table1_waveform() {
    WaveformConfig w;
    w.n_subcarriers = 2048;
    w.n_symbols = 560;
    w.subcarrier_spacing_hz = 240e3;
    w.carrier_hz = 77e9;
    w.n_cp = 512;
    w.qam_order = 16;
    w.n_prime = 2048;
    w.m_prime = 560;
    w.window = WindowKind::Hamming;
    w.pfa = 1e-2;
    return w;
}

/// Desk-scale numerology for the RMSE sweeps. 512 subcarriers is not a
/// perfect square, so the ZCP estimator runs the direct NxN precoder there.
WaveformConfig desk_waveform() {
    WaveformConfig w = table1_waveform();
    w.n_subcarriers = 512;
    w.n_symbols = 140;
    w.n_cp = 128;
    w.n_prime = 512;
    w.m_prime = 140;
    return w;
}

}  // namespace

std::string to_string(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::Ls: return "ls";
        case EstimatorKind::DftCe: return "dft-ce";
        case EstimatorKind::ZcpLs: return "zcp-ls";
    }
    return "?";
}

std::string to_string(DetectorKind k) {
    return k == DetectorKind::Periodogram ? "periodogram" : "fps-sft";
}

std::string to_string(WindowKind k) {
    return k == WindowKind::Rectangular ? "rectangular" : "hamming";
}

std::string to_string(AmplitudeMode m) {
    return m == AmplitudeMode::Normalized ? "normalized" : "friis";
}

void SimulationConfig::validate() const {
    waveform.validate();
    if (estimator.kind == EstimatorKind::ZcpLs) {
        const auto side = static_cast<std::size_t>(
            std::llround(std::sqrt(double(estimator.zcp.length))));
        if (side * side != estimator.zcp.length)
            throw ConfigError("estimator.zcp.length must be a perfect square");
        if (side != waveform.n_subcarriers && side * side != waveform.n_subcarriers)
            throw ConfigError("ZCP unavailable: zcp matrix side must equal N or sqrt(N)");
    }
    if (detector.max_targets == 0) throw ConfigError("detector.max_targets must be positive");
}

SimulationConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (root.contains("config")) {
        // run.json manifest: replay from its embedded config
        return from_json(root["config"]);
    }
    return from_json(root);
}

SimulationConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const SimulationConfig& cfg) { return to_json(cfg).dump(2); }

std::vector<std::string> preset_names() {
    return {"table1", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10"};
}

SimulationConfig preset_config(const std::string& name) {
    SimulationConfig cfg;
    if (name == "table1") {
        cfg.waveform = table1_waveform();
        return cfg;
    }
    if (name == "fig4") {
        cfg.waveform = table1_waveform();
        // the published scene reaches past the CP range limit; ranges are
        // rescaled into (0, 156.25 m] while keeping the velocity set
        const double ranges[] = {100.0, 120.0, 135.0, 148.0, 155.0};
        const double speeds[] = {30.0, -25.0, 5.0, 17.0, -15.0};
        for (int i = 0; i < 5; ++i)
            cfg.targets.push_back({ranges[i], speeds[i], 1.0,
                                   std::numeric_limits<double>::quiet_NaN()});
        cfg.channel.snr_db = 5.0;
        cfg.channel.amplitude_mode = AmplitudeMode::Friis;
        cfg.channel.seed = 7;
        cfg.detector.max_targets = 5;
        return cfg;
    }
    if (name == "fig5") {
        cfg.waveform = table1_waveform();
        cfg.waveform.n_symbols = 16;  // MSE statistics need cells, not symbols
        cfg.waveform.m_prime = 16;
        for (long bin : {40L, 200L, 410L}) {
            RadarTarget t = target_from_bins(cfg.waveform, bin, 0);
            t.velocity_mps = 0.0;
            cfg.targets.push_back(t);
        }
        cfg.channel.snr_db = 0.0;
        cfg.channel.seed = 11;
        return cfg;
    }
    if (name == "fig6") {
        // execution-time sweep base; cmd_bench swaps N in {256,...,2048}
        WaveformConfig w;
        w.n_subcarriers = 2048;
        w.n_symbols = 200;
        w.subcarrier_spacing_hz = 60e6 / 2048.0;
        w.carrier_hz = 77e9;
        w.n_cp = 512;
        w.qam_order = 16;
        w.n_prime = 2048;
        w.m_prime = 200;
        w.window = WindowKind::Hamming;
        w.pfa = 1e-2;
        cfg.waveform = w;
        // clean-signal regime: the execution-time comparison is about
        // transform work, and the sparse path then samples at full decimation
        cfg.channel.snr_db = 40.0;
        cfg.channel.seed = 13;
        cfg.detector.max_targets = 5;
        return cfg;
    }
    if (name == "fig7") {
        WaveformConfig w;
        w.n_subcarriers = 128;
        w.n_symbols = 1;  // spectrum of a single OFDM symbol
        w.subcarrier_spacing_hz = 20e6 / 128.0;
        w.carrier_hz = 77e9;
        w.n_cp = 32;
        w.qam_order = 16;
        w.n_prime = 128;
        w.m_prime = 1;
        w.window = WindowKind::Rectangular;
        w.pfa = 1e-2;
        cfg.waveform = w;
        cfg.estimator.kind = EstimatorKind::ZcpLs;
        cfg.estimator.zcp = {128ull * 128ull, 1, 0};  // direct 128x128 precoder
        cfg.channel.seed = 17;
        return cfg;
    }
    if (name == "fig8") {
        cfg.waveform = table1_waveform();
        const long delay_bins[] = {328, 394, 442, 485, 508};
        const long doppler_bins[] = {45, -37, 7, 25, -22};
        for (int i = 0; i < 5; ++i)
            cfg.targets.push_back(target_from_bins(cfg.waveform, delay_bins[i], doppler_bins[i]));
        cfg.channel.snr_db = 20.0;
        cfg.channel.seed = 19;
        cfg.detector.kind = DetectorKind::FpsSft;
        cfg.detector.max_targets = 5;
        return cfg;
    }
    if (name == "fig9" || name == "fig10") {
        cfg.waveform = desk_waveform();
        const long delay_bins[] = {30, 70, 110};
        const long doppler_bins[] = {10, -14, 5};
        for (int i = 0; i < 3; ++i)
            cfg.targets.push_back(target_from_bins(cfg.waveform, delay_bins[i], doppler_bins[i]));
        cfg.channel.snr_db = 0.0;
        cfg.channel.seed = 23;
        cfg.detector.max_targets = 3;
        cfg.estimator.zcp = {512ull * 512ull, 1, 0};  // direct 512x512 precoder
        return cfg;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace ofdmradar
