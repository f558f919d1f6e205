#include "ofdmradar/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "ofdmradar/errors.hpp"

namespace ofdmradar {
namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + path);
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_detections_csv(const std::string& path, const std::vector<Detection>& dets) {
    auto out = open_out(path);
    out << "id,delay_bin,doppler_bin,range_m,velocity_mps,peak_power_db\n";
    for (std::size_t i = 0; i < dets.size(); ++i) {
        const auto& d = dets[i];
        out << i << ',' << d.delay_bin << ',' << d.doppler_bin << ','
            << format_double(d.range_m) << ',' << format_double(d.velocity_mps) << ','
            << format_double(10.0 * std::log10(std::max(d.peak_power, 1e-300))) << '\n';
    }
}

void write_map_csv(const std::string& path, const RealGrid& p) {
    auto out = open_out(path);
    out << "delay_bin,doppler_bin,power_db\n";
    const long half = long(p.cols()) / 2;
    for (std::size_t r = 0; r < p.rows(); ++r) {
        for (std::size_t c = 0; c < p.cols(); ++c) {
            out << r << ',' << (long(c) - half) << ','
                << format_double(10.0 * std::log10(std::max(p.at(r, c), 1e-300))) << '\n';
        }
    }
}

void write_rmse_csv(const std::string& path, const std::vector<RmseRow>& rows) {
    auto out = open_out(path);
    out << "snr_db,estimator,range_rmse_m,velocity_rmse_mps,miss_rate,trials\n";
    for (const auto& r : rows) {
        out << format_double(r.snr_db) << ',' << r.estimator << ','
            << format_double(r.range_rmse_m) << ',' << format_double(r.velocity_rmse_mps) << ','
            << format_double(r.miss_rate) << ',' << r.trials << '\n';
    }
}

void write_mse_csv(const std::string& path, const std::vector<MseRow>& rows) {
    auto out = open_out(path);
    out << "snr_db,estimator,channel_mse\n";
    for (const auto& r : rows)
        out << format_double(r.snr_db) << ',' << r.estimator << ','
            << format_double(r.channel_mse) << '\n';
}

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows) {
    auto out = open_out(path);
    out << "n,m,k,periodogram_ms,sft_ms,speedup,samples_used\n";
    for (const auto& r : rows) {
        out << r.n << ',' << r.m << ',' << r.k << ',' << format_double(r.periodogram_ms) << ','
            << format_double(r.sft_ms) << ',' << format_double(r.speedup) << ','
            << r.samples_used << '\n';
    }
}

void write_spectrum_csv(const std::string& path, const std::vector<SpectrumRow>& rows) {
    auto out = open_out(path);
    out << "freq_hz,power_db,variant\n";
    for (const auto& r : rows)
        out << format_double(r.freq_hz) << ',' << format_double(r.power_db) << ',' << r.variant
            << '\n';
}

void write_calibration_csv(const std::string& path, const std::string& window,
                           std::size_t cells, std::size_t exceedances, double rate) {
    auto out = open_out(path);
    out << "window,cells,exceedances,rate\n";
    out << window << ',' << cells << ',' << exceedances << ',' << format_double(rate) << '\n';
}

void write_map_pgm(const std::string& path, const RealGrid& p) {
    auto out = open_out(path);
    double peak = 0.0;
    for (const auto v : p.storage()) peak = std::max(peak, v);
    if (peak <= 0.0) peak = 1.0;
    const double floor_db = -60.0;
    out << "P5\n" << p.cols() << ' ' << p.rows() << "\n255\n";
    std::vector<unsigned char> row(p.cols());
    for (std::size_t r = 0; r < p.rows(); ++r) {
        for (std::size_t c = 0; c < p.cols(); ++c) {
            const double db = 10.0 * std::log10(std::max(p.at(r, c), peak * 1e-30) / peak);
            const double t = std::clamp((db - floor_db) / -floor_db, 0.0, 1.0);
            row[c] = static_cast<unsigned char>(std::lround(t * 255.0));
        }
        out.write(reinterpret_cast<const char*>(row.data()), long(row.size()));
    }
}

void write_run_manifest(const std::string& path, const RunManifest& manifest) {
    nlohmann::ordered_json root;
    root["tool"] = kToolVersion;
    root["command"] = manifest.command;
    root["seed"] = manifest.seed;
    for (const auto& [k, v] : manifest.extra) root["params"][k] = v;
    root["config"] = nlohmann::ordered_json::parse(config_to_json(manifest.config));
    root["wall_ms"] = manifest.wall_ms;
    auto out = open_out(path);
    out << root.dump(2) << '\n';
}

std::vector<std::pair<std::string, std::string>> read_manifest_extra(const std::string& path) {
    std::ifstream in(path);
    if (!in) return {};
    nlohmann::json root;
    try {
        in >> root;
    } catch (...) {
        return {};
    }
    std::vector<std::pair<std::string, std::string>> out;
    if (root.contains("params")) {
        for (auto it = root["params"].begin(); it != root["params"].end(); ++it)
            out.emplace_back(it.key(), it.value().get<std::string>());
    }
    return out;
}

}  // namespace ofdmradar
