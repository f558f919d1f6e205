#pragma once

#include <string>
#include <vector>

#include "ofdmradar/config.hpp"
#include "ofdmradar/grid.hpp"
#include "ofdmradar/metrics.hpp"
#include "ofdmradar/periodogram.hpp"

namespace ofdmradar {

inline constexpr const char* kToolVersion = "ofdmradar 1.0.0";

/// Stable float formatting shared by every CSV writer ("%.12g").
std::string format_double(double v);

void write_detections_csv(const std::string& path, const std::vector<Detection>& dets);
void write_map_csv(const std::string& path, const RealGrid& p);
void write_rmse_csv(const std::string& path, const std::vector<RmseRow>& rows);
void write_mse_csv(const std::string& path, const std::vector<MseRow>& rows);
void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows);
void write_spectrum_csv(const std::string& path, const std::vector<SpectrumRow>& rows);
void write_calibration_csv(const std::string& path, const std::string& window,
                           std::size_t cells, std::size_t exceedances, double rate);

/// 8-bit PGM heatmap: rows = delay bin, columns = fft-shifted Doppler bin,
/// dB scale clamped to [peak-60, peak].
void write_map_pgm(const std::string& path, const RealGrid& p);

/// run.json: resolved config + command + sweep parameters + seed + version.
/// The wall_ms field is informational; CSV outputs stay byte-identical.
struct RunManifest {
    std::string command;
    std::uint64_t seed = 0;
    SimulationConfig config;
    std::vector<std::pair<std::string, std::string>> extra;  // sweep params etc.
    double wall_ms = 0.0;
};

void write_run_manifest(const std::string& path, const RunManifest& manifest);

/// Reads auxiliary values back from a manifest (returns empty when absent).
std::vector<std::pair<std::string, std::string>> read_manifest_extra(const std::string& path);

}  // namespace ofdmradar
