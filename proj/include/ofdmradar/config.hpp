#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ofdmradar/channel.hpp"
#include "ofdmradar/sft.hpp"
#include "ofdmradar/waveform.hpp"
#include "ofdmradar/zadoffchu.hpp"

namespace ofdmradar {

enum class EstimatorKind { Ls, DftCe, ZcpLs };
enum class DetectorKind { Periodogram, FpsSft };

std::string to_string(EstimatorKind k);
std::string to_string(DetectorKind k);
std::string to_string(WindowKind k);
std::string to_string(AmplitudeMode m);

struct ChannelSettings {
    double snr_db = 20.0;  // +inf = noiseless
    AmplitudeMode amplitude_mode = AmplitudeMode::Normalized;
    std::uint64_t seed = 1;
};

struct EstimatorSettings {
    EstimatorKind kind = EstimatorKind::Ls;
    ZcParams zcp{1024, 1, 0};  // only used by ZcpLs
};

struct DetectorSettings {
    DetectorKind kind = DetectorKind::Periodogram;
    std::size_t max_targets = 64;
    std::size_t sft_i_max = 10;
    bool estimate_noise = false;
};

/// The resolved experiment description: exactly what run.json records.
struct SimulationConfig {
    WaveformConfig waveform;   // carries window, pfa, N', M'
    std::vector<RadarTarget> targets;
    ChannelSettings channel;
    EstimatorSettings estimator;
    DetectorSettings detector;
    std::string output_dir = "out";

    void validate() const;
};

/// Strict JSON loader: unknown keys anywhere are an error. Accepts either a
/// bare config object or a run.json manifest wrapping one under "config".
SimulationConfig load_config(const std::string& path);
SimulationConfig parse_config(const std::string& json_text);
std::string config_to_json(const SimulationConfig& cfg);

/// Named presets mirroring the experiment setups (table1, fig4, fig5, fig6,
/// fig7, fig8, fig9, fig10). Throws ConfigError for unknown names.
SimulationConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace ofdmradar
