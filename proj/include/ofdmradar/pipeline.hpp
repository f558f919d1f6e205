#pragma once

#include <cstdint>
#include <optional>

#include "ofdmradar/config.hpp"
#include "ofdmradar/grid.hpp"
#include "ofdmradar/periodogram.hpp"

namespace ofdmradar {

struct PipelineResult {
    std::vector<Detection> detections;
    ChannelRealization realization;
    double sigma2_used = 0.0;       // noise power fed to the threshold
    double threshold = 0.0;
    std::size_t sft_samples_used = 0;   // fps-sft only
    std::size_t sft_iterations = 0;
    RealGrid map;                   // periodogram surface (when requested)
};

/// Channel estimate for one transmitted/received frame pair under the
/// configured estimator. For zcp-ls the transmitted grid is the precoded one.
ComplexGrid estimate_channel(const ComplexGrid& y, const ComplexGrid& x_transmitted,
                             const SimulationConfig& cfg);

/// Full frame -> channel -> estimator -> detector chain. seed_override
/// replaces the config seed (per-trial derivations). want_map additionally
/// keeps the range-Doppler surface for file outputs.
PipelineResult run_pipeline(const SimulationConfig& cfg,
                            std::optional<std::uint64_t> seed_override = std::nullopt,
                            bool want_map = false);

}  // namespace ofdmradar
