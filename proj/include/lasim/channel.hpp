#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lasim {

/// Parameters of the synthetic per-UE SINR process: a dB-domain Gauss-Markov
/// shadowing track, optionally multiplied (in linear domain) by a Rayleigh
/// fast-fading gain with AR(1) complex-gain correlation.
struct ChannelScenario {
    int num_ues = 1;
    std::vector<double> mean_sinr_db{10.0};
    double shadow_rho = 0.99;      // per-slot AR(1) correlation, [0,1)
    double shadow_sigma_db = 3.0;  // stationary std of the shadow track
    bool fast_fading = true;
    double doppler_corr = 0.97;    // per-slot complex-gain correlation, [0,1)
    int num_slots = 1000;
    std::uint64_t seed = 1;

    void validate() const;

    /// Three-UE scenario with the mean SINRs used throughout the experiment
    /// presets (~26/6/28 dB). Correlation parameters are tuned for slot-scale
    /// link adaptation (channel coherent over tens of slots).
    static ChannelScenario paper_3ue();

    /// Named scenario lookup ("paper-3ue", "single-10db"). Throws on unknown name.
    static ChannelScenario named(const std::string& name);
};

/// Per-UE true SINR sequence, one value per slot.
struct SinrTrace {
    int realization = 0;
    std::vector<std::vector<double>> sinr_db;  // [ue][slot]

    int num_ues() const { return static_cast<int>(sinr_db.size()); }
    int num_slots() const { return sinr_db.empty() ? 0 : static_cast<int>(sinr_db[0].size()); }
    std::uint64_t content_hash() const;  // FNV-1a over raw double bits
};

/// Deterministic given (scenario.seed, realization).
SinrTrace generate(const ChannelScenario& scenario, int realization);

/// CSV exchange format: header `slot,ue,sinr_db`, one row per cell, dense.
SinrTrace load_trace(const std::string& path);
void save_trace(const SinrTrace& trace, const std::string& path);

} // namespace lasim
