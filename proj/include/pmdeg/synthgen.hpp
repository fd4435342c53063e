#pragma once

// Parametric S700K-style power-curve generator for the normal state, the six
// fault states and the six degradation states.
//
// The template is piecewise: a dead interval at zero power, a triangular
// release peak, a noisy switch plateau through phases 1-3, a slow-release
// plateau in phase 4 and a short zero tail. Each state perturbs one part of
// that template. Noise is additive Gaussian, clipped at zero, and only added
// where the template level is positive.

#include "pmdeg/curve.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

namespace pmdeg {

struct GeneratorConfig {
    double sample_period = 0.04;
    double normal_duration = 6.6;
    double startup_dead_time = 0.2;
    double peak_low_kw = 1.0;
    double peak_high_kw = 2.0;
    /// The peak is drawn around the centre of [peak_low, peak_high] with this
    /// SD and clamped into the interval.
    double peak_jitter_sd_kw = 0.05;
    double release_rise_s = 0.16;
    double release_fall_s = 0.28;
    double switch_level_kw = 0.5;
    double slow_release_level_kw = 0.2;
    double zero_tail_s = 0.2;
    double noise_sd_kw = 0.02;
    /// Motor-circuit cutoff for prolonged (idling) faults.
    double time_limit_s = 13.0;

    double f1_peak_kw = 4.2;
    double f1_post_peak_kw = 0.62; ///< phase-1 level after the F1 peak
    double f1_working_offset_kw = 0.12; ///< added to the switch and lock levels
    double f2_switch_offset_kw = 0.3;
    double f2_noise_multiplier = 6.0;
    double f3_onset_s = 1.4;
    double f3_level_kw = 0.85;
    double f3_noise_multiplier = 0.5;
    double f4_onset_s = 4.2;
    double f4_level_kw = 0.8;
    double f4_noise_multiplier = 5.0;
    double f5_slow_release_kw = 0.4;
    double f6_slow_release_kw = 0.0;
    double f6_drop_fraction = 0.75; ///< share of the slow-release plateau before the F6 drop

    std::array<double, 3> d123_switch_offset_kw = {0.05, 0.10, 0.15};
    std::array<double, 3> d123_switch_noise_multiplier = {1.5, 2.5, 3.5};
    std::array<double, 2> d45_peak_scale = {0.85, 0.75};
    std::array<double, 2> d45_lock_offset_kw = {0.10, 0.20};
    std::array<double, 2> d45_lock_noise_multiplier = {2.0, 3.0};
    double d6_scale = 0.8;

    /// Relative weights of N, D1..D6 inside a NONFAULT_UNLABELED pool.
    std::array<double, 7> nonfault_mix = {3.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};

    /// Throws ConfigError on violated invariants.
    void validate() const;
};

/// Deterministic in (state, config, seed). NonfaultUnlabeled is rejected:
/// pool membership is resolved by generate_dataset.
PowerCurve generate_curve(State state, const GeneratorConfig& config, std::uint64_t seed);

struct SyntheticDataset {
    std::vector<PowerCurve> curves;       ///< label = emitted label
    std::vector<ManifestEntry> manifest;  ///< paths "curves/<id>.csv"
    std::vector<TruthEntry> truth;        ///< true state of every curve
};

/// Curves are emitted grouped by state in State order. A NonfaultUnlabeled
/// count draws a pool whose true states follow config.nonfault_mix
/// (largest-remainder allocation, then a seeded shuffle).
SyntheticDataset generate_dataset(const std::map<State, int>& counts, const GeneratorConfig& config,
                                  std::uint64_t seed);

/// 20 N + 20 of each fault + 1000 nonfault.
std::map<State, int> preset_counts();

/// Writes manifest.csv, truth.csv and curves/*.csv under out_dir.
void write_dataset(const std::filesystem::path& out_dir, const SyntheticDataset& dataset);

} // namespace pmdeg
