#include "pmdeg/synthgen.hpp"

#include "pmdeg/errors.hpp"
#include "pmdeg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace pmdeg {

namespace {

enum class Prolong { None, Switch, Lock };

struct Shape {
    double peak = 0.0;
    double phase1_level = 0.0;
    double switch_level = 0.0;
    double switch_noise = 1.0;
    double lock_level = 0.0;
    double lock_noise = 1.0;
    double slow_release_level = 0.0;
    double slow_release_late_level = 0.0;
    double slow_release_cut = 0.0; ///< start of the late part of the slow-release plateau
    double scale = 1.0;
    Prolong prolong = Prolong::None;
    double prolong_onset = 0.0;
    double prolong_level = 0.0;
    double prolong_noise = 1.0;
};

Shape shape_for(State state, const GeneratorConfig& c, std::mt19937_64& rng) {
    const double centre = 0.5 * (c.peak_low_kw + c.peak_high_kw);
    std::normal_distribution<double> jitter(0.0, c.peak_jitter_sd_kw);
    const double normal_peak = std::clamp(centre + jitter(rng), c.peak_low_kw, c.peak_high_kw);

    Shape s;
    s.peak = normal_peak;
    s.phase1_level = c.switch_level_kw;
    s.switch_level = c.switch_level_kw;
    s.lock_level = c.switch_level_kw;
    s.slow_release_level = c.slow_release_level_kw;
    s.slow_release_late_level = c.slow_release_level_kw;
    s.slow_release_cut = kPhaseStarts[3];

    switch (state) {
    case State::N: break;
    case State::F1:
        s.peak = c.f1_peak_kw + (normal_peak - centre);
        s.phase1_level = c.f1_post_peak_kw;
        s.switch_level += c.f1_working_offset_kw;
        s.lock_level += c.f1_working_offset_kw;
        break;
    case State::F2:
        s.switch_level += c.f2_switch_offset_kw;
        s.switch_noise = c.f2_noise_multiplier;
        break;
    case State::F3:
        s.prolong = Prolong::Switch;
        s.prolong_onset = c.f3_onset_s;
        s.prolong_level = c.f3_level_kw;
        s.prolong_noise = c.f3_noise_multiplier;
        break;
    case State::F4:
        s.prolong = Prolong::Lock;
        s.prolong_onset = c.f4_onset_s;
        s.prolong_level = c.f4_level_kw;
        s.prolong_noise = c.f4_noise_multiplier;
        break;
    case State::F5:
        s.slow_release_level = c.f5_slow_release_kw;
        s.slow_release_late_level = c.f5_slow_release_kw;
        break;
    case State::F6:
        s.slow_release_late_level = c.f6_slow_release_kw;
        s.slow_release_cut += c.f6_drop_fraction * (c.normal_duration - c.zero_tail_s - kPhaseStarts[3]);
        break;
    case State::D1:
    case State::D2:
    case State::D3: {
        const auto k = static_cast<std::size_t>(state_index(state) - 1);
        s.switch_level += c.d123_switch_offset_kw[k];
        s.switch_noise = c.d123_switch_noise_multiplier[k];
        break;
    }
    case State::D4:
    case State::D5: {
        const auto k = static_cast<std::size_t>(state_index(state) - 4);
        s.peak *= c.d45_peak_scale[k];
        s.lock_level += c.d45_lock_offset_kw[k];
        s.lock_noise = c.d45_lock_noise_multiplier[k];
        break;
    }
    case State::D6: s.scale = c.d6_scale; break;
    case State::NonfaultUnlabeled: throw DataError("generate_curve needs a concrete state");
    }
    return s;
}

// Template level and noise multiplier at time t.
std::pair<double, double> level_at(double t, bool last_point, const Shape& s, const GeneratorConfig& c) {
    const double rise_end = c.startup_dead_time + c.release_rise_s;
    const double fall_end = rise_end + c.release_fall_s;
    if (t < c.startup_dead_time) return {0.0, 0.0};
    if (t < rise_end) return {s.peak * (t - c.startup_dead_time) / c.release_rise_s, 1.0};
    if (t < fall_end) return {s.peak + (s.phase1_level - s.peak) * (t - rise_end) / c.release_fall_s, 1.0};
    if (t < kPhaseStarts[1]) return {s.phase1_level, 1.0};
    if (s.prolong != Prolong::None && t >= s.prolong_onset) {
        if (last_point) return {0.0, 0.0};
        return {s.prolong_level, s.prolong_noise};
    }
    if (t < kPhaseStarts[2]) return {s.switch_level, s.switch_noise};
    if (t < kPhaseStarts[3]) return {s.lock_level, s.lock_noise};
    if (t < s.slow_release_cut) return {s.slow_release_level, 1.0};
    if (t < c.normal_duration - c.zero_tail_s) return {s.slow_release_late_level, 1.0};
    return {0.0, 0.0};
}

} // namespace

void GeneratorConfig::validate() const {
    auto check = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("generator config: ") + what);
    };
    check(sample_period > 0 && normal_duration > 0 && startup_dead_time > 0, "durations must be > 0");
    check(release_rise_s > 0 && release_fall_s > 0 && zero_tail_s >= 0, "release timings must be > 0");
    check(time_limit_s > normal_duration, "time_limit_s must exceed normal_duration");
    check(peak_low_kw > 0 && peak_high_kw <= 10 && peak_low_kw <= peak_high_kw, "peak range must lie in (0, 10]");
    check(f6_drop_fraction >= 0 && f6_drop_fraction <= 1, "f6_drop_fraction must lie in [0, 1]");
    check(noise_sd_kw >= 0 && peak_jitter_sd_kw >= 0, "noise SDs must be >= 0");
    check(std::all_of(nonfault_mix.begin(), nonfault_mix.end(), [](double w) { return w >= 0; }) &&
              std::accumulate(nonfault_mix.begin(), nonfault_mix.end(), 0.0) > 0,
          "nonfault_mix weights must be >= 0 and not all zero");
}

PowerCurve generate_curve(State state, const GeneratorConfig& config, std::uint64_t seed) {
    config.validate();
    std::mt19937_64 rng = seeded_engine(seed, static_cast<std::uint64_t>(state));
    const Shape shape = shape_for(state, config, rng);
    std::normal_distribution<double> noise(0.0, 1.0);

    const bool prolonged = shape.prolong != Prolong::None;
    const double end = prolonged ? config.time_limit_s : config.normal_duration;
    const auto count = prolonged ? static_cast<std::size_t>(std::floor(end / config.sample_period + 1e-9)) + 1
                                 : static_cast<std::size_t>(std::ceil(end / config.sample_period - 1e-9));

    PowerCurve curve;
    curve.label = state;
    curve.points.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double t = static_cast<double>(k) * config.sample_period;
        auto [level, noise_mult] = level_at(t, prolonged && k + 1 == count, shape, config);
        level *= shape.scale;
        double p = level;
        const double z = noise(rng);
        if (level > 0.0) p = std::max(0.0, level + z * config.noise_sd_kw * noise_mult);
        curve.points.push_back({t, p});
    }
    return curve;
}

std::map<State, int> preset_counts() {
    std::map<State, int> counts{{State::N, 20}, {State::NonfaultUnlabeled, 1000}};
    for (int f = 1; f <= 6; ++f) counts[fault_state(f)] = 20;
    return counts;
}

SyntheticDataset generate_dataset(const std::map<State, int>& counts, const GeneratorConfig& config,
                                  std::uint64_t seed) {
    config.validate();
    for (const auto& [state, n] : counts)
        if (n < 0) throw DataError("negative count for " + std::string(to_string(state)));

    SyntheticDataset ds;
    std::size_t index = 0;
    auto emit = [&](State true_state, State emitted) {
        char id[32];
        std::snprintf(id, sizeof(id), "c%05zu", index);
        PowerCurve curve = generate_curve(true_state, config, derive_seed(seed, index));
        curve.sample_id = id;
        curve.label = emitted;
        ds.manifest.push_back({curve.sample_id, emitted, std::filesystem::path("curves") / (curve.sample_id + ".csv")});
        ds.truth.push_back({curve.sample_id, true_state});
        ds.curves.push_back(std::move(curve));
        ++index;
    };

    for (State state : kAllStates) {
        const auto it = counts.find(state);
        if (it == counts.end() || it->second == 0) continue;
        const int n = it->second;
        if (state != State::NonfaultUnlabeled) {
            for (int i = 0; i < n; ++i) emit(state, state);
            continue;
        }
        // Largest-remainder allocation of the pool over N, D1..D6.
        const double total = std::accumulate(config.nonfault_mix.begin(), config.nonfault_mix.end(), 0.0);
        std::array<int, 7> alloc{};
        std::array<double, 7> remainder{};
        int assigned = 0;
        for (std::size_t k = 0; k < 7; ++k) {
            const double exact = n * config.nonfault_mix[k] / total;
            alloc[k] = static_cast<int>(std::floor(exact));
            remainder[k] = exact - alloc[k];
            assigned += alloc[k];
        }
        std::array<std::size_t, 7> order{};
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return remainder[a] > remainder[b]; });
        for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++alloc[order[k % 7]];

        std::vector<State> pool;
        pool.reserve(static_cast<std::size_t>(n));
        for (std::size_t k = 0; k < 7; ++k)
            pool.insert(pool.end(), static_cast<std::size_t>(alloc[k]), k == 0 ? State::N : degradation_state(static_cast<int>(k)));
        auto shuffle_rng = seeded_engine(seed, 0x706f6f6cULL);
        std::shuffle(pool.begin(), pool.end(), shuffle_rng);
        for (State s : pool) emit(s, State::NonfaultUnlabeled);
    }
    return ds;
}

void write_dataset(const std::filesystem::path& out_dir, const SyntheticDataset& dataset) {
    std::filesystem::create_directories(out_dir / "curves");
    for (std::size_t i = 0; i < dataset.curves.size(); ++i)
        write_curve_csv(out_dir / dataset.manifest[i].path, dataset.curves[i]);
    write_manifest(out_dir / "manifest.csv", dataset.manifest);
    write_truth(out_dir / "truth.csv", dataset.truth);
}

} // namespace pmdeg
