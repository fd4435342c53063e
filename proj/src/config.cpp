#include "pmdeg/pipeline.hpp"

#include "pmdeg/errors.hpp"
#include "pmdeg/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace pmdeg {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
    return out;
}

long long to_integer(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
    return out;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("config: '" + key + "' expects an unsigned integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

template <std::size_t N>
std::string join(const std::array<double, N>& a) {
    std::string s;
    for (std::size_t i = 0; i < N; ++i) s += (i ? "," : "") + num(a[i]);
    return s;
}

template <std::size_t N>
void set_array(const std::string& key, const std::string& v, std::array<double, N>& a) {
    const auto parts = split_list(v);
    if (parts.size() != N) throw ConfigError("config: '" + key + "' expects " + std::to_string(N) + " values");
    for (std::size_t i = 0; i < N; ++i) a[i] = to_double(key, parts[i]);
}

struct Entry {
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

using Registry = std::map<std::string, Entry>;

template <typename Field>
Entry real(Field field) {
    return {[field](const RunConfig& c) { return num(field(const_cast<RunConfig&>(c))); },
            [field](RunConfig& c, const std::string& k, const std::string& v) { field(c) = to_double(k, v); }};
}

template <typename Field>
Entry integer(Field field) {
    return {[field](const RunConfig& c) { return std::to_string(field(const_cast<RunConfig&>(c))); },
            [field](RunConfig& c, const std::string& k, const std::string& v) {
                field(c) = static_cast<std::remove_reference_t<decltype(field(c))>>(to_integer(k, v));
            }};
}

template <typename Field>
Entry path(Field field) {
    return {[field](const RunConfig& c) { return field(const_cast<RunConfig&>(c)).generic_string(); },
            [field](RunConfig& c, const std::string&, const std::string& v) { field(c) = v; }};
}

template <typename Field>
Entry array(Field field) {
    return {[field](const RunConfig& c) { return join(field(const_cast<RunConfig&>(c))); },
            [field](RunConfig& c, const std::string& k, const std::string& v) { set_array(k, v, field(c)); }};
}

std::string counts_text(const std::map<State, int>& counts) {
    std::string s;
    for (const auto& [state, n] : counts) s += (s.empty() ? "" : ",") + std::string(to_string(state)) + "=" + std::to_string(n);
    return s;
}

#define PM_FIELD(expr) [](RunConfig& c) -> auto& { return c.expr; }

const Registry& registry() {
    static const Registry r = [] {
        Registry m;
        m["seed"] = {[](const RunConfig& c) { return std::to_string(c.seed); },
                     [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = to_unsigned(k, v); }};
        m["synth.counts"] = {[](const RunConfig& c) { return counts_text(c.counts); },
                             [](RunConfig& c, const std::string&, const std::string& v) {
                                 c.counts = v == "preset" ? preset_counts() : parse_counts(v);
                             }};

        m["generator.sample_period"] = real(PM_FIELD(generator.sample_period));
        m["generator.normal_duration"] = real(PM_FIELD(generator.normal_duration));
        m["generator.startup_dead_time"] = real(PM_FIELD(generator.startup_dead_time));
        m["generator.peak_low_kw"] = real(PM_FIELD(generator.peak_low_kw));
        m["generator.peak_high_kw"] = real(PM_FIELD(generator.peak_high_kw));
        m["generator.peak_jitter_sd_kw"] = real(PM_FIELD(generator.peak_jitter_sd_kw));
        m["generator.release_rise_s"] = real(PM_FIELD(generator.release_rise_s));
        m["generator.release_fall_s"] = real(PM_FIELD(generator.release_fall_s));
        m["generator.switch_level_kw"] = real(PM_FIELD(generator.switch_level_kw));
        m["generator.slow_release_level_kw"] = real(PM_FIELD(generator.slow_release_level_kw));
        m["generator.zero_tail_s"] = real(PM_FIELD(generator.zero_tail_s));
        m["generator.noise_sd_kw"] = real(PM_FIELD(generator.noise_sd_kw));
        m["generator.time_limit_s"] = real(PM_FIELD(generator.time_limit_s));
        m["generator.f1_peak_kw"] = real(PM_FIELD(generator.f1_peak_kw));
        m["generator.f1_post_peak_kw"] = real(PM_FIELD(generator.f1_post_peak_kw));
        m["generator.f1_working_offset_kw"] = real(PM_FIELD(generator.f1_working_offset_kw));
        m["generator.f2_switch_offset_kw"] = real(PM_FIELD(generator.f2_switch_offset_kw));
        m["generator.f2_noise_multiplier"] = real(PM_FIELD(generator.f2_noise_multiplier));
        m["generator.f3_onset_s"] = real(PM_FIELD(generator.f3_onset_s));
        m["generator.f3_level_kw"] = real(PM_FIELD(generator.f3_level_kw));
        m["generator.f3_noise_multiplier"] = real(PM_FIELD(generator.f3_noise_multiplier));
        m["generator.f4_onset_s"] = real(PM_FIELD(generator.f4_onset_s));
        m["generator.f4_level_kw"] = real(PM_FIELD(generator.f4_level_kw));
        m["generator.f4_noise_multiplier"] = real(PM_FIELD(generator.f4_noise_multiplier));
        m["generator.f5_slow_release_kw"] = real(PM_FIELD(generator.f5_slow_release_kw));
        m["generator.f6_slow_release_kw"] = real(PM_FIELD(generator.f6_slow_release_kw));
        m["generator.f6_drop_fraction"] = real(PM_FIELD(generator.f6_drop_fraction));
        m["generator.d123_switch_offset_kw"] = array(PM_FIELD(generator.d123_switch_offset_kw));
        m["generator.d123_switch_noise_multiplier"] = array(PM_FIELD(generator.d123_switch_noise_multiplier));
        m["generator.d45_peak_scale"] = array(PM_FIELD(generator.d45_peak_scale));
        m["generator.d45_lock_offset_kw"] = array(PM_FIELD(generator.d45_lock_offset_kw));
        m["generator.d45_lock_noise_multiplier"] = array(PM_FIELD(generator.d45_lock_noise_multiplier));
        m["generator.d6_scale"] = real(PM_FIELD(generator.d6_scale));
        m["generator.nonfault_mix"] = array(PM_FIELD(generator.nonfault_mix));

        m["data.standard"] = path(PM_FIELD(data.standard));
        m["data.nonfault"] = path(PM_FIELD(data.nonfault));
        m["data.degradation"] = path(PM_FIELD(data.degradation));
        m["data.classify"] = path(PM_FIELD(data.classify));
        m["data.truth"] = path(PM_FIELD(data.truth));
        m["bundle"] = path(PM_FIELD(bundle));

        m["features.kpca_sigma"] = real(PM_FIELD(kpca_sigma));
        m["features.kpca_components"] = integer(PM_FIELD(kpca_components));

        m["mining.base_grid"] = integer(PM_FIELD(mining.base_grid));
        m["mining.density_m"] = {[](const RunConfig& c) { return c.mining.density_m ? num(*c.mining.density_m) : "auto"; },
                                 [](RunConfig& c, const std::string& k, const std::string& v) {
                                     if (v == "auto") c.mining.density_m.reset();
                                     else c.mining.density_m = to_double(k, v);
                                 }};
        m["mining.merge_tolerance"] = real(PM_FIELD(mining.merge_tolerance));
        m["mining.min_state_size"] = integer(PM_FIELD(mining.min_state_size));
        m["mining.normal_first_pc_threshold"] = real(PM_FIELD(mining.normal_first_pc_threshold));
        m["mining.normal_radius_scale"] = real(PM_FIELD(mining.normal_radius_scale));
        m["mining.use_reference"] = {[](const RunConfig& c) { return std::string(c.mining_use_reference ? "true" : "false"); },
                                     [](RunConfig& c, const std::string& k, const std::string& v) {
                                         c.mining_use_reference = to_bool(k, v);
                                     }};
        m["som.ordering_iterations"] = integer(PM_FIELD(mining.som.ordering_iterations));
        m["som.convergence_epochs"] = integer(PM_FIELD(mining.som.convergence_epochs));
        m["som.initial_learning_rate"] = real(PM_FIELD(mining.som.initial_learning_rate));
        m["som.convergence_learning_rate"] = real(PM_FIELD(mining.som.convergence_learning_rate));
        m["som.initial_radius"] = {[](const RunConfig& c) {
                                       return c.mining.som.initial_radius ? num(*c.mining.som.initial_radius) : "auto";
                                   },
                                   [](RunConfig& c, const std::string& k, const std::string& v) {
                                       if (v == "auto") c.mining.som.initial_radius.reset();
                                       else c.mining.som.initial_radius = to_double(k, v);
                                   }};

        m["svm.C"] = real(PM_FIELD(svm.C));
        m["svm.sigma"] = real(PM_FIELD(svm.sigma));
        m["svm.tolerance"] = real(PM_FIELD(svm.tolerance));
        m["svm.max_passes"] = integer(PM_FIELD(svm.max_passes));

        m["pso.particles"] = integer(PM_FIELD(pso.particles));
        m["pso.max_iterations"] = integer(PM_FIELD(pso.max_iterations));
        m["pso.c1"] = real(PM_FIELD(pso.c1));
        m["pso.c2"] = real(PM_FIELD(pso.c2));
        m["pso.w_min"] = real(PM_FIELD(pso.w_min));
        m["pso.w_max"] = real(PM_FIELD(pso.w_max));
        m["pso.C_min"] = real([](RunConfig& c) -> auto& { return c.pso.lower[0]; });
        m["pso.C_max"] = real([](RunConfig& c) -> auto& { return c.pso.upper[0]; });
        m["pso.kernel_min"] = real([](RunConfig& c) -> auto& { return c.pso.lower[1]; });
        m["pso.kernel_max"] = real([](RunConfig& c) -> auto& { return c.pso.upper[1]; });
        m["pso.kernel_param"] = {[](const RunConfig& c) { return std::string(to_string(c.pso_kernel_param)); },
                                 [](RunConfig& c, const std::string&, const std::string& v) {
                                     c.pso_kernel_param = parse_kernel_param(v);
                                 }};
        m["pso.fitness_target"] = {[](const RunConfig& c) { return c.pso.fitness_target ? num(*c.pso.fitness_target) : "none"; },
                                   [](RunConfig& c, const std::string& k, const std::string& v) {
                                       if (v == "none") c.pso.fitness_target.reset();
                                       else c.pso.fitness_target = to_double(k, v);
                                   }};

        m["train.folds"] = integer(PM_FIELD(folds));
        m["train.repeats"] = integer(PM_FIELD(repeats));
        m["train.split_ratio"] = {[](const RunConfig& c) { return std::to_string(c.split_train) + ":" + std::to_string(c.split_test); },
                                  [](RunConfig& c, const std::string& k, const std::string& v) {
                                      const auto colon = v.find(':');
                                      if (colon == std::string::npos) throw ConfigError("config: '" + k + "' expects a:b");
                                      c.split_train = static_cast<int>(to_integer(k, trim(v.substr(0, colon))));
                                      c.split_test = static_cast<int>(to_integer(k, trim(v.substr(colon + 1))));
                                  }};
        m["ablation.variants"] = {[](const RunConfig& c) {
                                      std::string s;
                                      for (const auto& v : c.ablation_variants) s += (s.empty() ? "" : ",") + v;
                                      return s;
                                  },
                                  [](RunConfig& c, const std::string&, const std::string& v) { c.ablation_variants = split_list(v); }};
        return m;
    }();
    return r;
}

#undef PM_FIELD

const std::vector<std::string> kPathKeys = {"data.standard", "data.nonfault", "data.degradation",
                                            "data.classify", "data.truth",   "bundle"};

} // namespace

std::uint64_t stream_seed(std::uint64_t seed, SeedStream stream, std::uint64_t index) {
    return derive_seed(seed, static_cast<std::uint64_t>(stream) + index);
}

RunConfig::RunConfig() : pso(svm_pso_defaults()), ablation_variants(default_ablation_variants()) {
    pso.fitness_target = 1.0;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    const auto& r = registry();
    const auto it = r.find(key);
    if (it == r.end()) throw ConfigError("config: unknown key '" + key + "'");
    it->second.set(*this, key, value);
}

void RunConfig::validate() const {
    generator.validate();
    for (const auto& [state, n] : counts)
        if (n < 0) throw ConfigError("config: negative count for " + std::string(to_string(state)));
    if (!(kpca_sigma > 0.0)) throw ConfigError("config: features.kpca_sigma must be > 0");
    if (kpca_components < 1) throw ConfigError("config: features.kpca_components must be >= 1");
    mining.validate();
    svm.validate();
    pso.validate();
    if (pso.dim() != 2) throw ConfigError("config: PSO searches exactly (C, sigma)");
    if (folds < 2) throw ConfigError("config: train.folds must be >= 2");
    if (repeats < 1) throw ConfigError("config: train.repeats must be >= 1");
    if (split_train < 1 || split_test < 1) throw ConfigError("config: train.split_ratio parts must be >= 1");
    if (ablation_variants.empty()) throw ConfigError("config: ablation.variants is empty");
    for (const auto& v : ablation_variants)
        if (std::find(default_ablation_variants().begin(), default_ablation_variants().end(), v) ==
            default_ablation_variants().end())
            throw ConfigError("config: unknown ablation variant '" + v + "'");
}

std::string RunConfig::canonical_text() const {
    std::string out;
    for (const auto& [key, entry] : registry()) out += key + " = " + entry.get(*this) + "\n";
    return out;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, entry] : registry()) j[key] = entry.get(*this);
    return j;
}

std::map<State, int> parse_counts(const std::string& text) {
    std::map<State, int> counts;
    for (const auto& item : split_list(text)) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("counts: expected STATE=n, got '" + item + "'");
        State s;
        try {
            s = parse_state(trim(item.substr(0, eq)));
        } catch (const DataError& e) {
            throw ConfigError(std::string("counts: ") + e.what());
        }
        const auto n = to_integer("counts", trim(item.substr(eq + 1)));
        if (n < 0) throw ConfigError("counts: negative count in '" + item + "'");
        counts[s] = static_cast<int>(n);
    }
    return counts;
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!base_dir.empty() && std::find(kPathKeys.begin(), kPathKeys.end(), key) != kPathKeys.end() &&
            !value.empty() && std::filesystem::path(value).is_relative())
            value = (base_dir / value).lexically_normal().generic_string();
        c.set(key, value);
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path.parent_path());
}

} // namespace pmdeg
