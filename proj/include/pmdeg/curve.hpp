#pragma once

// Power-curve data model: one turnout conversion sampled as (t, p) points,
// plus the fixed time-phase and value-segment partitions used by feature
// extraction.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pmdeg {

enum class State : std::uint8_t {
    N,
    F1, F2, F3, F4, F5, F6,
    D1, D2, D3, D4, D5, D6,
    NonfaultUnlabeled,
};

inline constexpr std::array<State, 14> kAllStates = {
    State::N,  State::F1, State::F2, State::F3, State::F4, State::F5, State::F6,
    State::D1, State::D2, State::D3, State::D4, State::D5, State::D6, State::NonfaultUnlabeled};

std::string_view to_string(State s);
/// Accepts the canonical names ("N", "F3", "D6", "NONFAULT_UNLABELED").
State parse_state(std::string_view name);
bool is_fault(State s);
bool is_degradation(State s);
/// 1..6 for F1..F6 / D1..D6, 0 otherwise.
int state_index(State s);
State fault_state(int index);
State degradation_state(int index);

struct CurvePoint {
    double t = 0.0; ///< seconds from operation start
    double p = 0.0; ///< kW
};

struct PowerCurve {
    std::string sample_id;
    std::vector<CurvePoint> points;
    std::optional<State> label;

    /// Throws DataError unless points are non-empty, t[0] = 0, t strictly
    /// increasing and finite, p finite and >= 0.
    void validate() const;
    double duration() const { return points.empty() ? 0.0 : points.back().t; }
};

/// Half-open [begin, end) index range into PowerCurve::points.
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
    bool empty() const { return begin == end; }
};

inline constexpr std::size_t kPhaseCount = 4;
inline constexpr std::size_t kSegmentCount = 3;
/// Phase start times in seconds: start-release, switch, lock, indication.
inline constexpr std::array<double, kPhaseCount> kPhaseStarts = {0.0, 1.0, 4.0, 5.0};
/// Slow-release < 0.3 kW <= switch < 0.7 kW <= release.
inline constexpr double kSwitchSegmentLow = 0.3;
inline constexpr double kReleaseSegmentLow = 0.7;

struct PhasePartition {
    std::array<IndexRange, kPhaseCount> phases;
};

struct ValueSegmentation {
    std::array<std::vector<std::size_t>, kSegmentCount> segments;
};

PhasePartition partition_time(const PowerCurve& curve);
ValueSegmentation partition_value(const PowerCurve& curve);
/// Segment index 0..2 for a single power value.
std::size_t value_segment_of(double p);

// ---- CSV formats ---------------------------------------------------------

/// Curve CSV: header `t_s,power_kw`, one point per row.
PowerCurve parse_curve_csv(std::istream& in, std::string sample_id);
PowerCurve read_curve_csv(const std::filesystem::path& path, std::string sample_id);
void write_curve_csv(std::ostream& out, const PowerCurve& curve);
void write_curve_csv(const std::filesystem::path& path, const PowerCurve& curve);

struct ManifestEntry {
    std::string sample_id;
    State label = State::NonfaultUnlabeled; ///< empty label column <-> NonfaultUnlabeled
    std::filesystem::path path;              ///< as written (relative to manifest dir)
};

/// Manifest CSV: header `sample_id,label,path`.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);

/// Loads every curve listed in a manifest. Relative paths resolve against the
/// manifest's directory. Labels come from the manifest.
std::vector<PowerCurve> load_dataset(const std::filesystem::path& manifest_path);

struct TruthEntry {
    std::string sample_id;
    State true_label = State::N;
};

/// Ground-truth sidecar CSV: header `sample_id,true_label`.
std::vector<TruthEntry> read_truth(const std::filesystem::path& path);
void write_truth(const std::filesystem::path& path, std::span<const TruthEntry> entries);

/// Small CSV helpers shared by the file formats in this library.
std::vector<std::string> split_csv_line(std::string_view line);
std::string format_double(double value, int precision);

} // namespace pmdeg
