#pragma once

// 64-dimensional statistical description of a power curve: ten time-domain
// statistics for each of the four phases, then eight value-domain statistics
// for each of the three power segments.

#include "pmdeg/curve.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pmdeg {

inline constexpr std::size_t kTimeStatCount = 10;
inline constexpr std::size_t kValueStatCount = 8;
inline constexpr std::size_t kFeatureCount = kPhaseCount * kTimeStatCount + kSegmentCount * kValueStatCount;
static_assert(kFeatureCount == 64);

/// out-to-in, max difference, mean, RMS, variance, sum of difference,
/// kurtosis, crest factor, form factor, impulse factor.
using TimeStats = std::array<double, kTimeStatCount>;
/// max time, mean, count, max difference, median, max value, time median, mode.
using ValueStats = std::array<double, kValueStatCount>;

/// Relative variance floor below which a phase counts as constant.
inline constexpr double kConstantVarianceRatio = 1e-20;
/// Mode bin width in kW.
inline constexpr double kModeBinKw = 0.01;

struct FeatureVector {
    std::array<double, kFeatureCount> values{};

    double operator[](std::size_t i) const { return values[i]; }
    Eigen::VectorXd as_eigen() const { return Eigen::Map<const Eigen::VectorXd>(values.data(), kFeatureCount); }
    /// "t1_1" .. "t4_10", "v1_1" .. "v3_8".
    static const std::array<std::string, kFeatureCount>& names();
};

/// 0-based vector index of t(phase, stat), both 1-based as in the feature grid.
constexpr std::size_t time_feature_index(std::size_t phase, std::size_t stat) {
    return (phase - 1) * kTimeStatCount + (stat - 1);
}
/// 0-based vector index of v(segment, stat).
constexpr std::size_t value_feature_index(std::size_t segment, std::size_t stat) {
    return kPhaseCount * kTimeStatCount + (segment - 1) * kValueStatCount + (stat - 1);
}

TimeStats time_stats(std::span<const CurvePoint> phase_points);
ValueStats value_stats(std::span<const CurvePoint> segment_points);
FeatureVector extract(const PowerCurve& curve);
/// One row per curve.
Eigen::MatrixXd extract_matrix(std::span<const PowerCurve> curves);

struct NormalizationModel {
    Eigen::VectorXd min;
    Eigen::VectorXd max;

    Eigen::Index dim() const { return min.size(); }
};

/// Per-column minimum and maximum of a non-empty fit set (rows = samples).
NormalizationModel normalize_fit(const Eigen::MatrixXd& X);
/// Min-max scaling clamped to [0, 1]; constant dimensions map to 0.
Eigen::VectorXd normalize_apply(const NormalizationModel& model, const Eigen::VectorXd& x);
Eigen::MatrixXd normalize_apply_rows(const NormalizationModel& model, const Eigen::MatrixXd& X);

/// Feature matrix CSV: `sample_id` then the 64 canonical names.
void write_feature_csv(const std::filesystem::path& path, std::span<const std::string> sample_ids,
                       const Eigen::MatrixXd& X);

} // namespace pmdeg
