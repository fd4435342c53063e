#include "pmdeg/features.hpp"

#include "pmdeg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace pmdeg {

namespace {

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double median_of(std::vector<double> v) {
    const auto n = v.size();
    std::sort(v.begin(), v.end());
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

const std::array<std::string, kFeatureCount>& FeatureVector::names() {
    static const auto table = [] {
        std::array<std::string, kFeatureCount> out;
        for (std::size_t i = 1; i <= kPhaseCount; ++i)
            for (std::size_t j = 1; j <= kTimeStatCount; ++j)
                out[time_feature_index(i, j)] = "t" + std::to_string(i) + "_" + std::to_string(j);
        for (std::size_t m = 1; m <= kSegmentCount; ++m)
            for (std::size_t n = 1; n <= kValueStatCount; ++n)
                out[value_feature_index(m, n)] = "v" + std::to_string(m) + "_" + std::to_string(n);
        return out;
    }();
    return table;
}

TimeStats time_stats(std::span<const CurvePoint> pts) {
    TimeStats s{};
    if (pts.empty()) return s;
    const double n = static_cast<double>(pts.size());

    double sum = 0.0, sum_abs = 0.0, sum_sq = 0.0, max_abs = 0.0, total_variation = 0.0;
    double lo = pts.front().p, hi = pts.front().p;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double p = pts[i].p;
        sum += p;
        sum_abs += std::abs(p);
        sum_sq += p * p;
        max_abs = std::max(max_abs, std::abs(p));
        lo = std::min(lo, p);
        hi = std::max(hi, p);
        if (i > 0) total_variation += std::abs(p - pts[i - 1].p);
    }
    const double mean = sum / n;
    const double mean_abs = sum_abs / n;
    const double mean_sq = sum_sq / n;
    const double rms = std::sqrt(mean_sq);

    double m2 = 0.0, m4 = 0.0;
    for (const auto& pt : pts) {
        const double d = pt.p - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    const double variance = m2 / n;
    const bool constant = variance == 0.0 || variance <= kConstantVarianceRatio * mean_sq;

    s[0] = pts.back().p - pts.front().p;
    s[1] = hi - lo;
    s[2] = mean;
    s[3] = rms;
    s[4] = constant ? 0.0 : variance;
    s[5] = total_variation;
    s[6] = constant ? 0.0 : (m4 / n) / (variance * variance);
    s[7] = safe_div(max_abs, rms);
    s[8] = safe_div(rms, mean_abs);
    s[9] = safe_div(max_abs, mean_abs);
    return s;
}

ValueStats value_stats(std::span<const CurvePoint> pts) {
    ValueStats s{};
    if (pts.empty()) return s;

    std::vector<double> powers, times;
    powers.reserve(pts.size());
    times.reserve(pts.size());
    std::map<long long, std::size_t> bins;
    for (const auto& pt : pts) {
        powers.push_back(pt.p);
        times.push_back(pt.t);
        ++bins[std::llround(pt.p / kModeBinKw)];
    }
    const auto [lo, hi] = std::minmax_element(powers.begin(), powers.end());
    double mean = 0.0;
    for (double p : powers) mean += p;
    mean /= static_cast<double>(powers.size());

    // std::map iterates bins in ascending order, so strict '>' keeps the
    // smallest value on ties.
    long long mode_bin = bins.begin()->first;
    std::size_t mode_count = 0;
    for (const auto& [bin, count] : bins) {
        if (count > mode_count) {
            mode_bin = bin;
            mode_count = count;
        }
    }

    s[0] = *std::max_element(times.begin(), times.end());
    s[1] = mean;
    s[2] = static_cast<double>(pts.size());
    s[3] = *hi - *lo;
    s[4] = median_of(powers);
    s[5] = *hi;
    s[6] = median_of(times);
    s[7] = static_cast<double>(mode_bin) * kModeBinKw;
    return s;
}

FeatureVector extract(const PowerCurve& curve) {
    const auto phases = partition_time(curve);
    const auto segments = partition_value(curve);
    const std::span<const CurvePoint> all(curve.points);

    FeatureVector fv;
    for (std::size_t i = 0; i < kPhaseCount; ++i) {
        const auto& r = phases.phases[i];
        const auto st = time_stats(all.subspan(r.begin, r.size()));
        std::copy(st.begin(), st.end(), fv.values.begin() + static_cast<std::ptrdiff_t>(time_feature_index(i + 1, 1)));
    }
    std::vector<CurvePoint> gathered;
    for (std::size_t m = 0; m < kSegmentCount; ++m) {
        gathered.clear();
        for (std::size_t idx : segments.segments[m]) gathered.push_back(curve.points[idx]);
        const auto st = value_stats(gathered);
        std::copy(st.begin(), st.end(), fv.values.begin() + static_cast<std::ptrdiff_t>(value_feature_index(m + 1, 1)));
    }
    return fv;
}

Eigen::MatrixXd extract_matrix(std::span<const PowerCurve> curves) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(curves.size()), static_cast<Eigen::Index>(kFeatureCount));
    for (std::size_t i = 0; i < curves.size(); ++i) X.row(static_cast<Eigen::Index>(i)) = extract(curves[i]).as_eigen();
    return X;
}

NormalizationModel normalize_fit(const Eigen::MatrixXd& X) {
    require(X.rows() > 0, "normalize_fit: empty fit set");
    require(X.allFinite(), "normalize_fit: non-finite values");
    return {X.colwise().minCoeff().transpose(), X.colwise().maxCoeff().transpose()};
}

Eigen::VectorXd normalize_apply(const NormalizationModel& model, const Eigen::VectorXd& x) {
    require(x.size() == model.dim(), "normalize_apply: dimension mismatch");
    Eigen::VectorXd out(x.size());
    for (Eigen::Index d = 0; d < x.size(); ++d) {
        const double span = model.max[d] - model.min[d];
        out[d] = span > 0.0 ? std::clamp((x[d] - model.min[d]) / span, 0.0, 1.0) : 0.0;
    }
    return out;
}

Eigen::MatrixXd normalize_apply_rows(const NormalizationModel& model, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd out(X.rows(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out.row(i) = normalize_apply(model, X.row(i).transpose()).transpose();
    return out;
}

void write_feature_csv(const std::filesystem::path& path, std::span<const std::string> sample_ids,
                       const Eigen::MatrixXd& X) {
    require(static_cast<Eigen::Index>(sample_ids.size()) == X.rows() && X.cols() == static_cast<Eigen::Index>(kFeatureCount),
            "write_feature_csv: shape mismatch");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out << "sample_id";
    for (const auto& name : FeatureVector::names()) out << ',' << name;
    out << '\n';
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        out << sample_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < X.cols(); ++j) out << ',' << format_double(X(i, j), 9);
        out << '\n';
    }
}

} // namespace pmdeg
