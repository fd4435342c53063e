#include "pmdeg/curve.hpp"

#include "pmdeg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace pmdeg {

namespace {

constexpr std::array<std::string_view, 14> kStateNames = {
    "N",  "F1", "F2", "F3", "F4", "F5", "F6",
    "D1", "D2", "D3", "D4", "D5", "D6", "NONFAULT_UNLABELED"};

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

double parse_number(const std::string& text, const std::string& context) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw DataError(context + ": not a number '" + text + "'");
    }
    if (used != text.size()) throw DataError(context + ": trailing characters in '" + text + "'");
    return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

} // namespace

std::string_view to_string(State s) { return kStateNames[static_cast<std::size_t>(s)]; }

State parse_state(std::string_view name) {
    for (std::size_t i = 0; i < kStateNames.size(); ++i)
        if (kStateNames[i] == name) return static_cast<State>(i);
    throw DataError("unknown state label '" + std::string(name) + "'");
}

bool is_fault(State s) { return s >= State::F1 && s <= State::F6; }
bool is_degradation(State s) { return s >= State::D1 && s <= State::D6; }

int state_index(State s) {
    if (is_fault(s)) return static_cast<int>(s) - static_cast<int>(State::F1) + 1;
    if (is_degradation(s)) return static_cast<int>(s) - static_cast<int>(State::D1) + 1;
    return 0;
}

State fault_state(int index) {
    if (index < 1 || index > 6) throw DataError("fault index out of range");
    return static_cast<State>(static_cast<int>(State::F1) + index - 1);
}

State degradation_state(int index) {
    if (index < 1 || index > 6) throw DataError("degradation index out of range");
    return static_cast<State>(static_cast<int>(State::D1) + index - 1);
}

void PowerCurve::validate() const {
    const std::string who = sample_id.empty() ? std::string("curve") : "curve '" + sample_id + "'";
    if (points.empty()) throw DataError(who + " is empty");
    if (points.front().t != 0.0) throw DataError(who + " must start at t = 0");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& pt = points[i];
        if (!std::isfinite(pt.t) || !std::isfinite(pt.p))
            throw DataError(who + " has a non-finite value at row " + std::to_string(i));
        if (pt.p < 0.0) throw DataError(who + " has negative power at row " + std::to_string(i));
        if (i > 0 && !(pt.t > points[i - 1].t))
            throw DataError(who + " timestamps not strictly increasing at row " + std::to_string(i));
    }
}

PhasePartition partition_time(const PowerCurve& curve) {
    curve.validate();
    const auto& pts = curve.points;
    auto first_at_or_after = [&](double t) {
        return static_cast<std::size_t>(
            std::partition_point(pts.begin(), pts.end(), [t](const CurvePoint& pt) { return pt.t < t; }) -
            pts.begin());
    };
    PhasePartition out;
    for (std::size_t i = 0; i < kPhaseCount; ++i) {
        out.phases[i].begin = first_at_or_after(kPhaseStarts[i]);
        out.phases[i].end = i + 1 < kPhaseCount ? first_at_or_after(kPhaseStarts[i + 1]) : pts.size();
    }
    return out;
}

std::size_t value_segment_of(double p) {
    if (p < kSwitchSegmentLow) return 0;
    if (p < kReleaseSegmentLow) return 1;
    return 2;
}

ValueSegmentation partition_value(const PowerCurve& curve) {
    curve.validate();
    ValueSegmentation out;
    for (std::size_t i = 0; i < curve.points.size(); ++i)
        out.segments[value_segment_of(curve.points[i].p)].push_back(i);
    return out;
}

// ---- CSV -----------------------------------------------------------------

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : strip_cr(line)) {
        if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

std::string format_double(double value, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, value);
    std::string s(buf);
    if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
    return s;
}

PowerCurve parse_curve_csv(std::istream& in, std::string sample_id) {
    PowerCurve curve;
    curve.sample_id = std::move(sample_id);
    const std::string ctx = "curve '" + curve.sample_id + "'";
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != "t_s,power_kw")
        throw DataError(ctx + ": expected header 't_s,power_kw'");
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (strip_cr(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2) throw DataError(ctx + ": row " + std::to_string(row) + " needs 2 fields");
        const std::string where = ctx + " row " + std::to_string(row);
        curve.points.push_back({parse_number(fields[0], where), parse_number(fields[1], where)});
    }
    curve.validate();
    return curve;
}

PowerCurve read_curve_csv(const std::filesystem::path& path, std::string sample_id) {
    auto in = open_input(path);
    return parse_curve_csv(in, std::move(sample_id));
}

void write_curve_csv(std::ostream& out, const PowerCurve& curve) {
    out << "t_s,power_kw\n";
    for (const auto& pt : curve.points) out << format_double(pt.t, 4) << ',' << format_double(pt.p, 6) << '\n';
}

void write_curve_csv(const std::filesystem::path& path, const PowerCurve& curve) {
    auto out = open_output(path);
    write_curve_csv(out, curve);
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != "sample_id,label,path")
        throw DataError(path.string() + ": expected header 'sample_id,label,path'");
    std::vector<ManifestEntry> entries;
    while (std::getline(in, line)) {
        if (strip_cr(line).empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 3) throw DataError(path.string() + ": manifest row needs 3 fields");
        ManifestEntry e;
        e.sample_id = f[0];
        e.label = f[1].empty() ? State::NonfaultUnlabeled : parse_state(f[1]);
        e.path = f[2];
        entries.push_back(std::move(e));
    }
    return entries;
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries) {
    auto out = open_output(path);
    out << "sample_id,label,path\n";
    for (const auto& e : entries) {
        out << e.sample_id << ',';
        if (e.label != State::NonfaultUnlabeled) out << to_string(e.label);
        out << ',' << e.path.generic_string() << '\n';
    }
}

std::vector<PowerCurve> load_dataset(const std::filesystem::path& manifest_path) {
    const auto base = manifest_path.parent_path();
    std::vector<PowerCurve> curves;
    for (const auto& e : read_manifest(manifest_path)) {
        const auto file = e.path.is_absolute() ? e.path : base / e.path;
        auto curve = read_curve_csv(file, e.sample_id);
        curve.label = e.label;
        curves.push_back(std::move(curve));
    }
    return curves;
}

std::vector<TruthEntry> read_truth(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != "sample_id,true_label")
        throw DataError(path.string() + ": expected header 'sample_id,true_label'");
    std::vector<TruthEntry> entries;
    while (std::getline(in, line)) {
        if (strip_cr(line).empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 2) throw DataError(path.string() + ": truth row needs 2 fields");
        entries.push_back({f[0], parse_state(f[1])});
    }
    return entries;
}

void write_truth(const std::filesystem::path& path, std::span<const TruthEntry> entries) {
    auto out = open_output(path);
    out << "sample_id,true_label\n";
    for (const auto& e : entries) out << e.sample_id << ',' << to_string(e.true_label) << '\n';
}

} // namespace pmdeg
