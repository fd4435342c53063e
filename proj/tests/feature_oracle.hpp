#pragma once

// Straightforward re-implementation of the 64 features: phase/segment
// membership by scanning, stats computed with textbook two-pass formulas.

#include "pmdeg/curve.hpp"
#include "pmdeg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using pmdeg::CurvePoint;
using pmdeg::PowerCurve;
using pmdeg::uniform01;

inline PowerCurve make_curve(const std::vector<double>& p, double dt = 0.04) {
    PowerCurve c;
    c.sample_id = "x";
    for (std::size_t i = 0; i < p.size(); ++i) c.points.push_back({static_cast<double>(i) * dt, p[i]});
    return c;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2) return v[n / 2];
    return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

inline std::vector<double> time10(const std::vector<double>& p) {
    std::vector<double> out(10, 0.0);
    if (p.empty()) return out;
    const double n = static_cast<double>(p.size());
    double mean = 0, mabs = 0, msq = 0, mx = -1e300, mn = 1e300, pk = 0;
    for (double v : p) {
        mean += v / n;
        mabs += std::fabs(v) / n;
        msq += v * v / n;
        mx = std::max(mx, v);
        mn = std::min(mn, v);
        pk = std::max(pk, std::fabs(v));
    }
    double var = 0, m4 = 0;
    for (double v : p) {
        var += std::pow(v - mean, 2) / n;
        m4 += std::pow(v - mean, 4) / n;
    }
    double tv = 0;
    for (std::size_t i = 1; i < p.size(); ++i) tv += std::fabs(p[i] - p[i - 1]);
    const double rms = std::sqrt(msq);
    const bool flat = mx == mn;
    out[0] = p.back() - p.front();
    out[1] = mx - mn;
    out[2] = mean;
    out[3] = rms;
    out[4] = flat ? 0 : var;
    out[5] = tv;
    out[6] = flat ? 0 : m4 / (var * var);
    out[7] = rms > 0 ? pk / rms : 0;
    out[8] = mabs > 0 ? rms / mabs : 0;
    out[9] = mabs > 0 ? pk / mabs : 0;
    return out;
}

inline std::vector<double> value8(const std::vector<CurvePoint>& pts) {
    std::vector<double> out(8, 0.0);
    if (pts.empty()) return out;
    std::vector<double> p, t;
    for (const auto& x : pts) {
        p.push_back(x.p);
        t.push_back(x.t);
    }
    double mean = 0;
    for (double v : p) mean += v;
    mean /= static_cast<double>(p.size());
    std::vector<long long> q;
    for (double v : p) q.push_back(std::llround(v * 100.0));
    std::sort(q.begin(), q.end());
    long long best = q[0];
    std::size_t best_n = 0;
    for (std::size_t i = 0; i < q.size();) {
        std::size_t j = i;
        while (j < q.size() && q[j] == q[i]) ++j;
        if (j - i > best_n) {
            best_n = j - i;
            best = q[i];
        }
        i = j;
    }
    out[0] = *std::max_element(t.begin(), t.end());
    out[1] = mean;
    out[2] = static_cast<double>(p.size());
    out[3] = *std::max_element(p.begin(), p.end()) - *std::min_element(p.begin(), p.end());
    out[4] = median(p);
    out[5] = *std::max_element(p.begin(), p.end());
    out[6] = median(t);
    out[7] = static_cast<double>(best) / 100.0;
    return out;
}

inline std::vector<double> extract64(const PowerCurve& c) {
    const double starts[5] = {0.0, 1.0, 4.0, 5.0, 1e300};
    std::vector<double> out;
    for (int ph = 0; ph < 4; ++ph) {
        std::vector<double> p;
        for (const auto& x : c.points)
            if (x.t >= starts[ph] && x.t < starts[ph + 1]) p.push_back(x.p);
        const auto s = time10(p);
        out.insert(out.end(), s.begin(), s.end());
    }
    const double lo[3] = {-1e300, 0.3, 0.7}, hi[3] = {0.3, 0.7, 1e300};
    for (int sg = 0; sg < 3; ++sg) {
        std::vector<CurvePoint> pts;
        for (const auto& x : c.points)
            if (x.p >= lo[sg] && x.p < hi[sg]) pts.push_back(x);
        const auto s = value8(pts);
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

inline PowerCurve random_curve(std::mt19937_64& rng) {
    const auto n = 20 + static_cast<std::size_t>(uniform01(rng) * 300.0);
    std::vector<double> p;
    const int style = static_cast<int>(uniform01(rng) * 3);
    for (std::size_t i = 0; i < n; ++i) {
        double v = uniform01(rng) * 2.0;
        if (style == 1) v = std::round(v * 20.0) / 20.0; // ties for mode/median
        if (style == 2 && uniform01(rng) < 0.3) v = 0.0;
        p.push_back(v);
    }
    return make_curve(p, 0.01 + uniform01(rng) * 0.05);
}

} // namespace oracle
