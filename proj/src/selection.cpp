#include "pmdeg/selection.hpp"

#include "pmdeg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace pmdeg {

namespace {

void column_stats(const Eigen::MatrixXd& X, Eigen::VectorXd& mean, Eigen::VectorXd& sd) {
    const double n = static_cast<double>(X.rows());
    mean = X.colwise().mean().transpose();
    sd.resize(X.cols());
    for (Eigen::Index d = 0; d < X.cols(); ++d) sd[d] = std::sqrt((X.col(d).array() - mean[d]).square().sum() / n);
}

} // namespace

FisherReport fisher_scores(const Eigen::MatrixXd& fault_X, const Eigen::MatrixXd& normal_X) {
    require(fault_X.rows() >= 2 && normal_X.rows() >= 2, "fisher_scores: each class needs >= 2 samples");
    require(fault_X.cols() == normal_X.cols(), "fisher_scores: class dimension mismatch");
    require(fault_X.allFinite() && normal_X.allFinite(), "fisher_scores: non-finite values");

    FisherReport r;
    column_stats(fault_X, r.mean_fault, r.sd_fault);
    column_stats(normal_X, r.mean_normal, r.sd_normal);
    r.between = (r.mean_fault - r.mean_normal).array().square();
    r.within = r.sd_fault.array().square() + r.sd_normal.array().square();
    r.criterion = r.between.array() / (r.within.array() + kFisherEpsilon);
    return r;
}

ThresholdSelection threshold_select(const FisherReport& report) {
    ThresholdSelection out;
    if (report.dim() == 0) {
        out.degenerate = true;
        return out;
    }
    const double jmax = report.criterion.maxCoeff();
    out.threshold = jmax / 2.0;
    if (!(jmax > 0.0)) {
        out.degenerate = true;
        return out;
    }
    for (Eigen::Index d = 0; d < report.dim(); ++d)
        if (report.criterion[d] >= out.threshold) out.indices.push_back(static_cast<std::size_t>(d));
    return out;
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    require(a.size() == b.size(), "pearson: length mismatch");
    if (a.size() < 2) return 0.0;
    const Eigen::ArrayXd da = a.array() - a.mean();
    const Eigen::ArrayXd db = b.array() - b.mean();
    const double saa = da.square().sum();
    const double sbb = db.square().sum();
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return std::clamp((da * db).sum() / std::sqrt(saa * sbb), -1.0, 1.0);
}

SelectionMask redundancy_filter(const std::vector<std::size_t>& candidates, const Eigen::MatrixXd& fault_X,
                                const FisherReport& report) {
    for (auto c : candidates)
        require(c < static_cast<std::size_t>(fault_X.cols()) && c < static_cast<std::size_t>(report.dim()),
                "redundancy_filter: candidate index out of range");

    std::vector<std::size_t> cand = candidates;
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

    struct Pair {
        std::size_t p, q;
        double rho;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < cand.size(); ++i)
        for (std::size_t j = i + 1; j < cand.size(); ++j) {
            const double rho = pearson(fault_X.col(static_cast<Eigen::Index>(cand[i])),
                                       fault_X.col(static_cast<Eigen::Index>(cand[j])));
            if (std::abs(rho) > kRedundancyThreshold) pairs.push_back({cand[i], cand[j], rho});
        }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const Pair& x, const Pair& y) { return std::abs(x.rho) > std::abs(y.rho); });

    SelectionMask mask;
    std::vector<bool> dropped(static_cast<std::size_t>(report.dim()), false);
    for (const auto& pr : pairs) {
        if (dropped[pr.p] || dropped[pr.q]) continue;
        const double jp = report.criterion[static_cast<Eigen::Index>(pr.p)];
        const double jq = report.criterion[static_cast<Eigen::Index>(pr.q)];
        // p < q, so p wins J ties.
        const bool keep_p = jp >= jq;
        const std::size_t keep = keep_p ? pr.p : pr.q;
        const std::size_t drop = keep_p ? pr.q : pr.p;
        dropped[drop] = true;
        mask.pruned.push_back({keep, drop, pr.rho});
    }
    for (auto c : cand)
        if (!dropped[c]) mask.indices.push_back(c);
    return mask;
}

SelectionMask select_features(const Eigen::MatrixXd& fault_X, const Eigen::MatrixXd& normal_X,
                              FisherReport* report_out) {
    FisherReport report = fisher_scores(fault_X, normal_X);
    const ThresholdSelection cand = threshold_select(report);
    if (cand.degenerate) throw DataError("feature selection: every Fisher criterion is zero");
    SelectionMask mask = redundancy_filter(cand.indices, fault_X, report);
    mask.threshold = cand.threshold;
    if (report_out) *report_out = std::move(report);
    return mask;
}

Eigen::MatrixXd apply_mask(const SelectionMask& mask, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(mask.indices.size()));
    for (std::size_t k = 0; k < mask.indices.size(); ++k) {
        require(mask.indices[k] < static_cast<std::size_t>(X.cols()), "apply_mask: index out of range");
        out.col(static_cast<Eigen::Index>(k)) = X.col(static_cast<Eigen::Index>(mask.indices[k]));
    }
    return out;
}

} // namespace pmdeg
