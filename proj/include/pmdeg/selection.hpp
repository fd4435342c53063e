#pragma once

// Two-class Fisher scoring of feature dimensions (fault vs normal), a
// half-of-maximum threshold, and a correlation filter that prunes redundant
// survivors.

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace pmdeg {

inline constexpr double kFisherEpsilon = 1e-12;
inline constexpr double kRedundancyThreshold = 0.95;

struct FisherReport {
    Eigen::VectorXd mean_fault, sd_fault;
    Eigen::VectorXd mean_normal, sd_normal;
    Eigen::VectorXd between;   ///< (m_F - m_N)^2
    Eigen::VectorXd within;    ///< sigma_F^2 + sigma_N^2
    Eigen::VectorXd criterion; ///< J = between / (within + eps)

    Eigen::Index dim() const { return criterion.size(); }
};

/// Rows are samples. Population standard deviations. Needs >= 2 rows per class.
FisherReport fisher_scores(const Eigen::MatrixXd& fault_X, const Eigen::MatrixXd& normal_X);

struct ThresholdSelection {
    std::vector<std::size_t> indices; ///< ascending
    double threshold = 0.0;           ///< max J / 2
    bool degenerate = false;          ///< every J is zero; indices empty
};

/// Dimensions with J >= max J / 2.
ThresholdSelection threshold_select(const FisherReport& report);

/// Sample Pearson correlation; 0 when either side has zero variance.
double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct PrunedPair {
    std::size_t kept = 0;
    std::size_t dropped = 0;
    double rho = 0.0;
};

struct SelectionMask {
    std::vector<std::size_t> indices; ///< strictly increasing
    double threshold = 0.0;
    std::vector<PrunedPair> pruned;
};

/// Pairs with |rho| > 0.95 over the fault-class columns are processed in
/// descending |rho| (ties by index pair); the lower-J member is dropped (J ties
/// keep the lower index). Pairs touching an already dropped dimension are
/// skipped.
SelectionMask redundancy_filter(const std::vector<std::size_t>& candidates, const Eigen::MatrixXd& fault_X,
                                const FisherReport& report);

/// fisher_scores -> threshold_select -> redundancy_filter.
SelectionMask select_features(const Eigen::MatrixXd& fault_X, const Eigen::MatrixXd& normal_X,
                              FisherReport* report_out = nullptr);

/// Columns of X listed in mask, in mask order.
Eigen::MatrixXd apply_mask(const SelectionMask& mask, const Eigen::MatrixXd& X);

} // namespace pmdeg
