#pragma once

// Soft-margin RBF support-vector machines solved in the dual by SMO, a
// one-against-one multiclass wrapper, and stratified k-fold scoring.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pmdeg {

/// C and sigma below this are raised to it before training.
inline constexpr double kSvmParamFloor = 1e-6;

struct SvmTrainConfig {
    double C = 1.0;
    double sigma = 1.0;
    double tolerance = 1e-3; ///< maximal KKT violation at termination
    int max_passes = 100;    ///< iteration cap = max_passes * max(n, 1000)
    std::uint64_t seed = 0;  ///< recorded; working-set selection is deterministic

    void validate() const;
    double effective_C() const;
    double effective_sigma() const;
};

/// Raw dual solution over a precomputed Gram matrix.
struct DualSolution {
    Eigen::VectorXd alpha; ///< one per training sample
    double bias = 0.0;
    long iterations = 0;
    bool converged = false;
};

/// SMO on max sum(a) - 1/2 sum a_i a_j y_i y_j K_ij, 0 <= a <= C, y'a = 0.
/// Requires at least one sample of each sign.
DualSolution solve_dual_gram(const Eigen::MatrixXd& K, std::span<const int> y, double C, double tolerance,
                             long max_iterations);

/// Dual objective value for the given multipliers.
double dual_objective(const Eigen::VectorXd& alpha, std::span<const int> y, const Eigen::MatrixXd& K);

struct BinarySvmModel {
    Eigen::MatrixXd support_vectors; ///< rows
    std::vector<int> labels;         ///< +1 / -1 per support vector
    Eigen::VectorXd alphas;          ///< 0 < alpha <= C
    double bias = 0.0;
    double sigma = 1.0;
    double C = 1.0;
    bool converged = true;

    Eigen::Index input_dim() const { return support_vectors.cols(); }
};

BinarySvmModel solve_dual(const Eigen::MatrixXd& X, const std::vector<int>& y, const SvmTrainConfig& config);
/// f(x) = sum alpha_i y_i K(x, x_i) + b.
double decision(const BinarySvmModel& model, const Eigen::VectorXd& x);
/// sign(f), with sign(0) = +1.
int predict(const BinarySvmModel& model, const Eigen::VectorXd& x);

struct PairMachine {
    int positive_class = 0; ///< voted for when f >= 0
    int negative_class = 0;
    BinarySvmModel model;
};

inline constexpr const char* kOvoTieRule = "votes,abs_decision_sum,lowest_class";

struct MulticlassSvmModel {
    std::vector<int> classes; ///< ascending
    std::vector<PairMachine> machines; ///< (classes[i], classes[j]) for i < j, lexicographic
    std::string tie_rule = kOvoTieRule;
};

MulticlassSvmModel train_ovo(const Eigen::MatrixXd& X, const std::vector<int>& labels, const SvmTrainConfig& config);

struct OvoPrediction {
    int label = 0;
    std::vector<int> votes;           ///< aligned with model.classes
    std::vector<double> decision_sum; ///< sum of |f| over the machines each class won
};

/// Most votes; ties go to the largest |decision| sum, then the lowest class.
OvoPrediction predict_ovo(const MulticlassSvmModel& model, const Eigen::VectorXd& x);

/// Seeded stratified assignment: fold[i] in [0, folds).
std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed);

/// Mean held-out accuracy over stratified folds. Every class needs >= folds samples.
double cross_val_accuracy(const Eigen::MatrixXd& X, const std::vector<int>& labels, const SvmTrainConfig& config,
                          int folds, std::uint64_t seed);

} // namespace pmdeg
