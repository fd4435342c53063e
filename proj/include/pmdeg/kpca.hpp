#pragma once

#include <Eigen/Dense>

namespace pmdeg {

/// exp(-|x - y|^2 / (2 sigma^2)). Throws DataError for sigma <= 0 or a
/// dimension mismatch.
double rbf(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double sigma);
/// Symmetric RBF Gram matrix over the rows of X.
Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& X, double sigma);

inline constexpr double kKpcaEigenFloor = 1e-12;

/// Fitted RBF kernel PCA. alphas(:, i) is scaled so that
/// eigenvalues[i] * alphas(:, i)^T alphas(:, i) = 1; components whose
/// eigenvalue is below kKpcaEigenFloor keep a zero coefficient vector.
struct KpcaModel {
    Eigen::MatrixXd training; ///< n x d
    double sigma = 2.0;
    int components = 6;
    Eigen::VectorXd eigenvalues; ///< k, descending, clipped at 0
    Eigen::MatrixXd alphas;      ///< n x k
    Eigen::VectorXd row_means;   ///< n, row means of the uncentred Gram matrix
    double grand_mean = 0.0;
    double variance_ratio = 0.0;
    bool degenerate = false; ///< leading eigenvalue below the floor

    Eigen::Index input_dim() const { return training.cols(); }
};

KpcaModel kpca_fit(const Eigen::MatrixXd& X, double sigma, int components);
Eigen::VectorXd kpca_transform(const KpcaModel& model, const Eigen::VectorXd& x);
Eigen::MatrixXd kpca_transform_rows(const KpcaModel& model, const Eigen::MatrixXd& X);

/// Double-centred Gram matrix K - 1K - K1 + 1K1.
Eigen::MatrixXd center_gram(const Eigen::MatrixXd& K);

/// Ordinary covariance PCA, used as the linear baseline.
struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components; ///< d x k, orthonormal columns
    Eigen::VectorXd eigenvalues;
    double variance_ratio = 0.0;
};

PcaModel pca_fit(const Eigen::MatrixXd& X, int components);
Eigen::MatrixXd pca_transform_rows(const PcaModel& model, const Eigen::MatrixXd& X);

} // namespace pmdeg
