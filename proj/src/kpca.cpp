#include "pmdeg/kpca.hpp"

#include "pmdeg/errors.hpp"

#include <algorithm>
#include <cmath>

namespace pmdeg {

namespace {

// Deterministic sign: the largest-magnitude entry of each vector is positive.
void fix_signs(Eigen::MatrixXd& V) {
    for (Eigen::Index c = 0; c < V.cols(); ++c) {
        Eigen::Index arg = 0;
        V.col(c).cwiseAbs().maxCoeff(&arg);
        if (V(arg, c) < 0.0) V.col(c) *= -1.0;
    }
}

} // namespace

double rbf(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double sigma) {
    require(sigma > 0.0, "rbf: sigma must be > 0");
    require(x.size() == y.size(), "rbf: dimension mismatch");
    return std::exp(-(x - y).squaredNorm() / (2.0 * sigma * sigma));
}

Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& X, double sigma) {
    require(sigma > 0.0, "rbf: sigma must be > 0");
    const Eigen::Index n = X.rows();
    const double inv = 1.0 / (2.0 * sigma * sigma);
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = std::exp(-(X.row(i) - X.row(j)).squaredNorm() * inv);
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

Eigen::MatrixXd center_gram(const Eigen::MatrixXd& K) {
    const Eigen::VectorXd rm = K.rowwise().mean();
    const Eigen::RowVectorXd cm = K.colwise().mean();
    const double g = K.mean();
    Eigen::MatrixXd C = K;
    C.colwise() -= rm;
    C.rowwise() -= cm;
    C.array() += g;
    return C;
}

KpcaModel kpca_fit(const Eigen::MatrixXd& X, double sigma, int components) {
    require(sigma > 0.0, "kpca_fit: sigma must be > 0");
    require(components >= 1, "kpca_fit: need at least one component");
    require(X.rows() >= components, "kpca_fit: more components than samples");
    require(X.allFinite(), "kpca_fit: non-finite input");

    const Eigen::Index n = X.rows();
    const auto k = static_cast<Eigen::Index>(components);
    const Eigen::MatrixXd K = rbf_gram(X, sigma);

    KpcaModel m;
    m.training = X;
    m.sigma = sigma;
    m.components = components;
    m.row_means = K.rowwise().mean();
    m.grand_mean = K.mean();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(center_gram(K));
    if (es.info() != Eigen::Success) throw InvariantError("kpca_fit: eigendecomposition failed");
    // Eigen orders ascending; reverse to descending.
    const Eigen::VectorXd all = es.eigenvalues().reverse().cwiseMax(0.0);
    Eigen::MatrixXd vecs = es.eigenvectors().rowwise().reverse().leftCols(k);
    fix_signs(vecs);

    m.eigenvalues = all.head(k);
    m.alphas = Eigen::MatrixXd::Zero(n, k);
    for (Eigen::Index c = 0; c < k; ++c)
        if (m.eigenvalues[c] >= kKpcaEigenFloor) m.alphas.col(c) = vecs.col(c) / std::sqrt(m.eigenvalues[c]);

    const double total = all.sum();
    m.variance_ratio = total > 0.0 ? std::clamp(m.eigenvalues.sum() / total, 0.0, 1.0) : 1.0;
    m.degenerate = m.eigenvalues[0] < kKpcaEigenFloor;
    return m;
}

Eigen::VectorXd kpca_transform(const KpcaModel& model, const Eigen::VectorXd& x) {
    require(x.size() == model.input_dim(), "kpca_transform: dimension mismatch");
    const Eigen::Index n = model.training.rows();
    const double inv = 1.0 / (2.0 * model.sigma * model.sigma);
    Eigen::VectorXd kx(n);
    for (Eigen::Index j = 0; j < n; ++j) kx[j] = std::exp(-(model.training.row(j).transpose() - x).squaredNorm() * inv);
    const double kx_mean = kx.mean();
    const Eigen::VectorXd centred = (kx.array() - kx_mean - model.row_means.array() + model.grand_mean).matrix();
    return model.alphas.transpose() * centred;
}

Eigen::MatrixXd kpca_transform_rows(const KpcaModel& model, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd out(X.rows(), model.alphas.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out.row(i) = kpca_transform(model, X.row(i).transpose()).transpose();
    return out;
}

PcaModel pca_fit(const Eigen::MatrixXd& X, int components) {
    require(components >= 1 && components <= X.cols(), "pca_fit: component count out of range");
    require(X.rows() >= 2, "pca_fit: need at least two samples");
    PcaModel m;
    m.mean = X.colwise().mean().transpose();
    const Eigen::MatrixXd C = X.rowwise() - m.mean.transpose();
    const Eigen::MatrixXd cov = C.transpose() * C / static_cast<double>(X.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw InvariantError("pca_fit: eigendecomposition failed");
    const Eigen::VectorXd all = es.eigenvalues().reverse().cwiseMax(0.0);
    m.components = es.eigenvectors().rowwise().reverse().leftCols(components);
    fix_signs(m.components);
    m.eigenvalues = all.head(components);
    const double total = all.sum();
    m.variance_ratio = total > 0.0 ? m.eigenvalues.sum() / total : 1.0;
    return m;
}

Eigen::MatrixXd pca_transform_rows(const PcaModel& model, const Eigen::MatrixXd& X) {
    require(X.cols() == model.mean.size(), "pca_transform: dimension mismatch");
    return (X.rowwise() - model.mean.transpose()) * model.components;
}

} // namespace pmdeg
