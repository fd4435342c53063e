#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pmdeg/errors.hpp"
#include "pmdeg/kpca.hpp"
#include "pmdeg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace pmdeg;

namespace {

// Cyclic Jacobi rotations on a dense symmetric matrix.
void jacobi(Eigen::MatrixXd A, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
    const Eigen::Index n = A.rows();
    Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        if (off < 1e-26) break;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::fabs(A(p, q)) < 1e-300) continue;
                const double theta = (A(q, q) - A(p, p)) / (2 * A(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return A(a, a) > A(b, b); });
    values.resize(n);
    vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        values[k] = A(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
        vectors.col(k) = V.col(order[static_cast<std::size_t>(k)]);
    }
}

Eigen::MatrixXd random_matrix(int n, int d, std::uint64_t seed) {
    auto rng = seeded_engine(seed);
    Eigen::MatrixXd X(n, d);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = uniform01(rng);
    return X;
}

Eigen::MatrixXd gram_by_hand(const Eigen::MatrixXd& X, double sigma) {
    Eigen::MatrixXd K(X.rows(), X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.rows(); ++j)
            K(i, j) = std::exp(-(X.row(i) - X.row(j)).squaredNorm() / (2 * sigma * sigma));
    return K;
}

} // namespace

TEST_CASE("rbf kernel") {
    Eigen::VectorXd a(2), b(2);
    a << 0, 0;
    b << 1, 1;
    CHECK(rbf(a, b, 1.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(rbf(a, a, 0.3) == 1.0);
    CHECK_THROWS_AS(rbf(a, b, 0.0), DataError);
    CHECK_THROWS_AS(rbf(a, Eigen::VectorXd(3), 1.0), DataError);
}

TEST_CASE("double centring annihilates row sums") {
    const auto X = random_matrix(30, 4, 1);
    const auto Kc = center_gram(rbf_gram(X, 2.0));
    CHECK(Kc.rowwise().sum().cwiseAbs().maxCoeff() < 1e-9);
    CHECK(Kc.colwise().sum().cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("eigen oracle on a random 50x11 matrix") {
    const auto X = random_matrix(50, 11, 2);
    const int k = 6;
    const auto m = kpca_fit(X, 2.0, k);

    const Eigen::MatrixXd K = gram_by_hand(X, 2.0);
    const Eigen::MatrixXd J = Eigen::MatrixXd::Identity(50, 50) - Eigen::MatrixXd::Constant(50, 50, 1.0 / 50);
    Eigen::VectorXd lam;
    Eigen::MatrixXd V;
    jacobi(J * K * J, lam, V);

    const Eigen::MatrixXd scores = kpca_transform_rows(m, X);
    for (int c = 0; c < k; ++c) {
        CHECK(m.eigenvalues[c] == doctest::Approx(lam[c]).epsilon(1e-8));
        // projection variance is lambda / n
        const double var = scores.col(c).squaredNorm() / 50.0;
        CHECK(std::fabs(var - lam[c] / 50.0) < 1e-8);
        Eigen::VectorXd expected = std::sqrt(lam[c]) * V.col(c);
        if (expected.dot(scores.col(c)) < 0) expected = -expected;
        CHECK((scores.col(c) - expected).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(std::fabs(scores.col(c).mean()) < 1e-8);
    }
    double pos = 0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) pos += std::max(lam[i], 0.0);
    CHECK(m.variance_ratio == doctest::Approx(lam.head(k).sum() / pos).epsilon(1e-9));
    for (Eigen::Index i = 0; i < m.eigenvalues.size(); ++i) CHECK(m.eigenvalues[i] >= -1e-9);
}

TEST_CASE("transform of training rows reproduces fitted scores") {
    const auto X = random_matrix(25, 3, 3);
    const auto m = kpca_fit(X, 1.5, 4);
    const Eigen::MatrixXd Kc = center_gram(rbf_gram(X, 1.5));
    const Eigen::MatrixXd fitted = Kc * m.alphas;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const auto z = kpca_transform(m, X.row(i).transpose());
        CHECK((z - fitted.row(i).transpose()).cwiseAbs().maxCoeff() < 1e-8);
    }
    CHECK(kpca_transform(m, X.row(2).transpose()) == kpca_transform(m, X.row(2).transpose()));
    CHECK_THROWS_AS(kpca_transform(m, Eigen::VectorXd::Zero(5)), DataError);
}

TEST_CASE("far outlier projects onto the centring constant") {
    const auto X = random_matrix(20, 2, 4);
    const auto m = kpca_fit(X, 0.5, 3);
    Eigen::VectorXd far(2);
    far << 1e3, -1e3;
    const Eigen::VectorXd expected = m.alphas.transpose() * (Eigen::VectorXd::Constant(20, m.grand_mean) - m.row_means);
    CHECK((kpca_transform(m, far) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("degenerate and full-rank edge cases") {
    Eigen::MatrixXd same(2, 3);
    same << 1, 2, 3, 1, 2, 3;
    const auto d = kpca_fit(same, 2.0, 1);
    CHECK(d.degenerate);
    CHECK(d.eigenvalues[0] == doctest::Approx(0.0));

    const auto X = random_matrix(12, 3, 5);
    CHECK(kpca_fit(X, 1.0, 12).variance_ratio == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(kpca_fit(X, 1.0, 13), DataError);
    Eigen::MatrixXd bad = X;
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(kpca_fit(bad, 1.0, 2), DataError);
}

TEST_CASE("variance ratio is monotone in k") {
    const auto X = random_matrix(40, 6, 6);
    double prev = 0;
    for (int k = 1; k <= 10; ++k) {
        const double r = kpca_fit(X, 2.0, k).variance_ratio;
        CHECK(r >= prev - 1e-12);
        prev = r;
    }
}

TEST_CASE("linear pca baseline") {
    const auto X = random_matrix(60, 4, 7);
    const auto p = pca_fit(X, 2);
    const Eigen::MatrixXd C = (X.rowwise() - X.colwise().mean()).transpose() * (X.rowwise() - X.colwise().mean()) / 60.0;
    Eigen::VectorXd lam;
    Eigen::MatrixXd V;
    jacobi(C, lam, V);
    CHECK(p.eigenvalues[0] == doctest::Approx(lam[0]).epsilon(1e-9));
    CHECK(p.eigenvalues[1] == doctest::Approx(lam[1]).epsilon(1e-9));
    CHECK((p.components.transpose() * p.components - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
    const auto Z = pca_transform_rows(p, X);
    CHECK(Z.cols() == 2);
    CHECK(std::fabs(Z.col(0).mean()) < 1e-10);
}
