#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance runner.

#include "pmdeg/svm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

inline Eigen::MatrixXd gram(const Eigen::MatrixXd& X, double sigma) {
    Eigen::MatrixXd K(X.rows(), X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.rows(); ++j) {
            double d2 = 0;
            for (Eigen::Index c = 0; c < X.cols(); ++c) d2 += (X(i, c) - X(j, c)) * (X(i, c) - X(j, c));
            K(i, j) = std::exp(-d2 / (2 * sigma * sigma));
        }
    return K;
}

struct DualOptimum {
    double objective = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd alpha;
};

// Every alpha is at 0, at C or free. For each of the 3^n patterns solve the
// equality-constrained stationarity system on the free set and keep the best
// box-feasible point.
inline DualOptimum exhaustive_dual(const Eigen::MatrixXd& K, const std::vector<int>& y, double C) {
    const int n = static_cast<int>(y.size());
    Eigen::MatrixXd Q(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) Q(i, j) = y[i] * y[j] * K(i, j);
    DualOptimum best;
    int patterns = 1;
    for (int i = 0; i < n; ++i) patterns *= 3;
    for (int p = 0; p < patterns; ++p) {
        std::vector<int> state(n), free_idx;
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
        for (int i = 0, q = p; i < n; ++i, q /= 3) {
            state[i] = q % 3;
            if (state[i] == 1) a[i] = C;
            if (state[i] == 2) free_idx.push_back(i);
        }
        const int f = static_cast<int>(free_idx.size());
        if (f > 0) {
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(f + 1, f + 1);
            Eigen::VectorXd rhs(f + 1);
            double ya_fixed = 0;
            for (int i = 0; i < n; ++i) ya_fixed += y[i] * a[i];
            for (int r = 0; r < f; ++r) {
                const int i = free_idx[r];
                double fixed = 0;
                for (int j = 0; j < n; ++j)
                    if (state[j] == 1) fixed += Q(i, j) * C;
                for (int c = 0; c < f; ++c) A(r, c) = Q(i, free_idx[c]);
                A(r, f) = y[i];
                A(f, r) = y[i];
                rhs[r] = 1.0 - fixed;
            }
            rhs[f] = -ya_fixed;
            const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
            if (!lu.isInvertible()) continue;
            const Eigen::VectorXd sol = lu.solve(rhs);
            bool ok = true;
            for (int r = 0; r < f; ++r) {
                if (sol[r] < -1e-12 || sol[r] > C + 1e-12) ok = false;
                a[free_idx[r]] = std::clamp(sol[r], 0.0, C);
            }
            if (!ok) continue;
        }
        double ya = 0;
        for (int i = 0; i < n; ++i) ya += y[i] * a[i];
        if (std::abs(ya) > 1e-9) continue;
        const double obj = a.sum() - 0.5 * a.dot(Q * a);
        if (obj > best.objective) {
            best.objective = obj;
            best.alpha = a;
        }
    }
    return best;
}

// Maximal violating pair gap of a trained binary machine, recomputed over
// every training sample from the stored support vectors. Samples that are not
// support vectors have alpha = 0.
inline double kkt_gap(const Eigen::MatrixXd& X, const std::vector<int>& y, const pmdeg::BinarySvmModel& m) {
    const Eigen::Index n = X.rows();
    std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index s = 0; s < m.support_vectors.rows(); ++s)
        for (Eigen::Index i = 0; i < n; ++i)
            if (X.row(i) == m.support_vectors.row(s) && y[static_cast<std::size_t>(i)] == m.labels[static_cast<std::size_t>(s)] &&
                alpha[static_cast<std::size_t>(i)] == 0.0) {
                alpha[static_cast<std::size_t>(i)] = m.alphas[s];
                break;
            }
    double up = -std::numeric_limits<double>::infinity(), low = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
        double f = 0;
        for (Eigen::Index s = 0; s < m.support_vectors.rows(); ++s) {
            const double d2 = (m.support_vectors.row(s) - X.row(i)).squaredNorm();
            f += m.alphas[s] * m.labels[static_cast<std::size_t>(s)] * std::exp(-d2 / (2 * m.sigma * m.sigma));
        }
        const int yi = y[static_cast<std::size_t>(i)];
        const double a = alpha[static_cast<std::size_t>(i)];
        const double v = -yi * (yi * f - 1.0); // -y_i * gradient_i
        const bool can_up = (yi > 0 && a < m.C) || (yi < 0 && a > 0);
        const bool can_low = (yi < 0 && a < m.C) || (yi > 0 && a > 0);
        if (can_up) up = std::max(up, v);
        if (can_low) low = std::min(low, v);
    }
    return up - low;
}

// Box and equality constraints as stored.
inline bool feasible(const pmdeg::BinarySvmModel& m, double eq_tol = 1e-6) {
    double s = 0;
    for (Eigen::Index i = 0; i < m.alphas.size(); ++i) {
        if (m.alphas[i] <= 0 || m.alphas[i] > m.C) return false;
        s += m.alphas[i] * m.labels[static_cast<std::size_t>(i)];
    }
    return std::abs(s) <= eq_tol;
}

} // namespace oracle
