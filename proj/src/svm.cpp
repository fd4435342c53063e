#include "pmdeg/svm.hpp"

#include "pmdeg/errors.hpp"
#include "pmdeg/kpca.hpp"
#include "pmdeg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace pmdeg {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool in_up(double a, int y, double C) { return (y > 0 && a < C) || (y < 0 && a > 0.0); }
bool in_low(double a, int y, double C) { return (y < 0 && a < C) || (y > 0 && a > 0.0); }

// One machine trained on a subset of a shared Gram matrix.
struct IndexedMachine {
    int positive_class = 0;
    int negative_class = 0;
    std::vector<std::size_t> sv; ///< global indices
    std::vector<double> coef;    ///< alpha * y
    std::vector<double> alpha;
    std::vector<int> y;
    double bias = 0.0;
    bool converged = true;
};

long iteration_cap(int max_passes, std::size_t n) {
    return static_cast<long>(max_passes) * static_cast<long>(std::max<std::size_t>(n, 1000));
}

std::vector<int> sorted_classes(const std::vector<int>& labels) {
    std::vector<int> classes = labels;
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    return classes;
}

std::vector<IndexedMachine> train_indexed(const Eigen::MatrixXd& K, const std::vector<std::size_t>& rows,
                                          const std::vector<int>& labels, const std::vector<int>& classes,
                                          const SvmTrainConfig& config) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (auto r : rows) by_class[labels[r]].push_back(r);
    for (int c : classes)
        if (by_class[c].empty()) throw DataError("train_ovo: class " + std::to_string(c) + " has no samples");

    const double C = config.effective_C();
    std::vector<IndexedMachine> machines;
    for (std::size_t a = 0; a < classes.size(); ++a) {
        for (std::size_t b = a + 1; b < classes.size(); ++b) {
            std::vector<std::size_t> idx = by_class[classes[a]];
            const std::size_t npos = idx.size();
            idx.insert(idx.end(), by_class[classes[b]].begin(), by_class[classes[b]].end());
            const auto n = static_cast<Eigen::Index>(idx.size());
            Eigen::MatrixXd sub(n, n);
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j)
                    sub(i, j) = K(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]),
                                  static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]));
            std::vector<int> y(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) y[i] = i < npos ? 1 : -1;

            const DualSolution sol = solve_dual_gram(sub, y, C, config.tolerance, iteration_cap(config.max_passes, idx.size()));
            IndexedMachine m;
            m.positive_class = classes[a];
            m.negative_class = classes[b];
            m.bias = sol.bias;
            m.converged = sol.converged;
            for (std::size_t i = 0; i < idx.size(); ++i) {
                const double al = sol.alpha[static_cast<Eigen::Index>(i)];
                if (al > 0.0) {
                    m.sv.push_back(idx[i]);
                    m.alpha.push_back(al);
                    m.y.push_back(y[i]);
                    m.coef.push_back(al * y[i]);
                }
            }
            machines.push_back(std::move(m));
        }
    }
    return machines;
}

template <typename Decide>
OvoPrediction vote(const std::vector<int>& classes, std::size_t machine_count, Decide&& decide) {
    OvoPrediction p;
    p.votes.assign(classes.size(), 0);
    p.decision_sum.assign(classes.size(), 0.0);
    auto pos_of = [&](int c) {
        return static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), c) - classes.begin());
    };
    for (std::size_t m = 0; m < machine_count; ++m) {
        const auto [pos_class, neg_class, f] = decide(m);
        const std::size_t w = pos_of(f >= 0.0 ? pos_class : neg_class);
        ++p.votes[w];
        p.decision_sum[w] += std::abs(f);
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes.size(); ++c) {
        if (p.votes[c] > p.votes[best] || (p.votes[c] == p.votes[best] && p.decision_sum[c] > p.decision_sum[best]))
            best = c;
    }
    p.label = classes[best];
    return p;
}

} // namespace

void SvmTrainConfig::validate() const {
    if (!(C >= 0.0)) throw ConfigError("svm: C must be >= 0");
    if (!(sigma >= 0.0)) throw ConfigError("svm: sigma must be >= 0");
    if (!(tolerance > 0.0)) throw ConfigError("svm: tolerance must be > 0");
    if (max_passes < 1) throw ConfigError("svm: max_passes must be >= 1");
}

double SvmTrainConfig::effective_C() const { return std::max(C, kSvmParamFloor); }
double SvmTrainConfig::effective_sigma() const { return std::max(sigma, kSvmParamFloor); }

DualSolution solve_dual_gram(const Eigen::MatrixXd& K, std::span<const int> y, double C, double tolerance,
                             long max_iterations) {
    const auto n = static_cast<Eigen::Index>(y.size());
    require(K.rows() == n && K.cols() == n, "solve_dual: Gram matrix shape mismatch");
    require(C > 0.0, "solve_dual: C must be > 0");
    bool has_pos = false, has_neg = false;
    for (int v : y) {
        require(v == 1 || v == -1, "solve_dual: labels must be +1 or -1");
        (v > 0 ? has_pos : has_neg) = true;
    }
    require(has_pos && has_neg, "solve_dual: both labels are required");

    DualSolution sol;
    sol.alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd G = Eigen::VectorXd::Constant(n, -1.0); // gradient of 1/2 a'Qa - e'a
    auto& a = sol.alpha;
    auto yi = [&](Eigen::Index i) { return y[static_cast<std::size_t>(i)]; };

    while (sol.iterations < max_iterations) {
        // Maximal violating pair with second-order selection of j.
        double gmax = -kInf, gmin = kInf;
        Eigen::Index i = -1;
        for (Eigen::Index t = 0; t < n; ++t)
            if (in_up(a[t], yi(t), C) && -yi(t) * G[t] > gmax) {
                gmax = -yi(t) * G[t];
                i = t;
            }
        Eigen::Index j = -1;
        double best_obj = kInf;
        for (Eigen::Index t = 0; t < n; ++t) {
            if (!in_low(a[t], yi(t), C)) continue;
            const double v = -yi(t) * G[t];
            gmin = std::min(gmin, v);
            if (i < 0) continue;
            const double bdiff = gmax - v;
            if (bdiff > 0.0) {
                double quad = K(i, i) + K(t, t) - 2.0 * K(i, t);
                if (quad <= 0.0) quad = kTau;
                const double obj = -(bdiff * bdiff) / quad;
                if (obj < best_obj) {
                    best_obj = obj;
                    j = t;
                }
            }
        }
        if (i < 0 || j < 0 || gmax - gmin < tolerance) {
            sol.converged = true;
            break;
        }
        ++sol.iterations;

        const double ai_old = a[i], aj_old = a[j];
        double quad = K(i, i) + K(j, j) - 2.0 * K(i, j);
        if (quad <= 0.0) quad = kTau;
        if (yi(i) != yi(j)) {
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0.0) {
                if (a[j] < 0.0) { a[j] = 0.0; a[i] = diff; }
            } else {
                if (a[i] < 0.0) { a[i] = 0.0; a[j] = -diff; }
            }
            if (diff > 0.0) {
                if (a[i] > C) { a[i] = C; a[j] = C - diff; }
            } else {
                if (a[j] > C) { a[j] = C; a[i] = C + diff; }
            }
        } else {
            const double delta = (G[i] - G[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > C) {
                if (a[i] > C) { a[i] = C; a[j] = sum - C; }
            } else {
                if (a[j] < 0.0) { a[j] = 0.0; a[i] = sum; }
            }
            if (sum > C) {
                if (a[j] > C) { a[j] = C; a[i] = sum - C; }
            } else {
                if (a[i] < 0.0) { a[i] = 0.0; a[j] = sum; }
            }
        }
        const double dai = a[i] - ai_old, daj = a[j] - aj_old;
        for (Eigen::Index t = 0; t < n; ++t)
            G[t] += yi(t) * (yi(i) * K(t, i) * dai + yi(j) * K(t, j) * daj);
    }

    // Bias: mean over free multipliers, else the midpoint of the feasible interval.
    double ub = kInf, lb = -kInf, sum_free = 0.0;
    int n_free = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const double yg = yi(t) * G[t];
        if (a[t] >= C) {
            if (yi(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (a[t] <= 0.0) {
            if (yi(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
    sol.bias = -rho;
    return sol;
}

double dual_objective(const Eigen::VectorXd& alpha, std::span<const int> y, const Eigen::MatrixXd& K) {
    const auto n = alpha.size();
    Eigen::VectorXd ay(n);
    for (Eigen::Index i = 0; i < n; ++i) ay[i] = alpha[i] * y[static_cast<std::size_t>(i)];
    return alpha.sum() - 0.5 * ay.dot(K * ay);
}

BinarySvmModel solve_dual(const Eigen::MatrixXd& X, const std::vector<int>& y, const SvmTrainConfig& config) {
    config.validate();
    require(static_cast<Eigen::Index>(y.size()) == X.rows(), "solve_dual: label count mismatch");
    require(X.allFinite(), "solve_dual: non-finite input");
    const double sigma = config.effective_sigma();
    const double C = config.effective_C();
    const Eigen::MatrixXd K = rbf_gram(X, sigma);
    const DualSolution sol = solve_dual_gram(K, y, C, config.tolerance, iteration_cap(config.max_passes, y.size()));

    BinarySvmModel m;
    m.sigma = sigma;
    m.C = C;
    m.bias = sol.bias;
    m.converged = sol.converged;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        if (sol.alpha[i] > 0.0) keep.push_back(i);
    m.support_vectors.resize(static_cast<Eigen::Index>(keep.size()), X.cols());
    m.alphas.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        m.support_vectors.row(row) = X.row(keep[k]);
        m.alphas[row] = sol.alpha[keep[k]];
        m.labels.push_back(y[static_cast<std::size_t>(keep[k])]);
    }
    return m;
}

double decision(const BinarySvmModel& model, const Eigen::VectorXd& x) {
    require(model.support_vectors.rows() == 0 || x.size() == model.input_dim(), "svm decision: dimension mismatch");
    const double inv = 1.0 / (2.0 * model.sigma * model.sigma);
    double f = model.bias;
    for (Eigen::Index i = 0; i < model.support_vectors.rows(); ++i)
        f += model.alphas[i] * model.labels[static_cast<std::size_t>(i)] *
             std::exp(-(model.support_vectors.row(i).transpose() - x).squaredNorm() * inv);
    return f;
}

int predict(const BinarySvmModel& model, const Eigen::VectorXd& x) { return decision(model, x) >= 0.0 ? 1 : -1; }

MulticlassSvmModel train_ovo(const Eigen::MatrixXd& X, const std::vector<int>& labels, const SvmTrainConfig& config) {
    config.validate();
    require(static_cast<Eigen::Index>(labels.size()) == X.rows(), "train_ovo: label count mismatch");
    require(X.allFinite(), "train_ovo: non-finite input");
    MulticlassSvmModel model;
    model.classes = sorted_classes(labels);
    require(model.classes.size() >= 2, "train_ovo: need at least two classes");

    const Eigen::MatrixXd K = rbf_gram(X, config.effective_sigma());
    std::vector<std::size_t> rows(labels.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    for (auto& im : train_indexed(K, rows, labels, model.classes, config)) {
        PairMachine pm;
        pm.positive_class = im.positive_class;
        pm.negative_class = im.negative_class;
        auto& bm = pm.model;
        bm.sigma = config.effective_sigma();
        bm.C = config.effective_C();
        bm.bias = im.bias;
        bm.converged = im.converged;
        bm.support_vectors.resize(static_cast<Eigen::Index>(im.sv.size()), X.cols());
        bm.alphas.resize(static_cast<Eigen::Index>(im.sv.size()));
        for (std::size_t k = 0; k < im.sv.size(); ++k) {
            bm.support_vectors.row(static_cast<Eigen::Index>(k)) = X.row(static_cast<Eigen::Index>(im.sv[k]));
            bm.alphas[static_cast<Eigen::Index>(k)] = im.alpha[k];
        }
        bm.labels = im.y;
        model.machines.push_back(std::move(pm));
    }
    return model;
}

OvoPrediction predict_ovo(const MulticlassSvmModel& model, const Eigen::VectorXd& x) {
    require(!model.machines.empty(), "predict_ovo: empty model");
    return vote(model.classes, model.machines.size(), [&](std::size_t m) {
        const auto& pm = model.machines[m];
        return std::tuple{pm.positive_class, pm.negative_class, decision(pm.model, x)};
    });
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed) {
    require(folds >= 2, "stratified_folds: need at least two folds");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    std::vector<int> fold(labels.size(), 0);
    auto rng = seeded_engine(seed, 0x666f6c64ULL);
    std::size_t counter = 0;
    for (auto& [cls, idx] : by_class) {
        if (static_cast<int>(idx.size()) < folds)
            throw DataError("stratified_folds: class " + std::to_string(cls) + " has fewer samples than folds");
        for (std::size_t k = idx.size(); k > 1; --k) {
            const auto j = std::min(k - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(k)));
            std::swap(idx[k - 1], idx[j]);
        }
        for (auto i : idx) fold[i] = static_cast<int>(counter++ % static_cast<std::size_t>(folds));
    }
    return fold;
}

double cross_val_accuracy(const Eigen::MatrixXd& X, const std::vector<int>& labels, const SvmTrainConfig& config,
                          int folds, std::uint64_t seed) {
    config.validate();
    require(static_cast<Eigen::Index>(labels.size()) == X.rows(), "cross_val_accuracy: label count mismatch");
    const std::vector<int> classes = sorted_classes(labels);
    require(classes.size() >= 2, "cross_val_accuracy: need at least two classes");
    const std::vector<int> fold = stratified_folds(labels, folds, seed);
    const Eigen::MatrixXd K = rbf_gram(X, config.effective_sigma());

    double total = 0.0;
    for (int f = 0; f < folds; ++f) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < labels.size(); ++i) (fold[i] == f ? test : train).push_back(i);
        const auto machines = train_indexed(K, train, labels, classes, config);
        std::size_t correct = 0;
        for (auto t : test) {
            const auto p = vote(classes, machines.size(), [&](std::size_t m) {
                const auto& im = machines[m];
                double v = im.bias;
                for (std::size_t k = 0; k < im.sv.size(); ++k)
                    v += im.coef[k] * K(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(im.sv[k]));
                return std::tuple{im.positive_class, im.negative_class, v};
            });
            if (p.label == labels[t]) ++correct;
        }
        total += static_cast<double>(correct) / static_cast<double>(test.size());
    }
    return total / folds;
}

} // namespace pmdeg
