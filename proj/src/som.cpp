#include "pmdeg/som.hpp"

#include "pmdeg/errors.hpp"
#include "pmdeg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pmdeg {

void SomTrainConfig::validate() const {
    if (ordering_iterations < 1) throw ConfigError("som: ordering_iterations must be >= 1");
    if (convergence_epochs < 0) throw ConfigError("som: convergence_epochs must be >= 0");
    if (!(initial_learning_rate > 0.0 && initial_learning_rate < 1.0))
        throw ConfigError("som: initial_learning_rate must lie in (0, 1)");
    if (!(convergence_learning_rate > 0.0 && convergence_learning_rate <= initial_learning_rate))
        throw ConfigError("som: convergence_learning_rate must lie in (0, initial_learning_rate]");
    if (initial_radius && *initial_radius < 1.0) throw ConfigError("som: initial_radius must be >= 1");
}

HexCoord SomModel::coord(int label) const {
    const int idx = label - 1;
    const int row = idx / grid;
    const int col = idx % grid;
    return {col - (row - (row & 1)) / 2, row};
}

int SomModel::hex_distance(int a, int b) const {
    const HexCoord ca = coord(a), cb = coord(b);
    const int dq = ca.q - cb.q, dr = ca.r - cb.r;
    return (std::abs(dq) + std::abs(dr) + std::abs(dq + dr)) / 2;
}

int winner(const SomModel& model, const Eigen::VectorXd& x) {
    require(x.size() == model.input_dim(), "som winner: dimension mismatch");
    int best = 1;
    double best_d = (model.weights.row(0).transpose() - x).squaredNorm();
    for (int j = 1; j < model.neuron_count(); ++j) {
        const double d = (model.weights.row(j).transpose() - x).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = j + 1;
        }
    }
    return best;
}

void update(SomModel& model, const Eigen::VectorXd& x, double eta, const std::vector<int>& neighborhood) {
    require(x.size() == model.input_dim(), "som update: dimension mismatch");
    for (int label : neighborhood) {
        require(label >= 1 && label <= model.neuron_count(), "som update: label out of range");
        auto w = model.weights.row(label - 1);
        w += eta * (x.transpose() - w);
    }
}

double ordering_learning_rate(int t, const SomTrainConfig& c) {
    const double decayed = c.initial_learning_rate * std::exp(-4.0 * t / static_cast<double>(c.ordering_iterations));
    return std::max(decayed, c.convergence_learning_rate);
}

double ordering_radius(int t, int grid, const SomTrainConfig& c) {
    const double r0 = c.initial_radius.value_or(std::max(1.0, static_cast<double>(grid - 1)));
    if (c.ordering_iterations <= 1) return 1.0;
    return r0 - (r0 - 1.0) * t / static_cast<double>(c.ordering_iterations - 1);
}

SomModel initialize(const Eigen::MatrixXd& X, int grid, std::uint64_t seed) {
    require(X.rows() > 0 && X.cols() > 0, "som: empty training data");
    require(grid >= 1, "som: grid must be >= 1");
    require(X.allFinite(), "som: non-finite training data");
    SomModel m;
    m.grid = grid;
    m.weights.resize(grid * grid, X.cols());
    const Eigen::RowVectorXd lo = X.colwise().minCoeff();
    const Eigen::RowVectorXd hi = X.colwise().maxCoeff();
    auto rng = seeded_engine(seed, 0x696e6974ULL);
    for (Eigen::Index j = 0; j < m.weights.rows(); ++j)
        for (Eigen::Index d = 0; d < X.cols(); ++d) m.weights(j, d) = lo[d] + (hi[d] - lo[d]) * uniform01(rng);
    return m;
}

SomModel train(const Eigen::MatrixXd& X, int grid, const SomTrainConfig& config) {
    config.validate();
    SomModel m = initialize(X, grid, config.seed);
    const int cells = m.neuron_count();
    const auto n = static_cast<std::size_t>(X.rows());

    std::vector<int> dist(static_cast<std::size_t>(cells * cells));
    for (int a = 1; a <= cells; ++a)
        for (int b = 1; b <= cells; ++b) dist[static_cast<std::size_t>((a - 1) * cells + (b - 1))] = m.hex_distance(a, b);

    std::vector<int> hood;
    auto neighbourhood = [&](int w, double radius) {
        hood.clear();
        for (int j = 1; j <= cells; ++j)
            if (dist[static_cast<std::size_t>((w - 1) * cells + (j - 1))] <= radius) hood.push_back(j);
        return hood;
    };

    auto rng = seeded_engine(config.seed, 0x747261696eULL);
    for (int t = 0; t < config.ordering_iterations; ++t) {
        const auto i = std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
        const Eigen::VectorXd x = X.row(static_cast<Eigen::Index>(i)).transpose();
        update(m, x, ordering_learning_rate(t, config), neighbourhood(winner(m, x), ordering_radius(t, grid, config)));
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int e = 0; e < config.convergence_epochs; ++e) {
        // Fisher-Yates with the portable uniform draw.
        for (std::size_t k = n; k > 1; --k) {
            const auto j = std::min(k - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(k)));
            std::swap(order[k - 1], order[j]);
        }
        for (std::size_t i : order) {
            const Eigen::VectorXd x = X.row(static_cast<Eigen::Index>(i)).transpose();
            update(m, x, config.convergence_learning_rate, neighbourhood(winner(m, x), 1.0));
        }
    }
    return m;
}

std::vector<int> assign(const SomModel& model, const Eigen::MatrixXd& X) {
    std::vector<int> labels;
    labels.reserve(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) labels.push_back(winner(model, X.row(i).transpose()));
    return labels;
}

std::vector<int> label_counts(const SomModel& model, const std::vector<int>& labels) {
    std::vector<int> counts(static_cast<std::size_t>(model.neuron_count()), 0);
    for (int l : labels) {
        require(l >= 1 && l <= model.neuron_count(), "label_counts: label out of range");
        ++counts[static_cast<std::size_t>(l - 1)];
    }
    return counts;
}

std::vector<std::pair<int, int>> neuron_adjacency(const SomModel& model) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 1; a <= model.neuron_count(); ++a)
        for (int b = a + 1; b <= model.neuron_count(); ++b)
            if (model.hex_distance(a, b) == 1) pairs.emplace_back(a, b);
    return pairs;
}

std::vector<double> adjacent_weight_distances(const SomModel& model) {
    std::vector<double> out;
    for (const auto& [a, b] : neuron_adjacency(model))
        out.push_back((model.weights.row(a - 1) - model.weights.row(b - 1)).norm());
    return out;
}

double quantization_error(const SomModel& model, const Eigen::MatrixXd& X) {
    if (X.rows() == 0) return 0.0;
    double total = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Eigen::VectorXd x = X.row(i).transpose();
        total += (model.weights.row(winner(model, x) - 1).transpose() - x).norm();
    }
    return total / static_cast<double>(X.rows());
}

} // namespace pmdeg
