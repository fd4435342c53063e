#pragma once

// Kohonen self-organizing map on a square hexagonal lattice.
//
// Neuron labels are 1-based and row-major: label = row * g + col + 1. Odd
// rows are shifted half a cell to the right ("odd-r" offset layout); lattice
// distances use the equivalent axial coordinates.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace pmdeg {

struct SomTrainConfig {
    int ordering_iterations = 1000;
    int convergence_epochs = 20;
    double initial_learning_rate = 0.5;
    double convergence_learning_rate = 0.05;
    std::optional<double> initial_radius; ///< defaults to grid - 1 (at least 1)
    std::uint64_t seed = 0;

    /// Throws ConfigError.
    void validate() const;
};

struct HexCoord {
    int q = 0;
    int r = 0;
};

struct SomModel {
    int grid = 0;            ///< g; the lattice is g x g
    Eigen::MatrixXd weights; ///< g^2 x m, row (label - 1)

    int neuron_count() const { return grid * grid; }
    Eigen::Index input_dim() const { return weights.cols(); }
    HexCoord coord(int label) const;
    int hex_distance(int a, int b) const;
};

/// Nearest neuron by Euclidean distance, ties to the lowest label.
int winner(const SomModel& model, const Eigen::VectorXd& x);

/// w_j += eta (x - w_j) for every label in `neighborhood`.
void update(SomModel& model, const Eigen::VectorXd& x, double eta, const std::vector<int>& neighborhood);

/// Ordering phase: `ordering_iterations` random draws with
/// eta(t) = max(eta0 exp(-4t/T), eta_conv) and a bubble neighbourhood whose
/// lattice radius shrinks linearly from N0 to 1. Convergence phase:
/// `convergence_epochs` shuffled passes at eta_conv with radius 1.
SomModel train(const Eigen::MatrixXd& X, int grid, const SomTrainConfig& config);

/// Weights drawn uniformly within each column's data range.
SomModel initialize(const Eigen::MatrixXd& X, int grid, std::uint64_t seed);

double ordering_learning_rate(int t, const SomTrainConfig& config);
double ordering_radius(int t, int grid, const SomTrainConfig& config);

std::vector<int> assign(const SomModel& model, const Eigen::MatrixXd& X);
/// counts[label - 1] = number of labels equal to `label`.
std::vector<int> label_counts(const SomModel& model, const std::vector<int>& labels);

/// Unordered lattice-adjacent label pairs (a < b), sorted.
std::vector<std::pair<int, int>> neuron_adjacency(const SomModel& model);
/// Euclidean weight distance for each pair of neuron_adjacency(model).
std::vector<double> adjacent_weight_distances(const SomModel& model);

/// Mean distance from each row of X to its winner's weight vector.
double quantization_error(const SomModel& model, const Eigen::MatrixXd& X);

} // namespace pmdeg
