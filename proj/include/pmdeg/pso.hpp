#pragma once

// Global-best particle swarm optimizer with linearly decreasing inertia
// (maximization), and its use for tuning the (C, sigma) pair of the
// one-against-one RBF SVM by cross-validated accuracy.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace pmdeg {

struct PsoConfig {
    int particles = 20;
    int max_iterations = 200;
    double c1 = 1.5;
    double c2 = 1.7;
    double w_min = 0.4;
    double w_max = 0.9;
    std::vector<double> lower;
    std::vector<double> upper;
    /// Per-dimension velocity cap; empty means 0.2 x bound width.
    std::vector<double> velocity_cap;
    std::optional<double> fitness_target;
    std::uint64_t seed = 0;

    std::size_t dim() const { return lower.size(); }
    double vmax(std::size_t d) const;
    /// Throws ConfigError.
    void validate() const;
};

/// w = w_max - (t / t_max)(w_max - w_min) for 0 <= t <= t_max.
double inertia(int t, const PsoConfig& config);

struct Particle {
    Eigen::VectorXd position;
    Eigen::VectorXd velocity;
    Eigen::VectorXd best_position;
    double fitness = 0.0;
    double best_fitness = 0.0;
};

struct SwarmState {
    std::vector<Particle> particles;
    Eigen::VectorXd global_best;
    double global_best_fitness = 0.0;
    int iteration = 0; ///< completed steps
    std::vector<double> best_history; ///< best-so-far after init and every step
    std::vector<double> mean_history; ///< mean current fitness, same alignment
};

using Objective = std::function<double(const Eigen::VectorXd&)>;
/// Source of uniform [0, 1] draws for the r and R coefficients.
using UniformSource = std::function<double()>;

/// Uniform positions in the bounds, uniform velocities in [-vmax, vmax].
SwarmState initialize_swarm(const Objective& objective, const PsoConfig& config, const UniformSource& uniform);

/// One velocity/position update with inertia(state.iteration). r and R are
/// drawn per particle and dimension, in that order. Velocities are capped,
/// positions clamped to bounds (zeroing the clamped velocity component), and
/// bests updated on strict improvement. Non-finite fitness counts as -inf.
void step(SwarmState& state, const Objective& objective, const PsoConfig& config, const UniformSource& uniform);

struct PsoResult {
    Eigen::VectorXd best_position;
    double best_fitness = 0.0;
    int iterations = 0;
    std::vector<double> best_history;
    std::vector<double> mean_history;
};

/// Runs up to max_iterations steps, stopping early once the global best
/// reaches fitness_target.
PsoResult optimize(const Objective& objective, const PsoConfig& config);

/// Defaults with C in [0, 100] and the kernel coordinate in [0, 1000].
PsoConfig svm_pso_defaults();

/// What the second swarm coordinate means. Gamma: K = exp(-gamma |x - y|^2),
/// i.e. sigma = 1 / sqrt(2 gamma).
enum class KernelParam { Sigma, Gamma };
std::string_view to_string(KernelParam p);
KernelParam parse_kernel_param(std::string_view s);
/// Swarm coordinate -> RBF sigma, after flooring at kSvmParamFloor.
double kernel_sigma(KernelParam p, double value);

struct SvmTuning {
    double C = 1.0;
    double sigma = 1.0;
    KernelParam param = KernelParam::Gamma;
    double kernel_value = 1.0; ///< searched coordinate, floored
    PsoResult search;
};

/// Maximizes cross_val_accuracy(X, labels, (C, sigma), folds, cv_seed) over (C, kernel coordinate).
SvmTuning tune_svm(const Eigen::MatrixXd& X, const std::vector<int>& labels, const PsoConfig& config, int folds,
                   std::uint64_t cv_seed, KernelParam param = KernelParam::Gamma);

} // namespace pmdeg
