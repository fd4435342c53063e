#include "pmdeg/pso.hpp"

#include "pmdeg/errors.hpp"
#include "pmdeg/rng.hpp"
#include "pmdeg/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pmdeg {

namespace {

double evaluate(const Objective& objective, const Eigen::VectorXd& x) {
    const double f = objective(x);
    return std::isfinite(f) ? f : -std::numeric_limits<double>::infinity();
}

void record(SwarmState& s) {
    double mean = 0.0;
    for (const auto& p : s.particles) mean += p.fitness;
    s.best_history.push_back(s.global_best_fitness);
    s.mean_history.push_back(mean / static_cast<double>(s.particles.size()));
}

} // namespace

double PsoConfig::vmax(std::size_t d) const {
    return velocity_cap.empty() ? 0.2 * (upper[d] - lower[d]) : velocity_cap[d];
}

void PsoConfig::validate() const {
    if (particles < 2) throw ConfigError("pso: need at least two particles");
    if (max_iterations < 1) throw ConfigError("pso: max_iterations must be >= 1");
    if (!(w_min <= w_max)) throw ConfigError("pso: w_min must not exceed w_max");
    if (lower.empty() || lower.size() != upper.size()) throw ConfigError("pso: bounds missing or mismatched");
    for (std::size_t d = 0; d < lower.size(); ++d)
        if (!(lower[d] < upper[d])) throw ConfigError("pso: lower bound must be below upper bound");
    if (!velocity_cap.empty()) {
        if (velocity_cap.size() != lower.size()) throw ConfigError("pso: velocity cap size mismatch");
        for (double v : velocity_cap)
            if (!(v > 0.0)) throw ConfigError("pso: velocity caps must be > 0");
    }
}

double inertia(int t, const PsoConfig& config) {
    if (t < 0 || t > config.max_iterations) throw DataError("pso inertia: iteration out of range");
    return config.w_max - (static_cast<double>(t) / config.max_iterations) * (config.w_max - config.w_min);
}

SwarmState initialize_swarm(const Objective& objective, const PsoConfig& config, const UniformSource& uniform) {
    config.validate();
    const auto dim = static_cast<Eigen::Index>(config.dim());
    SwarmState s;
    s.particles.resize(static_cast<std::size_t>(config.particles));
    for (auto& p : s.particles) {
        p.position.resize(dim);
        p.velocity.resize(dim);
        for (Eigen::Index d = 0; d < dim; ++d) {
            const auto du = static_cast<std::size_t>(d);
            p.position[d] = config.lower[du] + (config.upper[du] - config.lower[du]) * uniform();
        }
        for (Eigen::Index d = 0; d < dim; ++d) {
            const double vm = config.vmax(static_cast<std::size_t>(d));
            p.velocity[d] = -vm + 2.0 * vm * uniform();
        }
        p.fitness = evaluate(objective, p.position);
        p.best_position = p.position;
        p.best_fitness = p.fitness;
    }
    s.global_best = s.particles.front().best_position;
    s.global_best_fitness = s.particles.front().best_fitness;
    for (const auto& p : s.particles)
        if (p.best_fitness > s.global_best_fitness) {
            s.global_best_fitness = p.best_fitness;
            s.global_best = p.best_position;
        }
    record(s);
    return s;
}

void step(SwarmState& state, const Objective& objective, const PsoConfig& config, const UniformSource& uniform) {
    const double w = inertia(std::min(state.iteration, config.max_iterations), config);
    const auto dim = static_cast<Eigen::Index>(config.dim());
    for (auto& p : state.particles) {
        for (Eigen::Index d = 0; d < dim; ++d) {
            const auto du = static_cast<std::size_t>(d);
            const double r = uniform();
            const double R = uniform();
            double v = w * p.velocity[d] + config.c1 * r * (p.best_position[d] - p.position[d]) +
                       config.c2 * R * (state.global_best[d] - p.position[d]);
            const double vm = config.vmax(du);
            v = std::clamp(v, -vm, vm);
            double x = p.position[d] + v;
            if (x < config.lower[du] || x > config.upper[du]) {
                x = std::clamp(x, config.lower[du], config.upper[du]);
                v = 0.0;
            }
            p.velocity[d] = v;
            p.position[d] = x;
        }
        p.fitness = evaluate(objective, p.position);
        if (p.fitness > p.best_fitness) {
            p.best_fitness = p.fitness;
            p.best_position = p.position;
        }
    }
    // Deterministic reduction in particle order.
    for (const auto& p : state.particles)
        if (p.best_fitness > state.global_best_fitness) {
            state.global_best_fitness = p.best_fitness;
            state.global_best = p.best_position;
        }
    ++state.iteration;
    record(state);
}

PsoResult optimize(const Objective& objective, const PsoConfig& config) {
    config.validate();
    auto rng = seeded_engine(config.seed, 0x70736fULL);
    const UniformSource uniform = [&rng] { return uniform01(rng); };
    SwarmState s = initialize_swarm(objective, config, uniform);
    auto reached = [&] { return config.fitness_target && s.global_best_fitness >= *config.fitness_target; };
    while (s.iteration < config.max_iterations && !reached()) step(s, objective, config, uniform);

    PsoResult r;
    r.best_position = s.global_best;
    r.best_fitness = s.global_best_fitness;
    r.iterations = s.iteration;
    r.best_history = std::move(s.best_history);
    r.mean_history = std::move(s.mean_history);
    return r;
}

PsoConfig svm_pso_defaults() {
    PsoConfig c;
    c.lower = {0.0, 0.0};
    c.upper = {100.0, 1000.0};
    return c;
}

std::string_view to_string(KernelParam p) { return p == KernelParam::Sigma ? "sigma" : "gamma"; }

KernelParam parse_kernel_param(std::string_view s) {
    if (s == "sigma") return KernelParam::Sigma;
    if (s == "gamma") return KernelParam::Gamma;
    throw ConfigError("kernel parameter must be 'sigma' or 'gamma'");
}

double kernel_sigma(KernelParam p, double value) {
    const double v = std::max(value, kSvmParamFloor);
    return p == KernelParam::Sigma ? v : 1.0 / std::sqrt(2.0 * v);
}

SvmTuning tune_svm(const Eigen::MatrixXd& X, const std::vector<int>& labels, const PsoConfig& config, int folds,
                   std::uint64_t cv_seed, KernelParam param) {
    if (config.dim() != 2) throw ConfigError("tune_svm: search space must be (C, sigma)");
    // Fail fast on data that cannot be split, before any particle is scored.
    (void)stratified_folds(labels, folds, cv_seed);
    const Objective objective = [&](const Eigen::VectorXd& p) {
        SvmTrainConfig sc;
        sc.C = p[0];
        sc.sigma = kernel_sigma(param, p[1]);
        return cross_val_accuracy(X, labels, sc, folds, cv_seed);
    };
    SvmTuning t;
    t.search = optimize(objective, config);
    t.C = std::max(t.search.best_position[0], kSvmParamFloor);
    t.param = param;
    t.kernel_value = std::max(t.search.best_position[1], kSvmParamFloor);
    t.sigma = kernel_sigma(param, t.search.best_position[1]);
    return t;
}

} // namespace pmdeg
