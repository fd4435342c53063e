#include "pmdeg/mining.hpp"

#include "pmdeg/rng.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

namespace pmdeg {

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Eigen::VectorXd centroid_of(const Eigen::MatrixXd& X, const std::vector<std::size_t>& members) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(X.cols());
    for (auto i : members) c += X.row(static_cast<Eigen::Index>(i)).transpose();
    return members.empty() ? c : Eigen::VectorXd(c / static_cast<double>(members.size()));
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n + 1)) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
};

} // namespace

void MiningConfig::validate() const {
    if (base_grid < 2) throw ConfigError("mining: base grid must be >= 2");
    if (!(merge_tolerance > 0.0)) throw ConfigError("mining: merge tolerance must be > 0");
    if (normal_first_pc_threshold < 0.0) throw ConfigError("mining: normal threshold must be >= 0");
    if (!(normal_radius_scale > 0.0)) throw ConfigError("mining: normal radius scale must be > 0");
    if (min_state_size < 1) throw ConfigError("mining: min state size must be >= 1");
    if (density_m && !(*density_m > 0.0)) throw ConfigError("mining: M must be > 0");
    som.validate();
}

MultiResolution multi_resolution_cluster(const Eigen::MatrixXd& X_nf, const MiningConfig& config) {
    config.validate();
    require(X_nf.rows() > 0, "mining: empty nonfault feature set");
    MultiResolution out;
    for (int k = 0; k < 3; ++k) {
        SomTrainConfig sc = config.som;
        sc.seed = derive_seed(config.som.seed, static_cast<std::uint64_t>(k));
        out.maps[static_cast<std::size_t>(k)] = train(X_nf, config.base_grid + k, sc);
    }
    std::array<std::vector<int>, 3> labels;
    for (std::size_t k = 0; k < 3; ++k) labels[k] = assign(out.maps[k], X_nf);
    out.seq1.resize(static_cast<std::size_t>(X_nf.rows()));
    for (std::size_t i = 0; i < out.seq1.size(); ++i) out.seq1[i] = {labels[0][i], labels[1][i], labels[2][i]};
    return out;
}

std::vector<int> dense_neurons(const std::vector<int>& counts, int cells, double M) {
    const double threshold = M / static_cast<double>(cells);
    std::vector<int> out;
    for (std::size_t j = 0; j < counts.size(); ++j)
        if (static_cast<double>(counts[j]) >= threshold) out.push_back(static_cast<int>(j) + 1);
    return out;
}

CascadeResult cascade_select(const std::vector<LabelTriple>& seq1, const std::array<std::vector<int>, 3>& dense) {
    CascadeResult r;
    auto contains = [](const std::vector<int>& set, int v) { return std::find(set.begin(), set.end(), v) != set.end(); };

    for (std::size_t i = 0; i < seq1.size(); ++i)
        if (contains(dense[0], seq1[i][0])) {
            r.sel1.push_back(i);
            r.seq2.push_back(seq1[i]);
        }
    if (r.sel1.empty()) {
        r.aborted = "first map selected no samples";
        return r;
    }
    for (std::size_t k = 0; k < r.sel1.size(); ++k)
        if (contains(dense[1], r.seq2[k][1])) {
            r.sel2.push_back(r.sel1[k]);
            r.seq3.push_back(r.seq2[k]);
        }
    if (r.sel2.empty()) {
        r.aborted = "second map selected no samples";
        return r;
    }
    for (std::size_t k = 0; k < r.sel2.size(); ++k)
        if (contains(dense[2], r.seq3[k][2])) {
            r.sel3.push_back(r.sel2[k]);
            r.seq4.push_back(r.seq3[k]);
        }
    if (r.sel3.empty()) r.aborted = "third map selected no samples";
    return r;
}

std::vector<int> merge_neighbors(const SomModel& model, const std::vector<int>& selected,
                                 const std::vector<int>& counts, double tolerance) {
    const int cells = model.neuron_count();
    require(static_cast<int>(counts.size()) == cells, "merge_neighbors: counts size mismatch");
    std::vector<bool> in_set(static_cast<std::size_t>(cells + 1), false);
    for (int l : selected) {
        require(l >= 1 && l <= cells, "merge_neighbors: label out of range");
        in_set[static_cast<std::size_t>(l)] = true;
    }

    const double gate = tolerance * median(adjacent_weight_distances(model));
    const auto adjacency = neuron_adjacency(model);
    UnionFind uf(cells);
    for (int u : selected) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (const auto& [a, b] : adjacency) {
            const int v = a == u ? b : (b == u ? a : 0);
            if (v == 0 || !in_set[static_cast<std::size_t>(v)]) continue;
            const double d = (model.weights.row(u - 1) - model.weights.row(v - 1)).norm();
            if (d < best_d || (d == best_d && v < best)) {
                best_d = d;
                best = v;
            }
        }
        if (best != 0 && best_d <= gate) uf.unite(u, best);
    }

    // Each group is represented by its most populated member (ties: lowest label).
    std::map<int, int> representative;
    for (int l = 1; l <= cells; ++l) {
        const int root = uf.find(l);
        auto it = representative.find(root);
        if (it == representative.end()) {
            representative[root] = l;
        } else if (counts[static_cast<std::size_t>(l - 1)] > counts[static_cast<std::size_t>(it->second - 1)]) {
            it->second = l;
        }
    }
    std::vector<int> remap(static_cast<std::size_t>(cells + 1), 0);
    for (int l = 1; l <= cells; ++l) remap[static_cast<std::size_t>(l)] = representative[uf.find(l)];
    return remap;
}

Candidates enumerate_states(const std::vector<std::size_t>& sel3, const std::vector<LabelTriple>& seq6,
                            int min_state_size) {
    require(sel3.size() == seq6.size(), "enumerate_states: sequence not aligned with Sel3");
    std::map<LabelTriple, std::vector<std::size_t>> groups;
    for (std::size_t k = 0; k < sel3.size(); ++k) groups[seq6[k]].push_back(sel3[k]);
    Candidates out;
    for (auto& [triple, members] : groups) {
        if (static_cast<int>(members.size()) >= min_state_size) {
            out.states.push_back({triple, std::move(members)});
        } else {
            out.undivided.insert(out.undivided.end(), members.begin(), members.end());
        }
    }
    std::sort(out.undivided.begin(), out.undivided.end());
    return out;
}

NormalReference make_normal_reference(const Eigen::MatrixXd& normal_rows,
                                      const std::vector<Eigen::MatrixXd>& fault_rows_per_class) {
    require(normal_rows.rows() > 0, "normal reference: no normal samples");
    NormalReference ref;
    ref.normal_centroid = normal_rows.colwise().mean().transpose();
    for (Eigen::Index i = 0; i < normal_rows.rows(); ++i)
        ref.normal_radius = std::max(ref.normal_radius, (normal_rows.row(i).transpose() - ref.normal_centroid).norm());
    for (const auto& f : fault_rows_per_class)
        if (f.rows() > 0) ref.fault_centroids.push_back(f.colwise().mean().transpose());
    return ref;
}

MiningResult remove_normal(const Candidates& candidates, const Eigen::MatrixXd& X_nf, const MiningConfig& config,
                           const std::optional<NormalReference>& reference) {
    MiningResult result;
    result.undivided = candidates.undivided;
    std::vector<DegradationState> kept;
    for (const auto& cand : candidates.states) {
        const Eigen::VectorXd c = centroid_of(X_nf, cand.members);
        bool normal = false;
        if (reference) {
            const double dn = (c - reference->normal_centroid).norm();
            double df = std::numeric_limits<double>::infinity();
            for (const auto& f : reference->fault_centroids) df = std::min(df, (c - f).norm());
            normal = dn < df && dn <= config.normal_radius_scale * reference->normal_radius;
        } else {
            normal = c.size() > 0 && c[0] < config.normal_first_pc_threshold;
        }
        if (normal) {
            result.removed_normal.push_back(cand);
        } else {
            kept.push_back({"", cand.triple, cand.members, c});
        }
    }
    std::stable_sort(kept.begin(), kept.end(),
                     [](const DegradationState& a, const DegradationState& b) { return a.members.size() > b.members.size(); });
    for (std::size_t k = 0; k < kept.size(); ++k) kept[k].name = "D" + std::to_string(k + 1);
    result.states = std::move(kept);
    return result;
}

MiningRun run_mining(const Eigen::MatrixXd& X_nf, const MiningConfig& config,
                     const std::optional<NormalReference>& reference) {
    MiningRun run;
    run.clusters = multi_resolution_cluster(X_nf, config);
    run.density_m = config.density_m.value_or(static_cast<double>(X_nf.rows()));

    std::array<std::vector<int>, 3> labels;
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& map = run.clusters.maps[k];
        labels[k].reserve(run.clusters.seq1.size());
        for (const auto& t : run.clusters.seq1) labels[k].push_back(t[k]);
        run.counts[k] = label_counts(map, labels[k]);
        run.thresholds[k] = run.density_m / map.neuron_count();
        run.dense[k] = dense_neurons(run.counts[k], map.neuron_count(), run.density_m);
    }

    run.cascade = cascade_select(run.clusters.seq1, run.dense);
    if (run.cascade.aborted) throw MiningAborted("mining aborted: " + *run.cascade.aborted);

    run.remap_c = merge_neighbors(run.clusters.maps[2], run.dense[2], run.counts[2], config.merge_tolerance);
    run.seq5 = run.cascade.seq4;
    for (auto& t : run.seq5) t[2] = run.remap_c[static_cast<std::size_t>(t[2])];
    run.remap_b = merge_neighbors(run.clusters.maps[1], run.dense[1], run.counts[1], config.merge_tolerance);
    run.seq6 = run.seq5;
    for (auto& t : run.seq6) t[1] = run.remap_b[static_cast<std::size_t>(t[1])];

    run.candidates = enumerate_states(run.cascade.sel3, run.seq6, config.min_state_size);
    run.result = remove_normal(run.candidates, X_nf, config, reference);

    // Samples filtered out by the cascade are undivided as well.
    std::vector<bool> in_sel3(static_cast<std::size_t>(X_nf.rows()), false);
    for (auto i : run.cascade.sel3) in_sel3[i] = true;
    auto& und = run.result.undivided;
    for (std::size_t i = 0; i < in_sel3.size(); ++i)
        if (!in_sel3[i]) und.push_back(i);
    std::sort(und.begin(), und.end());
    return run;
}

} // namespace pmdeg
