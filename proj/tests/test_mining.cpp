#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pmdeg/mining.hpp"
#include "pmdeg/rng.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

using namespace pmdeg;

namespace {

SomModel chain_model(int grid, const std::vector<std::pair<int, double>>& w) {
    SomModel m;
    m.grid = grid;
    m.weights = Eigen::MatrixXd::Zero(grid * grid, 1);
    for (int j = 0; j < grid * grid; ++j) m.weights(j, 0) = 10.0 * j; // far apart by default
    for (const auto& [label, v] : w) m.weights(label - 1, 0) = v;
    return m;
}

// Brute force: edges u -> nearest selected lattice neighbour within the gate,
// components by BFS, representative = max count then lowest label.
std::vector<int> merge_oracle(const SomModel& m, const std::vector<int>& sel, const std::vector<int>& counts, double tau) {
    const int cells = m.neuron_count();
    std::vector<double> adj_d;
    std::vector<std::vector<int>> nbr(static_cast<std::size_t>(cells + 1));
    for (int a = 1; a <= cells; ++a)
        for (int b = a + 1; b <= cells; ++b)
            if (m.hex_distance(a, b) == 1) {
                adj_d.push_back(std::abs(m.weights(a - 1, 0) - m.weights(b - 1, 0)));
                nbr[static_cast<std::size_t>(a)].push_back(b);
                nbr[static_cast<std::size_t>(b)].push_back(a);
            }
    std::sort(adj_d.begin(), adj_d.end());
    const std::size_t h = adj_d.size();
    const double med = h % 2 ? adj_d[h / 2] : 0.5 * (adj_d[h / 2 - 1] + adj_d[h / 2]);
    const std::set<int> in(sel.begin(), sel.end());
    std::vector<std::set<int>> g(static_cast<std::size_t>(cells + 1));
    for (int u : sel) {
        int best = 0;
        double bd = 1e300;
        for (int v : nbr[static_cast<std::size_t>(u)]) {
            if (!in.count(v)) continue;
            const double d = std::abs(m.weights(u - 1, 0) - m.weights(v - 1, 0));
            if (d < bd || (d == bd && v < best)) {
                bd = d;
                best = v;
            }
        }
        if (best && bd <= tau * med) {
            g[static_cast<std::size_t>(u)].insert(best);
            g[static_cast<std::size_t>(best)].insert(u);
        }
    }
    std::vector<int> remap(static_cast<std::size_t>(cells + 1), 0);
    for (int s = 1; s <= cells; ++s) {
        if (remap[static_cast<std::size_t>(s)]) continue;
        std::vector<int> comp;
        std::queue<int> q;
        q.push(s);
        std::set<int> seen{s};
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            comp.push_back(u);
            for (int v : g[static_cast<std::size_t>(u)])
                if (seen.insert(v).second) q.push(v);
        }
        int rep = *std::min_element(comp.begin(), comp.end());
        for (int u : comp)
            if (counts[static_cast<std::size_t>(u - 1)] > counts[static_cast<std::size_t>(rep - 1)] ||
                (counts[static_cast<std::size_t>(u - 1)] == counts[static_cast<std::size_t>(rep - 1)] && u < rep))
                rep = u;
        for (int u : comp) remap[static_cast<std::size_t>(u)] = rep;
    }
    return remap;
}

Eigen::MatrixXd clustered(std::uint64_t seed, int clusters, int per, int scattered, std::vector<int>* truth) {
    auto rng = seeded_engine(seed);
    std::normal_distribution<double> g(0.0, 0.01);
    Eigen::MatrixXd centres(clusters, 6);
    for (Eigen::Index i = 0; i < centres.size(); ++i) centres.data()[i] = uniform01(rng);
    Eigen::MatrixXd X(clusters * per + scattered, 6);
    truth->clear();
    for (int c = 0; c < clusters; ++c)
        for (int k = 0; k < per; ++k) {
            for (int d = 0; d < 6; ++d) X(c * per + k, d) = centres(c, d) + g(rng);
            truth->push_back(c);
        }
    for (int k = 0; k < scattered; ++k) {
        for (int d = 0; d < 6; ++d) X(clusters * per + k, d) = uniform01(rng);
        truth->push_back(-1);
    }
    return X;
}

} // namespace

TEST_CASE("density thresholds") {
    std::vector<int> counts(16, 0);
    counts[0] = 63;
    counts[1] = 62;
    CHECK(dense_neurons(counts, 16, 1000.0) == std::vector<int>{1});
    std::vector<int> one(16, 0);
    one[5] = 1000;
    CHECK(dense_neurons(one, 16, 1000.0) == std::vector<int>{6});
    std::vector<int> flat(16, 5);
    CHECK(dense_neurons(flat, 16, 80.0).size() == 16);
}

TEST_CASE("cascade filter") {
    std::vector<LabelTriple> seq = {{1, 1, 1}, {1, 2, 3}, {2, 2, 3}, {1, 2, 4}};
    std::array<std::vector<int>, 3> all = {std::vector<int>{1, 2}, std::vector<int>{1, 2}, std::vector<int>{1, 3, 4}};
    auto r = cascade_select(seq, all);
    CHECK(r.sel3.size() == 4);
    CHECK(!r.aborted);

    std::array<std::vector<int>, 3> some = {std::vector<int>{1}, std::vector<int>{2}, std::vector<int>{3}};
    r = cascade_select(seq, some);
    CHECK(r.sel1 == std::vector<std::size_t>{0, 1, 3});
    CHECK(r.sel2 == std::vector<std::size_t>{1, 3});
    CHECK(r.sel3 == std::vector<std::size_t>{1});
    CHECK(r.seq4 == std::vector<LabelTriple>{{1, 2, 3}});

    std::array<std::vector<int>, 3> none = {std::vector<int>{}, std::vector<int>{1}, std::vector<int>{1}};
    r = cascade_select(seq, none);
    CHECK(r.aborted);
    CHECK(r.sel1.empty());
}

TEST_CASE("merge rules") {
    SUBCASE("near-identical neighbours remap to the busier label") {
        auto m = chain_model(3, {{1, 0.0}, {2, 0.001}});
        std::vector<int> counts(9, 0);
        counts[0] = 40;
        counts[1] = 60;
        const auto remap = merge_neighbors(m, {1, 2}, counts, 1.0);
        CHECK(remap[1] == 2);
        CHECK(remap[2] == 2);
    }
    SUBCASE("non-adjacent selections are left alone") {
        auto m = chain_model(3, {{1, 0.0}, {3, 0.0}, {9, 0.0}});
        std::vector<int> counts(9, 10);
        const auto remap = merge_neighbors(m, {1, 3, 9}, counts, 1.0);
        for (int l = 1; l <= 9; ++l) CHECK(remap[static_cast<std::size_t>(l)] == l);
    }
    SUBCASE("three-neuron chain collapses to one group") {
        auto m = chain_model(3, {{1, 0.0}, {2, 0.001}, {3, 0.002}});
        std::vector<int> counts = {5, 7, 30, 0, 0, 0, 0, 0, 0};
        const auto remap = merge_neighbors(m, {1, 2, 3}, counts, 1.0);
        CHECK(remap == merge_oracle(m, {1, 2, 3}, counts, 1.0));
        CHECK(remap[1] == 3);
        CHECK(remap[2] == 3);
        CHECK(remap[3] == 3);
    }
    SUBCASE("random maps agree with the oracle") {
        auto rng = seeded_engine(12);
        for (int trial = 0; trial < 200; ++trial) {
            const int g = 3 + trial % 4;
            SomModel m;
            m.grid = g;
            m.weights.resize(g * g, 1);
            for (int j = 0; j < g * g; ++j) m.weights(j, 0) = std::round(uniform01(rng) * 8.0); // ties on purpose
            std::vector<int> sel, counts(static_cast<std::size_t>(g * g));
            for (int j = 1; j <= g * g; ++j) {
                counts[static_cast<std::size_t>(j - 1)] = static_cast<int>(uniform01(rng) * 5);
                if (uniform01(rng) < 0.6) sel.push_back(j);
            }
            const double tau = 0.5 + uniform01(rng);
            INFO("trial " << trial);
            CHECK(merge_neighbors(m, sel, counts, tau) == merge_oracle(m, sel, counts, tau));
        }
    }
}

TEST_CASE("state enumeration") {
    std::vector<std::size_t> sel3 = {0, 1, 2, 3, 4};
    std::vector<LabelTriple> one(5, LabelTriple{1, 2, 3});
    auto c = enumerate_states(sel3, one, 3);
    REQUIRE(c.states.size() == 1);
    CHECK(c.states[0].members.size() == 5);

    std::vector<LabelTriple> mixed = {{1, 1, 1}, {1, 1, 2}, {1, 1, 1}, {2, 2, 2}, {1, 1, 2}};
    CHECK(enumerate_states(sel3, mixed, 1).states.size() == 3);
    c = enumerate_states(sel3, mixed, 2);
    CHECK(c.states.size() == 2);
    CHECK(c.undivided == std::vector<std::size_t>{3});
}

TEST_CASE("normal removal rules") {
    Eigen::MatrixXd X(4, 2);
    X << 0.005, 1, 0.005, 1, 0.05, 0, 0.05, 0;
    Candidates cands;
    cands.states = {{{1, 1, 1}, {0, 1}}, {{2, 2, 2}, {2, 3}}};
    MiningConfig cfg;
    auto r = remove_normal(cands, X, cfg, std::nullopt);
    REQUIRE(r.removed_normal.size() == 1);
    CHECK(r.removed_normal[0].members == std::vector<std::size_t>{0, 1});
    REQUIRE(r.states.size() == 1);
    CHECK(r.states[0].name == "D1");

    cfg.normal_first_pc_threshold = 0.0;
    r = remove_normal(cands, X, cfg, std::nullopt);
    CHECK(r.states.size() == 2);
    CHECK(r.removed_normal.empty());

    // Reference rule: near the normal centroid and inside its radius.
    NormalReference ref;
    ref.normal_centroid = Eigen::Vector2d(0.0, 1.0);
    ref.normal_radius = 0.1;
    ref.fault_centroids = {Eigen::Vector2d(5.0, 5.0)};
    r = remove_normal(cands, X, MiningConfig{}, ref);
    CHECK(r.removed_normal.size() == 1);
    ref.normal_radius = 0.001;
    r = remove_normal(cands, X, MiningConfig{}, ref);
    CHECK(r.removed_normal.empty());
}

TEST_CASE("normal reference construction") {
    Eigen::MatrixXd N(2, 1), F(2, 1);
    N << 0, 2;
    F << 10, 12;
    const auto ref = make_normal_reference(N, {F, Eigen::MatrixXd(0, 1)});
    CHECK(ref.normal_centroid[0] == 1.0);
    CHECK(ref.normal_radius == 1.0);
    REQUIRE(ref.fault_centroids.size() == 1);
    CHECK(ref.fault_centroids[0][0] == 11.0);
}

TEST_CASE("clustered data survives the cascade and partitions cleanly") {
    int good_seeds = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::vector<int> truth;
        const auto X = clustered(seed, 7, 100, 300, &truth);
        MiningConfig cfg;
        cfg.som.seed = seed;
        cfg.normal_first_pc_threshold = 0.0;
        const auto run = run_mining(X, cfg, std::nullopt);
        const auto& cs = run.cascade;
        CHECK(X.rows() >= static_cast<Eigen::Index>(cs.sel1.size()));
        CHECK(cs.sel1.size() >= cs.sel2.size());
        CHECK(cs.sel2.size() >= cs.sel3.size());
        CHECK(run.clusters.maps[0].grid == 4);
        CHECK(run.clusters.maps[2].grid == 6);
        std::size_t clustered_kept = 0;
        for (auto i : cs.sel3) clustered_kept += truth[i] >= 0;
        good_seeds += clustered_kept >= 560;

        std::vector<int> seen(static_cast<std::size_t>(X.rows()), 0);
        for (const auto& s : run.result.states)
            for (auto i : s.members) ++seen[i];
        for (const auto& s : run.result.removed_normal)
            for (auto i : s.members) ++seen[i];
        for (auto i : run.result.undivided) ++seen[i];
        for (int v : seen) CHECK(v == 1);

        // remapping only relabels; Sel3 membership is untouched
        CHECK(run.seq6.size() == cs.sel3.size());
        for (std::size_t k = 0; k < cs.sel3.size(); ++k) CHECK(run.seq6[k][0] == cs.seq4[k][0]);
    }
    CHECK(good_seeds == 10);
}

TEST_CASE("empty survivors abort") {
    Eigen::MatrixXd X(1, 2);
    X << 0.3, 0.4;
    MiningConfig cfg;
    cfg.density_m = 1e9;
    CHECK_THROWS_AS(run_mining(X, cfg, std::nullopt), MiningAborted);
    CHECK_THROWS_AS(run_mining(Eigen::MatrixXd(0, 2), MiningConfig{}, std::nullopt), DataError);
}

TEST_CASE("duplicate samples share a triple") {
    Eigen::MatrixXd X(30, 2);
    auto rng = seeded_engine(1);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = uniform01(rng);
    X.row(7) = X.row(3);
    MiningConfig cfg;
    cfg.som.ordering_iterations = 200;
    const auto mr = multi_resolution_cluster(X, cfg);
    CHECK(mr.seq1.size() == 30);
    CHECK(mr.seq1[7] == mr.seq1[3]);
    for (const auto& t : mr.seq1) {
        CHECK(t[0] <= 16);
        CHECK(t[1] <= 25);
        CHECK(t[2] <= 36);
    }
}
