#include "pmdeg/pipeline.hpp"

#include "pmdeg/errors.hpp"
#include "pmdeg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace pmdeg {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_json(const fs::path& path, const json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << j.dump(1) << "\n";
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& X, const std::vector<std::size_t>& idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = X.row(static_cast<Eigen::Index>(idx[k]));
    return out;
}

std::vector<int> pick(const std::vector<int>& v, const std::vector<std::size_t>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(v[i]);
    return out;
}

std::string state_name(int cls) { return std::string(to_string(static_cast<State>(cls))); }

const fs::path& need_path(const fs::path& p, const char* key) {
    if (p.empty()) throw ConfigError(std::string("config: '") + key + "' is required for this command");
    return p;
}

ModelBundle need_bundle(const RunConfig& config) { return load_bundle(need_path(config.bundle, "bundle")); }

std::vector<PowerCurve> labeled_only(std::vector<PowerCurve> curves) {
    std::erase_if(curves, [](const PowerCurve& c) { return !c.label || *c.label == State::NonfaultUnlabeled; });
    return curves;
}

json seeds_json(const RunConfig& c) {
    json s = {{"seed", c.seed}, {"mining_som_base", stream_seed(c.seed, SeedStream::Mining)}};
    json splits = json::array(), cv = json::array(), swarm = json::array();
    for (int r = 0; r < c.repeats; ++r) {
        const auto ru = static_cast<std::uint64_t>(r);
        splits.push_back(stream_seed(c.seed, SeedStream::Split, ru));
        cv.push_back(stream_seed(c.seed, SeedStream::CrossValidation, ru));
        swarm.push_back(stream_seed(c.seed, SeedStream::Swarm, ru));
    }
    s["split"] = splits;
    s["cross_validation"] = cv;
    s["swarm"] = swarm;
    return s;
}

json ids_of(const std::vector<PowerCurve>& curves, const std::vector<std::size_t>& idx) {
    json a = json::array();
    for (auto i : idx) a.push_back(curves[i].sample_id);
    return a;
}

json vec_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

std::vector<int> labels_of(const std::vector<PowerCurve>& curves) {
    std::vector<int> y;
    y.reserve(curves.size());
    for (const auto& c : curves) y.push_back(static_cast<int>(*c.label));
    return y;
}

std::string csv_safe(std::string s) {
    for (char& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    return s;
}

json evaluation_json(const SplitEvaluation& ev, const std::vector<PowerCurve>& curves, const Split& split) {
    json classes = json::array();
    for (int c : ev.classes) classes.push_back(state_name(c));
    return json{{"C", ev.C},
                {"sigma", ev.sigma},
                {"gamma", ev.gamma ? json(*ev.gamma) : json(nullptr)},
                {"cv_fitness", ev.cv_fitness},
                {"pso_iterations", ev.pso_iterations},
                {"best_fitness_history", ev.best_history},
                {"mean_fitness_history", ev.mean_history},
                {"train_accuracy", ev.train_accuracy},
                {"test_accuracy", ev.test_accuracy},
                {"classes", classes},
                {"per_class_accuracy", ev.per_class_accuracy},
                {"confusion", ev.confusion},
                {"train_ids", ids_of(curves, split.train)},
                {"test_ids", ids_of(curves, split.test)}};
}

struct Degradation {
    std::vector<PowerCurve> curves;
    std::vector<int> labels;
    Eigen::MatrixXd raw;
};

Degradation load_degradation(const RunConfig& config) {
    Degradation d;
    d.curves = labeled_only(load_dataset(need_path(config.data.degradation, "data.degradation")));
    require(!d.curves.empty(), "degradation set has no labeled curves");
    d.labels = labels_of(d.curves);
    require(std::set<int>(d.labels.begin(), d.labels.end()).size() >= 2, "degradation set needs >= 2 states");
    d.raw = extract_matrix(d.curves);
    return d;
}

} // namespace

Eigen::MatrixXd reduce_features(const FeatureStages& stages, const Eigen::MatrixXd& raw) {
    require(raw.cols() == static_cast<Eigen::Index>(kFeatureCount), "reduce_features: expected 64 columns");
    return normalize_apply_rows(stages.normalization, apply_mask(stages.mask, raw));
}

Eigen::MatrixXd transform_features(const FeatureStages& stages, const Eigen::MatrixXd& raw) {
    return kpca_transform_rows(stages.kpca, reduce_features(stages, raw));
}

FeatureStages fit_feature_stages(const std::vector<PowerCurve>& standard, double kpca_sigma, int components) {
    std::vector<PowerCurve> normal, fault;
    std::map<State, std::vector<PowerCurve>> per_fault;
    std::vector<PowerCurve> fit_set;
    for (const auto& c : standard) {
        if (!c.label) continue;
        if (*c.label == State::N) {
            normal.push_back(c);
            fit_set.push_back(c);
        } else if (is_fault(*c.label)) {
            fault.push_back(c);
            per_fault[*c.label].push_back(c);
            fit_set.push_back(c);
        }
    }
    require(normal.size() >= 2, "standard set needs >= 2 labeled N curves");
    require(fault.size() >= 2, "standard set needs >= 2 labeled fault curves");

    FeatureStages st;
    const Eigen::MatrixXd XN = extract_matrix(normal);
    const Eigen::MatrixXd XF = extract_matrix(fault);
    st.mask = select_features(XF, XN, &st.fisher);
    const Eigen::MatrixXd S = apply_mask(st.mask, extract_matrix(fit_set));
    st.normalization = normalize_fit(S);
    st.kpca = kpca_fit(normalize_apply_rows(st.normalization, S), kpca_sigma, components);

    std::vector<Eigen::MatrixXd> fault_rows;
    for (const auto& [state, curves] : per_fault) fault_rows.push_back(transform_features(st, extract_matrix(curves)));
    st.reference = make_normal_reference(transform_features(st, XN), fault_rows);
    return st;
}

Split stratified_split(const std::vector<int>& labels, int train_part, int test_part, std::uint64_t seed) {
    require(train_part >= 1 && test_part >= 1, "stratified_split: ratio parts must be >= 1");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    auto rng = seeded_engine(seed, 0x73706c6974ULL);
    Split s;
    const double frac = static_cast<double>(test_part) / (train_part + test_part);
    for (auto& [cls, idx] : by_class) {
        for (std::size_t k = idx.size(); k > 1; --k) {
            const auto j = std::min(k - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(k)));
            std::swap(idx[k - 1], idx[j]);
        }
        const auto n_test = static_cast<std::size_t>(std::llround(frac * static_cast<double>(idx.size())));
        require(n_test >= 1 && n_test < idx.size(),
                "stratified_split: state " + state_name(cls) + " is too small to split");
        s.test.insert(s.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
        s.train.insert(s.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

SplitEvaluation evaluate_split(const Eigen::MatrixXd& Z, const std::vector<int>& labels, const Split& split,
                               bool tune, const RunConfig& config, std::uint64_t repeat) {
    const Eigen::MatrixXd Ztr = rows_of(Z, split.train);
    const std::vector<int> ytr = pick(labels, split.train);
    {
        std::map<int, int> per;
        for (int y : ytr) ++per[y];
        for (const auto& [cls, n] : per)
            require(n >= config.folds, "state " + state_name(cls) + " has " + std::to_string(n) +
                                           " training samples, fewer than " + std::to_string(config.folds) + " folds");
    }

    SplitEvaluation ev;
    SvmTrainConfig sc = config.svm;
    if (tune) {
        PsoConfig pc = config.pso;
        pc.seed = stream_seed(config.seed, SeedStream::Swarm, repeat);
        const auto t = tune_svm(Ztr, ytr, pc, config.folds, stream_seed(config.seed, SeedStream::CrossValidation, repeat),
                                config.pso_kernel_param);
        if (t.param == KernelParam::Gamma) ev.gamma = t.kernel_value;
        sc.C = t.C;
        sc.sigma = t.sigma;
        ev.cv_fitness = t.search.best_fitness;
        ev.pso_iterations = t.search.iterations;
        ev.best_history = t.search.best_history;
        ev.mean_history = t.search.mean_history;
    } else {
        ev.cv_fitness = cross_val_accuracy(Ztr, ytr, sc, config.folds,
                                           stream_seed(config.seed, SeedStream::CrossValidation, repeat));
    }
    ev.C = sc.effective_C();
    ev.sigma = sc.effective_sigma();
    ev.model = train_ovo(Ztr, ytr, sc);
    ev.classes = ev.model.classes;

    std::map<int, std::size_t> pos;
    for (std::size_t k = 0; k < ev.classes.size(); ++k) pos[ev.classes[k]] = k;
    ev.confusion.assign(ev.classes.size(), std::vector<int>(ev.classes.size(), 0));
    auto score = [&](const std::vector<std::size_t>& idx, bool record) {
        std::size_t correct = 0;
        for (auto i : idx) {
            const int predicted = predict_ovo(ev.model, Z.row(static_cast<Eigen::Index>(i)).transpose()).label;
            correct += predicted == labels[i];
            if (record && pos.count(labels[i])) ++ev.confusion[pos[labels[i]]][pos[predicted]];
        }
        return idx.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(idx.size());
    };
    ev.train_accuracy = score(split.train, false);
    ev.test_accuracy = score(split.test, true);
    for (std::size_t k = 0; k < ev.classes.size(); ++k) {
        int total = 0;
        for (int v : ev.confusion[k]) total += v;
        ev.per_class_accuracy.push_back(total ? static_cast<double>(ev.confusion[k][k]) / total : 0.0);
    }
    return ev;
}

int cmd_synth(const RunConfig& config, const fs::path& out_dir) {
    config.validate();
    const auto ds = generate_dataset(config.counts, config.generator, config.seed);
    write_dataset(out_dir, ds);
    json counts = json::object();
    for (const auto& [state, n] : config.counts) counts[std::string(to_string(state))] = n;
    write_json(out_dir / "synth_report.json", {{"command", "synth"},
                                               {"seed", config.seed},
                                               {"counts", counts},
                                               {"curves", ds.curves.size()},
                                               {"fingerprint", hex64(dataset_fingerprint(ds.curves))},
                                               {"config", config.to_json()}});
    return 0;
}

int cmd_fit_features(const RunConfig& config, const fs::path& out_dir) {
    config.validate();
    const auto curves = load_dataset(need_path(config.data.standard, "data.standard"));
    ModelBundle b;
    b.features = fit_feature_stages(curves, config.kpca_sigma, config.kpca_components);
    const auto fp = hex64(dataset_fingerprint(curves));
    b.provenance = {{"fit_features", {{"seeds", seeds_json(config)}, {"standard_fingerprint", fp}, {"config", config.to_json()}}}};
    save_bundle(out_dir / "bundle.json", b);

    const auto& names = FeatureVector::names();
    const auto& f = b.features;
    json selected = json::array();
    for (auto i : f.mask.indices) selected.push_back({{"index", i}, {"name", names[i]}, {"J", f.fisher.criterion[static_cast<Eigen::Index>(i)]}});
    json pruned = json::array();
    for (const auto& p : f.mask.pruned) pruned.push_back({{"kept", names[p.kept]}, {"dropped", names[p.dropped]}, {"rho", p.rho}});
    json criterion = json::object();
    for (std::size_t d = 0; d < kFeatureCount; ++d) criterion[names[d]] = f.fisher.criterion[static_cast<Eigen::Index>(d)];
    write_json(out_dir / "fit_report.json", {{"command", "fit-features"},
                                             {"seed", config.seed},
                                             {"standard_fingerprint", fp},
                                             {"fit_samples", f.kpca.training.rows()},
                                             {"selected", selected},
                                             {"threshold", f.mask.threshold},
                                             {"pruned", pruned},
                                             {"criterion", criterion},
                                             {"kpca_sigma", f.kpca.sigma},
                                             {"kpca_components", f.kpca.components},
                                             {"eigenvalues", vec_json(f.kpca.eigenvalues)},
                                             {"variance_ratio", f.kpca.variance_ratio}});
    return 0;
}

int cmd_mine(const RunConfig& config, const fs::path& out_dir) {
    config.validate();
    ModelBundle b = need_bundle(config);
    const fs::path manifest = need_path(config.data.nonfault, "data.nonfault");
    auto curves = load_dataset(manifest);
    std::erase_if(curves, [](const PowerCurve& c) { return c.label != State::NonfaultUnlabeled; });
    require(!curves.empty(), "nonfault set " + manifest.string() + " has no NONFAULT_UNLABELED curves");

    const Eigen::MatrixXd Z = transform_features(b.features, extract_matrix(curves));
    MiningConfig mc = config.mining;
    mc.som.seed = stream_seed(config.seed, SeedStream::Mining);
    const std::optional<NormalReference> reference =
        config.mining_use_reference ? b.features.reference : std::optional<NormalReference>{};
    const MiningRun run = run_mining(Z, mc, reference);

    std::map<std::string, State> truth;
    fs::path truth_path = config.data.truth;
    if (truth_path.empty() && fs::exists(manifest.parent_path() / "truth.csv")) truth_path = manifest.parent_path() / "truth.csv";
    if (!truth_path.empty())
        for (const auto& t : read_truth(truth_path)) truth[t.sample_id] = t.true_label;

    auto composition = [&](const std::vector<std::size_t>& members, double* purity) {
        std::map<std::string, int> h;
        for (auto m : members) {
            const auto it = truth.find(curves[m].sample_id);
            ++h[it == truth.end() ? std::string("unknown") : std::string(to_string(it->second))];
        }
        int best = 0;
        for (const auto& [k, v] : h) best = std::max(best, v);
        if (purity) *purity = members.empty() ? 0.0 : static_cast<double>(best) / static_cast<double>(members.size());
        return h;
    };

    const auto& res = run.result;
    json states = json::array();
    double purity_sum = 0.0;
    std::size_t placed = 0;
    for (const auto& s : res.states) {
        json st = {{"name", s.name},
                   {"sequence", s.triple},
                   {"size", s.members.size()},
                   {"members", ids_of(curves, s.members)},
                   {"centroid", vec_json(s.centroid)}};
        if (!truth.empty()) {
            double purity = 0.0;
            st["composition"] = composition(s.members, &purity);
            st["purity"] = purity;
            purity_sum += purity;
        }
        placed += s.members.size();
        states.push_back(st);
    }
    json removed = json::array();
    for (const auto& c : res.removed_normal) {
        json r = {{"sequence", c.triple}, {"size", c.members.size()}, {"members", ids_of(curves, c.members)}};
        if (!truth.empty()) r["composition"] = composition(c.members, nullptr);
        removed.push_back(r);
    }
    json maps = json::array();
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& m = run.clusters.maps[k];
        maps.push_back({{"grid", m.grid},
                        {"threshold", run.thresholds[k]},
                        {"counts", run.counts[k]},
                        {"selected_neurons", run.dense[k]},
                        {"quantization_error", quantization_error(m, Z)}});
    }
    json report = {{"command", "mine"},
                   {"seed", config.seed},
                   {"som_seed_base", mc.som.seed},
                   {"nonfault_fingerprint", hex64(dataset_fingerprint(curves))},
                   {"samples", curves.size()},
                   {"density_m", run.density_m},
                   {"normal_rule", reference ? "reference" : "first_pc_threshold"},
                   {"maps", maps},
                   {"P", run.cascade.sel1.size()},
                   {"Q", run.cascade.sel2.size()},
                   {"R", run.cascade.sel3.size()},
                   {"merge_remap_c", run.remap_c},
                   {"merge_remap_b", run.remap_b},
                   {"states", states},
                   {"removed_normal", removed},
                   {"undivided", ids_of(curves, res.undivided)},
                   {"placed_fraction", static_cast<double>(placed) / static_cast<double>(curves.size())}};
    if (!truth.empty() && !res.states.empty()) report["mean_purity"] = purity_sum / static_cast<double>(res.states.size());

    // Only D1..D6 are representable labels; further states stay in the report.
    fs::create_directories(out_dir / "degradation" / "curves");
    std::vector<ManifestEntry> entries;
    json overflow = json::array();
    for (std::size_t k = 0; k < res.states.size(); ++k) {
        if (k >= 6) {
            overflow.push_back(res.states[k].name);
            continue;
        }
        const State label = degradation_state(static_cast<int>(k) + 1);
        for (auto m : res.states[k].members) {
            PowerCurve c = curves[m];
            c.label = label;
            const fs::path rel = fs::path("curves") / (c.sample_id + ".csv");
            write_curve_csv(out_dir / "degradation" / rel, c);
            entries.push_back({c.sample_id, label, rel});
        }
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });
    report["unlabeled_overflow_states"] = overflow;
    write_manifest(out_dir / "degradation" / "manifest.csv", entries);
    write_json(out_dir / "mining_report.json", report);

    b.soms = run.clusters.maps;
    b.provenance["mine"] = {{"seeds", seeds_json(config)},
                            {"som_seed_base", mc.som.seed},
                            {"nonfault_fingerprint", hex64(dataset_fingerprint(curves))},
                            {"config", config.to_json()}};
    save_bundle(out_dir / "bundle.json", b);
    return 0;
}

int cmd_train(const RunConfig& config, const fs::path& out_dir) {
    config.validate();
    ModelBundle b = need_bundle(config);
    const Degradation d = load_degradation(config);
    const Eigen::MatrixXd Z = transform_features(b.features, d.raw);

    json repeats = json::array();
    double mean_ca = 0.0;
    std::vector<double> per_class;
    std::vector<int> classes;
    std::optional<SplitEvaluation> first;
    for (int r = 0; r < config.repeats; ++r) {
        const auto ru = static_cast<std::uint64_t>(r);
        const Split split = stratified_split(d.labels, config.split_train, config.split_test,
                                             stream_seed(config.seed, SeedStream::Split, ru));
        SplitEvaluation ev = evaluate_split(Z, d.labels, split, true, config, ru);
        json rj = evaluation_json(ev, d.curves, split);
        rj["repeat"] = r;
        repeats.push_back(rj);
        mean_ca += ev.test_accuracy;
        if (per_class.empty()) per_class.assign(ev.per_class_accuracy.size(), 0.0);
        for (std::size_t k = 0; k < per_class.size(); ++k) per_class[k] += ev.per_class_accuracy[k];
        classes = ev.classes;
        if (!first) first = std::move(ev);
    }
    mean_ca /= config.repeats;
    json pc = json::object();
    for (std::size_t k = 0; k < classes.size(); ++k) pc[state_name(classes[k])] = per_class[k] / config.repeats;

    const auto fp = hex64(dataset_fingerprint(d.curves));
    write_json(out_dir / "train_report.json", {{"command", "train"},
                                               {"seed", config.seed},
                                               {"seeds", seeds_json(config)},
                                               {"degradation_fingerprint", fp},
                                               {"samples", d.curves.size()},
                                               {"repeats", repeats},
                                               {"mean_test_accuracy", mean_ca},
                                               {"mean_per_class_accuracy", pc},
                                               {"bundle_model_repeat", 0}});

    b.svm = first->model;
    b.provenance["train"] = {{"seeds", seeds_json(config)},
                             {"degradation_fingerprint", fp},
                             {"model_repeat", 0},
                             {"C", first->C},
                             {"sigma", first->sigma},
                             {"config", config.to_json()}};
    save_bundle(out_dir / "bundle.json", b);
    return 0;
}

int cmd_classify(const RunConfig& config, const fs::path& out_dir) {
    config.validate();
    const ModelBundle b = need_bundle(config);
    if (!b.svm) throw DataError("bundle has no classifier; run train first");
    const fs::path manifest = need_path(config.data.classify, "data.classify");
    const auto entries = read_manifest(manifest);

    fs::create_directories(out_dir);
    std::ofstream out(out_dir / "predictions.csv", std::ios::binary);
    if (!out) throw DataError("cannot write predictions");
    out << "sample_id,predicted";
    for (int c : b.svm->classes) out << ",votes_" << state_name(c);
    out << ",status\n";

    std::size_t failures = 0, labeled = 0, correct = 0;
    json errors = json::array();
    for (const auto& e : entries) {
        const fs::path file = e.path.is_absolute() ? e.path : manifest.parent_path() / e.path;
        try {
            const PowerCurve curve = read_curve_csv(file, e.sample_id);
            curve.validate();
            Eigen::MatrixXd raw(1, static_cast<Eigen::Index>(kFeatureCount));
            raw.row(0) = extract(curve).as_eigen().transpose();
            const Eigen::MatrixXd z = transform_features(b.features, raw);
            const auto p = predict_ovo(*b.svm, z.row(0).transpose());
            out << e.sample_id << ',' << state_name(p.label);
            for (int v : p.votes) out << ',' << v;
            out << ",ok\n";
            if (e.label != State::NonfaultUnlabeled) {
                ++labeled;
                correct += static_cast<int>(e.label) == p.label;
            }
        } catch (const std::invalid_argument& ex) {
            ++failures;
            out << e.sample_id << ',';
            for (std::size_t k = 0; k < b.svm->classes.size(); ++k) out << ',';
            out << ",error: " << csv_safe(ex.what()) << '\n';
            errors.push_back({{"sample_id", e.sample_id}, {"error", ex.what()}});
        }
    }
    json report = {{"command", "classify"},
                   {"curves", entries.size()},
                   {"failed", failures},
                   {"errors", errors},
                   {"labeled", labeled},
                   {"correct", correct}};
    if (labeled) report["accuracy"] = static_cast<double>(correct) / static_cast<double>(labeled);
    write_json(out_dir / "classify_report.json", report);
    return failures ? 2 : 0;
}

int cmd_eval_ablation(const RunConfig& config, const fs::path& out_dir) {
    config.validate();
    const ModelBundle b = need_bundle(config);
    const Degradation d = load_degradation(config);
    const Eigen::MatrixXd reduced = reduce_features(b.features, d.raw);
    const Eigen::MatrixXd kpca_z = kpca_transform_rows(b.features.kpca, reduced);
    // Linear PCA cannot exceed the selected feature count.
    const int pca_k = std::min<int>(b.features.kpca.components, static_cast<int>(b.features.kpca.training.cols()));
    const PcaModel pca = pca_fit(b.features.kpca.training, pca_k);
    const Eigen::MatrixXd pca_z = pca_transform_rows(pca, reduced);

    std::vector<Split> splits;
    for (int r = 0; r < config.repeats; ++r)
        splits.push_back(stratified_split(d.labels, config.split_train, config.split_test,
                                          stream_seed(config.seed, SeedStream::Split, static_cast<std::uint64_t>(r))));

    const std::set<int> class_set(d.labels.begin(), d.labels.end());
    const std::vector<int> classes(class_set.begin(), class_set.end());
    std::map<std::string, std::vector<double>> table; // variant -> per class..., CA
    json variants = json::object();
    for (const auto& v : config.ablation_variants) {
        const Eigen::MatrixXd& Z = v.rfind("KPCA", 0) == 0 ? kpca_z : (v.rfind("PCA", 0) == 0 ? pca_z : reduced);
        const bool tune = v.find("PSO") != std::string::npos;
        std::vector<double> col(classes.size() + 1, 0.0);
        json reps = json::array();
        for (int r = 0; r < config.repeats; ++r) {
            const auto ev = evaluate_split(Z, d.labels, splits[static_cast<std::size_t>(r)], tune, config,
                                           static_cast<std::uint64_t>(r));
            for (std::size_t k = 0; k < classes.size(); ++k) col[k] += ev.per_class_accuracy[k];
            col.back() += ev.test_accuracy;
            json rj = evaluation_json(ev, d.curves, splits[static_cast<std::size_t>(r)]);
            rj.erase("train_ids");
            rj.erase("test_ids");
            rj["repeat"] = r;
            reps.push_back(rj);
        }
        for (double& x : col) x /= config.repeats;
        table[v] = col;
        variants[v] = {{"input_dim", Z.cols()}, {"tuned", tune}, {"mean_test_accuracy", col.back()}, {"repeats", reps}};
    }

    fs::create_directories(out_dir);
    std::ofstream out(out_dir / "ablation.csv", std::ios::binary);
    if (!out) throw DataError("cannot write ablation table");
    out << "metric";
    for (const auto& v : config.ablation_variants) out << ',' << v;
    out << '\n';
    for (std::size_t k = 0; k <= classes.size(); ++k) {
        out << (k < classes.size() ? state_name(classes[k]) : std::string("CA"));
        for (const auto& v : config.ablation_variants) out << ',' << format_double(table[v][k], 6);
        out << '\n';
    }
    write_json(out_dir / "ablation_report.json", {{"command", "eval-ablation"},
                                                  {"seed", config.seed},
                                                  {"seeds", seeds_json(config)},
                                                  {"degradation_fingerprint", hex64(dataset_fingerprint(d.curves))},
                                                  {"variants", variants}});
    return 0;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 1;
    if (dynamic_cast<const std::invalid_argument*>(&e)) return 2;
    return 3;
}

} // namespace pmdeg
