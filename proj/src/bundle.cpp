#include "pmdeg/pipeline.hpp"

#include "pmdeg/errors.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace pmdeg {

using nlohmann::json;

namespace {

json vec(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json mat(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec(m.row(r).transpose()));
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Eigen::VectorXd to_vec(const json& a) {
    if (!a.is_array()) throw DataError("bundle: expected an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
}

Eigen::MatrixXd to_mat(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows) throw DataError("bundle: matrix row count mismatch");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto row = to_vec(data[static_cast<std::size_t>(r)]);
        if (row.size() != cols) throw DataError("bundle: matrix column count mismatch");
        m.row(r) = row.transpose();
    }
    return m;
}

json som_json(const SomModel& m) { return json{{"grid", m.grid}, {"weights", mat(m.weights)}}; }

SomModel som_from(const json& j) {
    SomModel m;
    m.grid = j.at("grid").get<int>();
    m.weights = to_mat(j.at("weights"));
    return m;
}

json binary_json(const BinarySvmModel& m) {
    return json{{"support_vectors", mat(m.support_vectors)},
                {"labels", m.labels},
                {"alphas", vec(m.alphas)},
                {"bias", m.bias},
                {"sigma", m.sigma},
                {"C", m.C},
                {"converged", m.converged}};
}

BinarySvmModel binary_from(const json& j) {
    BinarySvmModel m;
    m.support_vectors = to_mat(j.at("support_vectors"));
    m.labels = j.at("labels").get<std::vector<int>>();
    m.alphas = to_vec(j.at("alphas"));
    m.bias = j.at("bias").get<double>();
    m.sigma = j.at("sigma").get<double>();
    m.C = j.at("C").get<double>();
    m.converged = j.at("converged").get<bool>();
    return m;
}

std::vector<std::string> class_names(const std::vector<int>& classes) {
    std::vector<std::string> out;
    for (int c : classes) out.emplace_back(to_string(static_cast<State>(c)));
    return out;
}

int class_from_name(const std::string& name) { return static_cast<int>(parse_state(name)); }

} // namespace

void ModelBundle::validate() const {
    const auto& f = features;
    if (version != kBundleVersion) throw BundleVersionError("bundle: unsupported version " + std::to_string(version));
    require(!f.mask.indices.empty(), "bundle: empty selection mask");
    for (auto i : f.mask.indices) require(i < kFeatureCount, "bundle: mask index out of range");
    require(f.fisher.dim() == static_cast<Eigen::Index>(kFeatureCount), "bundle: Fisher report must cover 64 dimensions");
    const auto selected = static_cast<Eigen::Index>(f.mask.indices.size());
    require(f.normalization.dim() == selected, "bundle: normalization dim differs from mask size");
    require(f.kpca.input_dim() == selected, "bundle: KPCA input dim differs from mask size");
    require(f.kpca.alphas.cols() == f.kpca.components && f.kpca.eigenvalues.size() == f.kpca.components,
            "bundle: KPCA component count inconsistent");
    const auto out_dim = static_cast<Eigen::Index>(f.kpca.components);
    if (f.reference) {
        require(f.reference->normal_centroid.size() == out_dim, "bundle: reference centroid dim mismatch");
        for (const auto& c : f.reference->fault_centroids)
            require(c.size() == out_dim, "bundle: fault centroid dim mismatch");
    }
    if (soms)
        for (const auto& m : *soms) {
            require(m.input_dim() == out_dim, "bundle: SOM input dim differs from KPCA output");
            require(m.weights.rows() == m.neuron_count(), "bundle: SOM weight rows mismatch");
        }
    if (svm) {
        require(svm->classes.size() >= 2, "bundle: classifier needs >= 2 classes");
        require(svm->machines.size() == svm->classes.size() * (svm->classes.size() - 1) / 2,
                "bundle: classifier has the wrong number of pairwise machines");
        for (const auto& pm : svm->machines)
            require(pm.model.input_dim() == out_dim, "bundle: classifier input dim differs from KPCA output");
    }
}

json bundle_to_json(const ModelBundle& b) {
    const auto& f = b.features;
    json j;
    j["format"] = kBundleFormat;
    j["version"] = b.version;

    json pruned = json::array();
    for (const auto& p : f.mask.pruned) pruned.push_back({{"kept", p.kept}, {"dropped", p.dropped}, {"rho", p.rho}});
    j["selection"] = {{"indices", f.mask.indices}, {"threshold", f.mask.threshold}, {"pruned", pruned}};
    j["fisher"] = {{"mean_fault", vec(f.fisher.mean_fault)},   {"sd_fault", vec(f.fisher.sd_fault)},
                   {"mean_normal", vec(f.fisher.mean_normal)}, {"sd_normal", vec(f.fisher.sd_normal)},
                   {"between", vec(f.fisher.between)},         {"within", vec(f.fisher.within)},
                   {"criterion", vec(f.fisher.criterion)}};
    j["normalization"] = {{"min", vec(f.normalization.min)}, {"max", vec(f.normalization.max)}};
    j["kpca"] = {{"training", mat(f.kpca.training)},
                 {"sigma", f.kpca.sigma},
                 {"components", f.kpca.components},
                 {"eigenvalues", vec(f.kpca.eigenvalues)},
                 {"alphas", mat(f.kpca.alphas)},
                 {"row_means", vec(f.kpca.row_means)},
                 {"grand_mean", f.kpca.grand_mean},
                 {"variance_ratio", f.kpca.variance_ratio},
                 {"degenerate", f.kpca.degenerate}};
    if (f.reference) {
        json faults = json::array();
        for (const auto& c : f.reference->fault_centroids) faults.push_back(vec(c));
        j["reference"] = {{"normal_centroid", vec(f.reference->normal_centroid)},
                          {"normal_radius", f.reference->normal_radius},
                          {"fault_centroids", faults}};
    } else {
        j["reference"] = nullptr;
    }
    if (b.soms) {
        json maps = json::array();
        for (const auto& m : *b.soms) maps.push_back(som_json(m));
        j["soms"] = maps;
    } else {
        j["soms"] = nullptr;
    }
    if (b.svm) {
        json machines = json::array();
        for (const auto& pm : b.svm->machines)
            machines.push_back({{"positive", std::string(to_string(static_cast<State>(pm.positive_class)))},
                                {"negative", std::string(to_string(static_cast<State>(pm.negative_class)))},
                                {"model", binary_json(pm.model)}});
        j["svm"] = {{"classes", class_names(b.svm->classes)}, {"tie_rule", b.svm->tie_rule}, {"machines", machines}};
    } else {
        j["svm"] = nullptr;
    }
    j["provenance"] = b.provenance;
    return j;
}

ModelBundle bundle_from_json(const json& j) {
    if (!j.is_object() || j.value("format", std::string()) != kBundleFormat)
        throw DataError("bundle: not a " + std::string(kBundleFormat) + " document");
    if (!j.contains("version") || !j["version"].is_number_integer())
        throw BundleVersionError("bundle: missing format version");
    const int version = j["version"].get<int>();
    if (version != kBundleVersion)
        throw BundleVersionError("bundle: format version " + std::to_string(version) + " is not supported (expected " +
                                 std::to_string(kBundleVersion) + ")");
    ModelBundle b;
    try {
        auto& f = b.features;
        const auto& sel = j.at("selection");
        f.mask.indices = sel.at("indices").get<std::vector<std::size_t>>();
        f.mask.threshold = sel.at("threshold").get<double>();
        for (const auto& p : sel.at("pruned"))
            f.mask.pruned.push_back({p.at("kept").get<std::size_t>(), p.at("dropped").get<std::size_t>(),
                                     p.at("rho").get<double>()});
        const auto& fi = j.at("fisher");
        f.fisher.mean_fault = to_vec(fi.at("mean_fault"));
        f.fisher.sd_fault = to_vec(fi.at("sd_fault"));
        f.fisher.mean_normal = to_vec(fi.at("mean_normal"));
        f.fisher.sd_normal = to_vec(fi.at("sd_normal"));
        f.fisher.between = to_vec(fi.at("between"));
        f.fisher.within = to_vec(fi.at("within"));
        f.fisher.criterion = to_vec(fi.at("criterion"));
        f.normalization.min = to_vec(j.at("normalization").at("min"));
        f.normalization.max = to_vec(j.at("normalization").at("max"));
        const auto& k = j.at("kpca");
        f.kpca.training = to_mat(k.at("training"));
        f.kpca.sigma = k.at("sigma").get<double>();
        f.kpca.components = k.at("components").get<int>();
        f.kpca.eigenvalues = to_vec(k.at("eigenvalues"));
        f.kpca.alphas = to_mat(k.at("alphas"));
        f.kpca.row_means = to_vec(k.at("row_means"));
        f.kpca.grand_mean = k.at("grand_mean").get<double>();
        f.kpca.variance_ratio = k.at("variance_ratio").get<double>();
        f.kpca.degenerate = k.at("degenerate").get<bool>();
        if (!j.at("reference").is_null()) {
            const auto& r = j["reference"];
            NormalReference ref;
            ref.normal_centroid = to_vec(r.at("normal_centroid"));
            ref.normal_radius = r.at("normal_radius").get<double>();
            for (const auto& c : r.at("fault_centroids")) ref.fault_centroids.push_back(to_vec(c));
            f.reference = std::move(ref);
        }
        if (!j.at("soms").is_null()) {
            const auto& s = j["soms"];
            if (s.size() != 3) throw DataError("bundle: expected three SOM models");
            std::array<SomModel, 3> maps;
            for (std::size_t i = 0; i < 3; ++i) maps[i] = som_from(s[i]);
            b.soms = std::move(maps);
        }
        if (!j.at("svm").is_null()) {
            const auto& s = j["svm"];
            MulticlassSvmModel m;
            for (const auto& name : s.at("classes")) m.classes.push_back(class_from_name(name.get<std::string>()));
            m.tie_rule = s.at("tie_rule").get<std::string>();
            for (const auto& pm : s.at("machines"))
                m.machines.push_back({class_from_name(pm.at("positive").get<std::string>()),
                                      class_from_name(pm.at("negative").get<std::string>()), binary_from(pm.at("model"))});
            b.svm = std::move(m);
        }
        b.provenance = j.at("provenance");
    } catch (const json::exception& e) {
        throw DataError(std::string("bundle: malformed document: ") + e.what());
    }
    b.validate();
    return b;
}

std::string serialize_bundle(const ModelBundle& bundle) { return bundle_to_json(bundle).dump(1) + "\n"; }

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle) {
    bundle.validate();
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write bundle " + path.string());
    out << serialize_bundle(bundle);
}

ModelBundle load_bundle(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read bundle " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::exception& e) {
        throw DataError("bundle " + path.string() + ": invalid JSON: " + e.what());
    }
    return bundle_from_json(j);
}

std::uint64_t dataset_fingerprint(const std::vector<PowerCurve>& curves) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& c : curves) {
        mix(c.sample_id.data(), c.sample_id.size());
        const std::string label(c.label ? to_string(*c.label) : "");
        mix(label.data(), label.size());
        for (const auto& pt : c.points) {
            std::uint64_t bits[2];
            std::memcpy(&bits[0], &pt.t, sizeof(double));
            std::memcpy(&bits[1], &pt.p, sizeof(double));
            mix(bits, sizeof(bits));
        }
        mix("\n", 1);
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace pmdeg
