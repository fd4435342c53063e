#include "pmdeg/errors.hpp"
#include "pmdeg/features.hpp"
#include "pmdeg/pipeline.hpp"
#include "pmdeg/selection.hpp"
#include "pmdeg/svm.hpp"
#include "pmdeg/synthgen.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace pmdeg;

namespace {

PowerCurve curve_from(const Eigen::VectorXd& t, const Eigen::VectorXd& p) {
    require(t.size() == p.size(), "t and p lengths differ");
    PowerCurve c;
    c.sample_id = "py";
    for (Eigen::Index i = 0; i < t.size(); ++i) c.points.push_back({t[i], p[i]});
    c.validate();
    return c;
}

using Command = int (*)(const RunConfig&, const std::filesystem::path&);

Command command_for(const std::string& name) {
    if (name == "synth") return cmd_synth;
    if (name == "fit-features") return cmd_fit_features;
    if (name == "mine") return cmd_mine;
    if (name == "train") return cmd_train;
    if (name == "classify") return cmd_classify;
    if (name == "eval-ablation") return cmd_eval_ablation;
    throw ConfigError("unknown command '" + name + "'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "power-curve feature, mining and classification core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

    m.def("feature_names", [] {
        const auto& n = FeatureVector::names();
        return std::vector<std::string>(n.begin(), n.end());
    });

    m.def(
        "extract_features",
        [](const Eigen::VectorXd& t, const Eigen::VectorXd& p) {
            const auto fv = extract(curve_from(t, p));
            Eigen::VectorXd out(static_cast<Eigen::Index>(kFeatureCount));
            for (std::size_t i = 0; i < kFeatureCount; ++i) out[static_cast<Eigen::Index>(i)] = fv[i];
            return out;
        },
        py::arg("t"), py::arg("p"));

    m.def(
        "generate_curve",
        [](const std::string& state, std::uint64_t seed) {
            const auto c = generate_curve(parse_state(state), GeneratorConfig{}, seed);
            Eigen::VectorXd t(static_cast<Eigen::Index>(c.points.size())), p(t.size());
            for (std::size_t i = 0; i < c.points.size(); ++i) {
                t[static_cast<Eigen::Index>(i)] = c.points[i].t;
                p[static_cast<Eigen::Index>(i)] = c.points[i].p;
            }
            return py::make_tuple(t, p);
        },
        py::arg("state"), py::arg("seed"));

    m.def(
        "select_features",
        [](const Eigen::MatrixXd& fault, const Eigen::MatrixXd& normal) { return select_features(fault, normal).indices; },
        py::arg("fault"), py::arg("normal"));

    py::class_<MulticlassSvmModel>(m, "SvmModel")
        .def_readonly("classes", &MulticlassSvmModel::classes)
        .def("predict", [](const MulticlassSvmModel& model, const Eigen::MatrixXd& X) {
            std::vector<int> out;
            for (Eigen::Index i = 0; i < X.rows(); ++i) out.push_back(predict_ovo(model, X.row(i).transpose()).label);
            return out;
        });

    m.def(
        "train_svm",
        [](const Eigen::MatrixXd& X, const std::vector<int>& labels, double C, double sigma) {
            SvmTrainConfig cfg;
            cfg.C = C;
            cfg.sigma = sigma;
            return train_ovo(X, labels, cfg);
        },
        py::arg("X"), py::arg("labels"), py::arg("C") = 1.0, py::arg("sigma") = 1.0);

    m.def(
        "run",
        [](const std::string& command, const std::filesystem::path& out, std::uint64_t seed,
           const std::map<std::string, std::string>& settings) {
            RunConfig c;
            c.seed = seed;
            for (const auto& [k, v] : settings) c.set(k, v);
            c.validate();
            return command_for(command)(c, out);
        },
        py::arg("command"), py::arg("out"), py::arg("seed") = 1,
        py::arg("settings") = std::map<std::string, std::string>{});
}
