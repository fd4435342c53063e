#pragma once

// End-to-end orchestration: run configuration, the persisted model bundle,
// and the six commands driven by the command-line tool.

#include "pmdeg/curve.hpp"
#include "pmdeg/features.hpp"
#include "pmdeg/kpca.hpp"
#include "pmdeg/mining.hpp"
#include "pmdeg/pso.hpp"
#include "pmdeg/selection.hpp"
#include "pmdeg/som.hpp"
#include "pmdeg/svm.hpp"
#include "pmdeg/synthgen.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pmdeg {

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct DataPaths {
    std::filesystem::path standard;    ///< labeled N + fault curves for fit-features
    std::filesystem::path nonfault;    ///< manifest whose NONFAULT_UNLABELED rows are mined
    std::filesystem::path degradation; ///< labeled degradation curves for train / eval-ablation
    std::filesystem::path classify;    ///< curves to classify
    std::filesystem::path truth;       ///< optional sample_id,true_label sidecar for mine
};

/// Seed streams derived from RunConfig::seed.
enum class SeedStream : std::uint64_t {
    Mining = 1,
    Split = 100,
    CrossValidation = 200,
    Swarm = 300,
};
std::uint64_t stream_seed(std::uint64_t seed, SeedStream stream, std::uint64_t index = 0);

struct RunConfig {
    std::uint64_t seed = 1;

    GeneratorConfig generator;
    std::map<State, int> counts = preset_counts();

    DataPaths data;
    std::filesystem::path bundle; ///< input bundle for mine / train / classify / eval-ablation

    double kpca_sigma = 2.0;
    int kpca_components = 6;

    MiningConfig mining;
    bool mining_use_reference = true;

    SvmTrainConfig svm;
    PsoConfig pso;
    KernelParam pso_kernel_param = KernelParam::Gamma;
    int folds = 5;
    int split_train = 4; ///< train:test ratio numerator
    int split_test = 1;
    int repeats = 5;
    std::vector<std::string> ablation_variants;

    RunConfig();

    /// Sets one key. Unknown keys and unparsable values raise ConfigError.
    void set(const std::string& key, const std::string& value);
    void validate() const;
    /// Sorted key=value listing of every setting, one per line.
    std::string canonical_text() const;
    nlohmann::json to_json() const;
};

/// Flat "key = value" text; '#' starts a comment. Relative paths resolve
/// against the config file's directory.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
/// "D1=55,D2=55" style count list.
std::map<State, int> parse_counts(const std::string& text);

inline const std::vector<std::string>& default_ablation_variants() {
    static const std::vector<std::string> v = {"KPCA+PSO-SVM", "PCA+PSO-SVM", "KPCA+SVM", "PSO-SVM", "SVM"};
    return v;
}

// ---------------------------------------------------------------------------
// Model bundle
// ---------------------------------------------------------------------------

inline constexpr int kBundleVersion = 1;
inline constexpr const char* kBundleFormat = "pmdeg-model-bundle";

class BundleVersionError : public DataError {
public:
    using DataError::DataError;
};

struct FeatureStages {
    SelectionMask mask;
    FisherReport fisher;
    NormalizationModel normalization;
    KpcaModel kpca;
    std::optional<NormalReference> reference; ///< in KPCA space
};

struct ModelBundle {
    int version = kBundleVersion;
    FeatureStages features;
    std::optional<std::array<SomModel, 3>> soms;
    std::optional<MulticlassSvmModel> svm;
    nlohmann::json provenance = nlohmann::json::object();

    /// Stage dimensions chain; throws DataError otherwise.
    void validate() const;
};

nlohmann::json bundle_to_json(const ModelBundle& bundle);
ModelBundle bundle_from_json(const nlohmann::json& j);
std::string serialize_bundle(const ModelBundle& bundle);
void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle);
/// Refuses other format versions with BundleVersionError.
ModelBundle load_bundle(const std::filesystem::path& path);

/// Raw 64-column features -> selected, normalized columns.
Eigen::MatrixXd reduce_features(const FeatureStages& stages, const Eigen::MatrixXd& raw);
/// Raw 64-column features -> KPCA coordinates.
Eigen::MatrixXd transform_features(const FeatureStages& stages, const Eigen::MatrixXd& raw);

/// FNV-1a over sample ids, labels and point bit patterns.
std::uint64_t dataset_fingerprint(const std::vector<PowerCurve>& curves);
std::string hex64(std::uint64_t v);

// ---------------------------------------------------------------------------
// Reusable stages
// ---------------------------------------------------------------------------

/// Extraction -> Fisher selection -> normalization -> KPCA, plus normal and
/// fault reference centroids in KPCA space.
FeatureStages fit_feature_stages(const std::vector<PowerCurve>& standard, double kpca_sigma, int components);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};
/// Per class, a seeded shuffle then round(n * test / (train + test)) test rows.
Split stratified_split(const std::vector<int>& labels, int train_part, int test_part, std::uint64_t seed);

struct SplitEvaluation {
    double C = 1.0;
    double sigma = 1.0;
    std::optional<double> gamma; ///< set when tuned over gamma
    double cv_fitness = 0.0;
    int pso_iterations = 0;
    std::vector<double> best_history;
    std::vector<double> mean_history;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    std::vector<double> per_class_accuracy;     ///< aligned with classes
    std::vector<std::vector<int>> confusion;    ///< [true][predicted], aligned with classes
    std::vector<int> classes;
    MulticlassSvmModel model;
};

/// Trains on split.train (PSO-tuned when `tune`, else config.svm) and scores split.test.
SplitEvaluation evaluate_split(const Eigen::MatrixXd& Z, const std::vector<int>& labels, const Split& split,
                               bool tune, const RunConfig& config, std::uint64_t repeat);

// ---------------------------------------------------------------------------
// Commands. Each writes only inside out_dir and returns a process exit code.
// ---------------------------------------------------------------------------

int cmd_synth(const RunConfig& config, const std::filesystem::path& out_dir);
int cmd_fit_features(const RunConfig& config, const std::filesystem::path& out_dir);
int cmd_mine(const RunConfig& config, const std::filesystem::path& out_dir);
int cmd_train(const RunConfig& config, const std::filesystem::path& out_dir);
int cmd_classify(const RunConfig& config, const std::filesystem::path& out_dir);
int cmd_eval_ablation(const RunConfig& config, const std::filesystem::path& out_dir);

/// Maps an exception to the documented exit code (1 config, 2 data, 3 internal).
int exit_code_for(const std::exception& e);

} // namespace pmdeg
