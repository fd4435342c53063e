#pragma once

// Latent degradation-state mining over a nonfault feature set.
//
// Three SOMs of sizes sn^2, (sn+1)^2 and (sn+2)^2 give each sample a label
// triple (a, b, c). Dense neurons of each map (count >= M / g^2) filter the
// samples cumulatively, near-identical neighbouring neurons of the two larger
// maps are merged, the surviving samples are grouped by triple, and groups
// that look like the normal state are removed.

#include "pmdeg/errors.hpp"
#include "pmdeg/som.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace pmdeg {

using LabelTriple = std::array<int, 3>;

struct MiningConfig {
    int base_grid = 4;                 ///< sn
    std::optional<double> density_m;   ///< M; defaults to the sample count N
    double merge_tolerance = 1.0;      ///< tau, times the median adjacent weight distance
    int min_state_size = 20;
    double normal_first_pc_threshold = 0.02; ///< used when no reference is given
    double normal_radius_scale = 1.0;  ///< reference rule: radius multiple of the normal spread
    SomTrainConfig som;                ///< seed is the base of the three map seeds

    void validate() const;
};

/// Thrown when a cascade stage leaves no samples.
class MiningAborted : public DataError {
public:
    using DataError::DataError;
};

struct MultiResolution {
    std::array<SomModel, 3> maps;
    std::vector<LabelTriple> seq1;
};

MultiResolution multi_resolution_cluster(const Eigen::MatrixXd& X_nf, const MiningConfig& config);

/// Labels whose count is >= M / cells (real-valued, inclusive).
std::vector<int> dense_neurons(const std::vector<int>& counts, int cells, double M);

struct CascadeResult {
    std::vector<std::size_t> sel1, sel2, sel3; ///< indices into X_nf
    std::vector<LabelTriple> seq2, seq3, seq4;
    std::optional<std::string> aborted; ///< stage that emptied the survivor set
};

CascadeResult cascade_select(const std::vector<LabelTriple>& seq1, const std::array<std::vector<int>, 3>& dense);

/// remap[label] for label in 1..cells (index 0 unused). Identity outside the
/// merged groups.
std::vector<int> merge_neighbors(const SomModel& model, const std::vector<int>& selected,
                                 const std::vector<int>& counts, double tolerance);

struct CandidateState {
    LabelTriple triple{};
    std::vector<std::size_t> members; ///< indices into X_nf
};

struct Candidates {
    std::vector<CandidateState> states;  ///< triple order
    std::vector<std::size_t> undivided;  ///< groups below min size, ascending
};

Candidates enumerate_states(const std::vector<std::size_t>& sel3, const std::vector<LabelTriple>& seq6,
                            int min_state_size);

/// Labelled reference centroids in the same coordinates as X_nf.
struct NormalReference {
    Eigen::VectorXd normal_centroid;
    std::vector<Eigen::VectorXd> fault_centroids;
    double normal_radius = 0.0; ///< max distance of a normal reference sample from its centroid
};

NormalReference make_normal_reference(const Eigen::MatrixXd& normal_rows,
                                      const std::vector<Eigen::MatrixXd>& fault_rows_per_class);

struct DegradationState {
    std::string name; ///< "D1", "D2", ... by descending size
    LabelTriple triple{};
    std::vector<std::size_t> members;
    Eigen::VectorXd centroid;
};

struct MiningResult {
    std::vector<DegradationState> states;
    std::vector<CandidateState> removed_normal;
    std::vector<std::size_t> undivided; ///< ascending
};

/// With a reference, a candidate is normal when its centroid is nearer the
/// normal centroid than every fault centroid and within
/// normal_radius_scale * normal_radius of it. Without one, a candidate is
/// normal when its mean first coordinate is below the configured threshold.
/// `undivided` passes through to the result.
MiningResult remove_normal(const Candidates& candidates, const Eigen::MatrixXd& X_nf, const MiningConfig& config,
                           const std::optional<NormalReference>& reference);

struct MiningRun {
    MultiResolution clusters;
    std::array<std::vector<int>, 3> counts; ///< per map, indexed label - 1
    std::array<std::vector<int>, 3> dense;  ///< nNum1..nNum3
    std::array<double, 3> thresholds{};     ///< M / g^2
    double density_m = 0.0;
    CascadeResult cascade;
    std::vector<int> remap_c, remap_b;
    std::vector<LabelTriple> seq5, seq6;
    Candidates candidates;
    MiningResult result;
};

/// The full strategy. Throws MiningAborted when a cascade stage is empty.
MiningRun run_mining(const Eigen::MatrixXd& X_nf, const MiningConfig& config,
                     const std::optional<NormalReference>& reference);

} // namespace pmdeg
