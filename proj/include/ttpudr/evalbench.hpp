#pragma once

#include "ttpudr/graph.hpp"
#include "ttpudr/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ttpudr::eval {

/// Samples of one shared shape with class labels in 1..C.
struct LabeledDataset {
    std::vector<DenseTensor> samples;
    std::vector<int> labels;
    int num_classes = 0;
    std::string provenance;

    void validate() const;
    Index sample_count() const { return static_cast<Index>(samples.size()); }

    /// Samples vectorized as columns of a D x N matrix.
    Matrix as_columns() const;
};

/// C x C counts; rows index the true class, columns the predicted class.
struct ConfusionMatrix {
    Eigen::MatrixXi counts;

    static ConfusionMatrix from_predictions(const std::vector<int>& truth,
                                            const std::vector<int>& predicted, int num_classes);

    int num_classes() const { return static_cast<int>(counts.rows()); }
    long total() const { return counts.sum(); }
    long true_positives(int c) const { return counts(c - 1, c - 1); }
    long predicted_as(int c) const { return counts.col(c - 1).sum(); }   // TP + FP
    long actually_in(int c) const { return counts.row(c - 1).sum(); }    // TP + FN
};

struct Metrics {
    double oa = 0.0;        // overall accuracy
    double aa = 0.0;        // average per-class precision
    double kc_paper = 0.0;  // kappa with the 1/C^2 chance normalization
    double kc_cohen = 0.0;  // conventional Cohen's kappa (1/T^2 normalization)
};

/// OA, AA and both kappa variants from a confusion matrix. Classes never
/// predicted contribute 0 to AA.
Metrics compute_metrics(const ConfusionMatrix& cm);

struct PcaModel {
    Vector mean;        // D
    Matrix projection;  // D x p, orthonormal columns
    Vector eigenvalues; // all D covariance eigenvalues, descending

    Matrix transform(const Matrix& columns) const;
};

/// Top-p principal directions of mean-centered column data.
PcaModel pca_fit(const Matrix& columns, Index p);

struct LppOptions {
    /// Project onto a PCA subspace first so XDX^T becomes nonsingular; the
    /// standard workaround when D >= N.
    bool pca_preproject = false;
    Index preproject_dim = -1;  // <0: min(N - 1, D)
};

struct LppModel {
    Matrix projection;   // D x p (composed with the PCA stage if enabled)
    Vector eigenvalues;  // the p smallest generalized eigenvalues
    Vector mean;         // nonzero only when pre-projection is enabled

    Matrix transform(const Matrix& columns) const;
};

/// Generalized eigenvectors of (X L X^T, X D X^T) for the p smallest
/// eigenvalues. Throws SingularConstraintError when XDX^T is not positive
/// definite and pre-projection is off.
LppModel lpp_fit(const Matrix& columns, const AffinityGraph& graph, Index p,
                 const LppOptions& options = {});

/// 1-nearest-neighbor labels for each test column; equidistant training
/// points resolve to the lower index.
std::vector<int> knn1_classify(const Matrix& train_feats, const std::vector<int>& train_labels,
                               const Matrix& test_feats);

enum class NoisePlacement { kFixed, kRandom };

struct NoiseSettings {
    double fraction = 0.1;
    Index block = 4;
    double min_value = 0.0;
    double max_value = 255.0;
    NoisePlacement placement = NoisePlacement::kFixed;
    std::uint64_t seed = 1;
};

/// Overwrite one block x block patch with the extreme min or max value
/// (seeded coin flip) in exactly ceil(fraction * N) images. Fixed placement
/// puts the block's corner at (rows/4, cols/4), the corner of the centered
/// half-size region. Untouched images are bit-identical.
LabeledDataset inject_block_noise(const LabeledDataset& data, const NoiseSettings& settings);

struct SplitResult {
    LabeledDataset train;
    LabeledDataset test;
    std::vector<Index> train_indices;
    std::vector<Index> test_indices;
};

/// Seeded shuffle-and-split with floor(fraction * N) training samples.
/// Stratified (default) allocates per class by largest remainder so every
/// class reaches the training side when feasible.
SplitResult split(const LabeledDataset& data, double train_fraction, std::uint64_t seed,
                  bool stratified = true);

}  // namespace ttpudr::eval
