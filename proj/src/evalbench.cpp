#include "ttpudr/evalbench.hpp"

#include "ttpudr/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ttpudr::eval {

void LabeledDataset::validate() const {
    if (samples.size() != labels.size()) {
        throw DataError("sample/label count mismatch");
    }
    if (num_classes < 1) {
        throw DataError("dataset needs at least one class");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!samples[i].same_shape(samples.front())) {
            throw DataError("ragged sample shapes");
        }
        if (labels[i] < 1 || labels[i] > num_classes) {
            throw DataError("label " + std::to_string(labels[i]) + " out of range 1.." +
                            std::to_string(num_classes));
        }
    }
}

Matrix LabeledDataset::as_columns() const {
    if (samples.empty()) {
        throw DataError("empty dataset");
    }
    Matrix m(samples.front().size(), sample_count());
    for (Index i = 0; i < sample_count(); ++i) {
        m.col(i) = vectorize(samples[static_cast<std::size_t>(i)]);
    }
    return m;
}

ConfusionMatrix ConfusionMatrix::from_predictions(const std::vector<int>& truth,
                                                  const std::vector<int>& predicted,
                                                  int num_classes) {
    if (truth.size() != predicted.size() || truth.empty()) {
        throw DataError("prediction/truth size mismatch or empty");
    }
    ConfusionMatrix cm;
    cm.counts = Eigen::MatrixXi::Zero(num_classes, num_classes);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 1 || truth[i] > num_classes || predicted[i] < 1 ||
            predicted[i] > num_classes) {
            throw DataError("class index out of range in confusion matrix");
        }
        cm.counts(truth[i] - 1, predicted[i] - 1) += 1;
    }
    return cm;
}

Metrics compute_metrics(const ConfusionMatrix& cm) {
    const int c = cm.num_classes();
    const auto t = static_cast<double>(cm.total());
    if (c < 1 || cm.total() < 1) {
        throw DataError("empty confusion matrix");
    }
    double tp_sum = 0.0;
    double aa = 0.0;
    double marginal = 0.0;
    for (int i = 1; i <= c; ++i) {
        const auto tp = static_cast<double>(cm.true_positives(i));
        const auto pred = static_cast<double>(cm.predicted_as(i));
        const auto act = static_cast<double>(cm.actually_in(i));
        tp_sum += tp;
        aa += pred > 0.0 ? tp / pred : 0.0;
        marginal += pred * act;
    }
    Metrics m;
    m.oa = tp_sum / t;
    m.aa = aa / c;
    const auto kappa = [&](double pe) {
        const double denom = 1.0 - pe;
        if (std::abs(denom) < 1e-15) {
            return m.oa >= 1.0 ? 1.0 : 0.0;
        }
        return (m.oa - pe) / denom;
    };
    m.kc_paper = kappa(marginal / (static_cast<double>(c) * c));
    m.kc_cohen = kappa(marginal / (t * t));
    return m;
}

namespace {

void sign_fix_columns(Matrix& m) {
    for (Index c = 0; c < m.cols(); ++c) {
        for (Index i = 0; i < m.rows(); ++i) {
            if (std::abs(m(i, c)) > 1e-12) {
                if (m(i, c) < 0.0) {
                    m.col(c) = -m.col(c);
                }
                break;
            }
        }
    }
}

}  // namespace

Matrix PcaModel::transform(const Matrix& columns) const {
    return projection.transpose() * (columns.colwise() - mean);
}

PcaModel pca_fit(const Matrix& columns, Index p) {
    const Index d = columns.rows();
    const Index n = columns.cols();
    if (n < 1) {
        throw DataError("no samples");
    }
    if (p < 1 || p > std::min(d, n)) {
        throw ConfigError("PCA target dimension must satisfy 1 <= p <= min(D, N)");
    }
    PcaModel model;
    model.mean = columns.rowwise().mean();
    const Matrix centered = columns.colwise() - model.mean;
    const Matrix cov = centered * centered.transpose() / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("PCA eigendecomposition failed");
    }
    model.eigenvalues = eig.eigenvalues().reverse();
    model.projection = eig.eigenvectors().rightCols(p).rowwise().reverse();
    sign_fix_columns(model.projection);
    return model;
}

Matrix LppModel::transform(const Matrix& columns) const {
    return projection.transpose() * (columns.colwise() - mean);
}

LppModel lpp_fit(const Matrix& columns, const AffinityGraph& graph, Index p,
                 const LppOptions& options) {
    const Index d = columns.rows();
    const Index n = columns.cols();
    if (graph.sample_count() != n) {
        throw ShapeError("graph size does not match the sample count");
    }
    if (p < 1 || p > d) {
        throw ConfigError("LPP target dimension must satisfy 1 <= p <= D");
    }

    if (options.pca_preproject) {
        Index q = options.preproject_dim;
        if (q < 0) {
            q = std::min(n - 1, d);
        }
        if (q < p) {
            throw ConfigError("pre-projection dimension is below the target dimension");
        }
        const PcaModel pca = pca_fit(columns, q);
        const Matrix reduced = pca.transform(columns);
        LppModel inner = lpp_fit(reduced, graph, p, LppOptions{});
        LppModel model;
        model.projection = pca.projection * inner.projection;
        model.eigenvalues = inner.eigenvalues;
        model.mean = pca.mean;
        return model;
    }

    Matrix a = columns * graph.L * columns.transpose();
    Matrix b = columns * graph.degrees.asDiagonal() * columns.transpose();
    a = 0.5 * (a + a.transpose());
    b = 0.5 * (b + b.transpose());

    // LPP assumes XDX^T invertible; it cannot hold when D >= N.
    Eigen::LLT<Matrix> llt(b);
    if (llt.info() != Eigen::Success) {
        throw SingularConstraintError(
            "XDX^T is singular (data dimension " + std::to_string(d) + ", samples " +
            std::to_string(n) + "); LPP needs D < N or PCA pre-projection");
    }

    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> eig(a, b);
    if (eig.info() != Eigen::Success) {
        throw SingularConstraintError("generalized eigenproblem failed for XDX^T");
    }
    LppModel model;
    model.projection = eig.eigenvectors().leftCols(p);
    sign_fix_columns(model.projection);
    model.eigenvalues = eig.eigenvalues().head(p);
    model.mean = Vector::Zero(d);
    return model;
}

std::vector<int> knn1_classify(const Matrix& train_feats, const std::vector<int>& train_labels,
                               const Matrix& test_feats) {
    const Index n_train = train_feats.cols();
    if (n_train < 1) {
        throw DataError("empty training set");
    }
    if (static_cast<std::size_t>(n_train) != train_labels.size()) {
        throw DataError("training feature/label count mismatch");
    }
    if (train_feats.rows() != test_feats.rows()) {
        throw ShapeError("feature dimensions disagree");
    }
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(test_feats.cols()));
    for (Index j = 0; j < test_feats.cols(); ++j) {
        Index best = 0;
        double best_d = (train_feats.col(0) - test_feats.col(j)).squaredNorm();
        for (Index i = 1; i < n_train; ++i) {
            const double d = (train_feats.col(i) - test_feats.col(j)).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        out.push_back(train_labels[static_cast<std::size_t>(best)]);
    }
    return out;
}

LabeledDataset inject_block_noise(const LabeledDataset& data, const NoiseSettings& settings) {
    data.validate();
    if (settings.fraction < 0.0 || settings.fraction > 1.0) {
        throw ConfigError("noise fraction must lie in [0, 1]");
    }
    if (data.samples.empty()) {
        throw DataError("empty dataset");
    }
    const auto& shape = data.samples.front().shape();
    if (shape.size() != 2) {
        throw DataError("block noise needs 2-mode image samples");
    }
    const Index rows = shape[0];
    const Index cols = shape[1];
    if (rows < settings.block || cols < settings.block) {
        throw DataError("image smaller than the noise block");
    }

    const Index n = data.sample_count();
    // nudge against binary representation error (0.1 * 100 is 10.0000...02)
    const auto corrupt_count = static_cast<Index>(
        std::ceil(settings.fraction * static_cast<double>(n) - 1e-9));

    rng::Stream stream(settings.seed);
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    for (Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Index>(stream.next_below(static_cast<std::uint64_t>(i + 1)));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    std::vector<Index> chosen(order.begin(), order.begin() + corrupt_count);
    std::sort(chosen.begin(), chosen.end());

    LabeledDataset out = data;
    out.provenance = data.provenance.empty() ? "noised" : data.provenance + "+noise";
    for (Index idx : chosen) {
        DenseTensor& img = out.samples[static_cast<std::size_t>(idx)];
        const double value = stream.next_uniform() < 0.5 ? settings.min_value : settings.max_value;
        Index r0 = std::min(rows / 4, rows - settings.block);
        Index c0 = std::min(cols / 4, cols - settings.block);
        if (settings.placement == NoisePlacement::kRandom) {
            r0 = static_cast<Index>(
                stream.next_below(static_cast<std::uint64_t>(rows - settings.block + 1)));
            c0 = static_cast<Index>(
                stream.next_below(static_cast<std::uint64_t>(cols - settings.block + 1)));
        }
        for (Index c = c0; c < c0 + settings.block; ++c) {
            for (Index r = r0; r < r0 + settings.block; ++r) {
                img({r, c}) = value;
            }
        }
    }
    return out;
}

SplitResult split(const LabeledDataset& data, double train_fraction, std::uint64_t seed,
                  bool stratified) {
    data.validate();
    const Index n = data.sample_count();
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train fraction must lie in (0, 1)");
    }
    const auto train_count =
        static_cast<Index>(std::floor(train_fraction * static_cast<double>(n) + 1e-9));
    if (train_count < 1 || train_count >= n) {
        throw ConfigError("split would leave one side empty");
    }

    rng::Stream stream(seed);
    const auto shuffle = [&stream](std::vector<Index>& v) {
        for (Index i = static_cast<Index>(v.size()) - 1; i > 0; --i) {
            const auto j = static_cast<Index>(stream.next_below(static_cast<std::uint64_t>(i + 1)));
            std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
        }
    };

    std::vector<Index> train_idx;
    if (!stratified) {
        std::vector<Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Index{0});
        shuffle(order);
        train_idx.assign(order.begin(), order.begin() + train_count);
    } else {
        std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(data.num_classes));
        for (Index i = 0; i < n; ++i) {
            by_class[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(i)] - 1)]
                .push_back(i);
        }
        const int c = data.num_classes;
        std::vector<Index> alloc(static_cast<std::size_t>(c), 0);
        std::vector<std::pair<double, int>> remainders;
        Index base_total = 0;
        for (int k = 0; k < c; ++k) {
            const auto nk = static_cast<double>(by_class[static_cast<std::size_t>(k)].size());
            const double ideal = train_fraction * nk;
            alloc[static_cast<std::size_t>(k)] = static_cast<Index>(std::floor(ideal));
            base_total += alloc[static_cast<std::size_t>(k)];
            remainders.emplace_back(ideal - std::floor(ideal), k);
        }
        // hand out the leftover quota by largest remainder, then make sure no
        // nonempty class is locked out of the training side
        std::stable_sort(remainders.begin(), remainders.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        Index extras = train_count - base_total;
        for (const auto& [rem, k] : remainders) {
            if (extras <= 0) {
                break;
            }
            const auto cap = static_cast<Index>(by_class[static_cast<std::size_t>(k)].size());
            if (alloc[static_cast<std::size_t>(k)] < cap) {
                ++alloc[static_cast<std::size_t>(k)];
                --extras;
            }
        }
        for (int k = 0; k < c && extras > 0; ++k) {
            const auto cap = static_cast<Index>(by_class[static_cast<std::size_t>(k)].size());
            while (alloc[static_cast<std::size_t>(k)] < cap && extras > 0) {
                ++alloc[static_cast<std::size_t>(k)];
                --extras;
            }
        }
        for (int k = 0; k < c; ++k) {
            if (!by_class[static_cast<std::size_t>(k)].empty() &&
                alloc[static_cast<std::size_t>(k)] == 0) {
                int donor = -1;
                Index donor_alloc = 1;
                for (int j = 0; j < c; ++j) {
                    if (alloc[static_cast<std::size_t>(j)] > donor_alloc) {
                        donor = j;
                        donor_alloc = alloc[static_cast<std::size_t>(j)];
                    }
                }
                if (donor < 0) {
                    break;  // every class holds at most one slot; nothing to donate
                }
                --alloc[static_cast<std::size_t>(donor)];
                ++alloc[static_cast<std::size_t>(k)];
            }
        }
        for (int k = 0; k < c; ++k) {
            auto& members = by_class[static_cast<std::size_t>(k)];
            shuffle(members);
            train_idx.insert(train_idx.end(), members.begin(),
                             members.begin() + alloc[static_cast<std::size_t>(k)]);
        }
    }

    std::sort(train_idx.begin(), train_idx.end());
    std::vector<bool> in_train(static_cast<std::size_t>(n), false);
    for (Index i : train_idx) {
        in_train[static_cast<std::size_t>(i)] = true;
    }

    SplitResult result;
    result.train.num_classes = data.num_classes;
    result.test.num_classes = data.num_classes;
    result.train.provenance = data.provenance;
    result.test.provenance = data.provenance;
    for (Index i = 0; i < n; ++i) {
        auto& side = in_train[static_cast<std::size_t>(i)] ? result.train : result.test;
        auto& idx = in_train[static_cast<std::size_t>(i)] ? result.train_indices
                                                          : result.test_indices;
        side.samples.push_back(data.samples[static_cast<std::size_t>(i)]);
        side.labels.push_back(data.labels[static_cast<std::size_t>(i)]);
        idx.push_back(i);
    }
    return result;
}

}  // namespace ttpudr::eval
