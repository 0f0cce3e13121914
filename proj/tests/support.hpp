#pragma once

// Shared fixtures for the trainer tests and the acceptance suite: synthetic
// benchmark generators and the explicit big-matrix oracle for H_k.

#include "ttpudr/evalbench.hpp"
#include "ttpudr/rng.hpp"
#include "ttpudr/trainer.hpp"

#include <cmath>
#include <vector>

namespace support {

using namespace ttpudr;

/// Two Gaussian clusters of n-order tensors whose per-coordinate means
/// differ by `shift` standard deviations of the dominant noise scale. Half
/// the coordinates carry unit noise, half only a tenth of it, so a good
/// locality-preserving projection has quiet directions to exploit.
inline eval::LabeledDataset two_cluster_tensors(Index count, std::vector<Index> shape,
                                                double shift, std::uint64_t seed) {
    rng::Stream stream(seed);
    eval::LabeledDataset data;
    data.num_classes = 2;
    data.provenance = "synthetic-two-cluster";
    Index size = 1;
    for (Index s : shape) {
        size *= s;
    }
    const Index half = size / 2;
    for (Index i = 0; i < count; ++i) {
        const int label = (i % 2) + 1;
        const double mean = label == 1 ? 0.0 : shift;
        DenseTensor t(shape);
        for (Index e = 0; e < size; ++e) {
            const double sigma = e < half ? 1.0 : 0.1;
            t.data()[static_cast<std::size_t>(e)] = mean + sigma * stream.next_normal();
        }
        data.samples.push_back(std::move(t));
        data.labels.push_back(label);
    }
    return data;
}

/// Two-class images: a class-neutral bright blob over a noisy background,
/// plus two low-noise "sensor" pixels whose signed offset carries the class.
/// The class signal is deliberately low-variance: extreme-value block noise
/// then displaces it from the top principal components, while the locality
/// objective (which discounts far-away outliers) keeps finding it. Pixel
/// values stay roughly in [30, 115], so 0/255 blocks are extreme outliers.
inline eval::LabeledDataset two_class_images(Index count, Index rows, Index cols,
                                             std::uint64_t seed) {
    rng::Stream stream(seed);
    eval::LabeledDataset data;
    data.num_classes = 2;
    data.provenance = "synthetic-images";
    const double amp = 12.0;
    for (Index i = 0; i < count; ++i) {
        const int label = (i % 2) + 1;
        const double sign = label == 1 ? 1.0 : -1.0;
        DenseTensor img({rows, cols});
        for (Index r = 0; r < rows; ++r) {
            for (Index c = 0; c < cols; ++c) {
                const double dr = (r - rows * 0.5) / (0.22 * rows);
                const double dc = (c - cols * 0.5) / (0.22 * cols);
                img({r, c}) = 40.0 + 70.0 * std::exp(-0.5 * (dr * dr + dc * dc)) +
                              3.0 * stream.next_normal();
            }
        }
        img({rows / 4, (3 * cols) / 4}) = 60.0 + sign * amp + 0.2 * stream.next_normal();
        img({(3 * rows) / 4, cols / 4}) = 60.0 - sign * amp + 0.2 * stream.next_normal();
        data.samples.push_back(std::move(img));
        data.labels.push_back(label);
    }
    return data;
}

/// H_k built the way a structure-oblivious implementation would: through the
/// explicit full mapping matrix and the (I_1...I_n) x (I_1...I_n) matrix
/// Z = X L~ X^T. Column e of the Jacobian is the unfolded chain with core k
/// replaced by the e-th basis tensor.
inline Matrix naive_H(const std::vector<DenseTensor>& samples, const TTMap& map, Index k,
                      const Matrix& laplacian) {
    const auto n_samples = static_cast<Index>(samples.size());
    const Index d = map.input_size();
    Matrix xmat(d, n_samples);
    for (Index i = 0; i < n_samples; ++i) {
        xmat.col(i) = vectorize(samples[static_cast<std::size_t>(i)]);
    }
    const Matrix z = xmat * laplacian * xmat.transpose();

    const TTCore& core = map.core(k);
    const Index rl = core.left_rank();
    const Index mode = core.mode_size();
    const Index rr = core.right_rank();

    if (k == map.order() - 1) {
        // E(:, rn) = A * L(U_n)(:, rn); the subproblem matrix is A^T Z A
        const Index m = rl * mode;
        Matrix a(d, m);
        for (Index e = 0; e < m; ++e) {
            DenseTensor basis({rl, mode, 1});
            basis.data()[static_cast<std::size_t>(e)] = 1.0;
            const TTMap varied = map.with_core(k, TTCore(std::move(basis)));
            a.col(e) = vectorize(full_chain(varied));
        }
        return a.transpose() * z * a;
    }

    const Index m = rl * mode * rr;
    std::vector<Matrix> unfolded;
    unfolded.reserve(static_cast<std::size_t>(m));
    for (Index e = 0; e < m; ++e) {
        DenseTensor basis({rl, mode, rr});
        basis.data()[static_cast<std::size_t>(e)] = 1.0;
        const TTMap varied = map.with_core(k, TTCore(std::move(basis)));
        unfolded.push_back(left_unfold(full_chain(varied)));
    }
    Matrix h(m, m);
    for (Index e = 0; e < m; ++e) {
        const Matrix ze = z * unfolded[static_cast<std::size_t>(e)];
        for (Index f = 0; f < m; ++f) {
            h(e, f) = (unfolded[static_cast<std::size_t>(f)].transpose() * ze).trace();
        }
    }
    return 0.5 * (h + h.transpose());
}

inline std::vector<DenseTensor> random_samples(Index count, std::vector<Index> shape,
                                               rng::Stream& stream) {
    std::vector<DenseTensor> samples;
    for (Index i = 0; i < count; ++i) {
        DenseTensor t(shape);
        for (double& v : t.data()) {
            v = stream.next_normal();
        }
        samples.push_back(std::move(t));
    }
    return samples;
}

}  // namespace support
