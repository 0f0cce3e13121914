#pragma once

#include "ttpudr/tensor.hpp"
#include "ttpudr/ttmap.hpp"

#include <vector>

namespace ttpudr {

/// Symmetric heat-kernel affinity on the k-nearest-neighbor graph, with its
/// degree vector and Laplacian L = D - S. S has zero diagonal and entries in
/// [0, 1]; the kNN relation is symmetrized with the OR rule.
struct AffinityGraph {
    Matrix S;
    Vector degrees;
    Matrix L;
    int k = 0;
    double t = 0.0;

    Index sample_count() const { return S.rows(); }
};

/// Affinity rescaled by current projected distances: S~_ij = S_ij / max(d_ij,
/// epsilon). Support never grows beyond S's. Refreshed once per outer
/// training iteration.
struct ReweightedGraph {
    Matrix S;
    Vector degrees;
    Matrix L;
    double epsilon = 0.0;
};

/// Heat-kernel kNN affinity from raw samples: S_ij = exp(-||x_i - x_j||_F^2 / t)
/// iff i is among j's k nearest or vice versa. Distances are measured in the
/// original space; kNN ties break toward the smaller sample index; self-pairs
/// are excluded. Exact brute-force search.
AffinityGraph build_affinity(const std::vector<DenseTensor>& samples, int k, double t);

/// Same construction on pre-vectorized samples (columns of a d x N matrix).
AffinityGraph build_affinity(const Matrix& columns, int k, double t);

/// Reweight each edge by the inverse projected distance under `map`,
/// guarding coincident projections with `epsilon`.
ReweightedGraph reweight(const AffinityGraph& graph, const TTMap& map,
                         const std::vector<DenseTensor>& samples, double epsilon);

/// Reweight from precomputed projections (columns = t_i). Used when the
/// projections are already available.
ReweightedGraph reweight_projected(const AffinityGraph& graph, const Matrix& projections,
                                   double epsilon);

}  // namespace ttpudr
