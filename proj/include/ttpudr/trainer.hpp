#pragma once

#include "ttpudr/graph.hpp"
#include "ttpudr/stiefel.hpp"
#include "ttpudr/tensor.hpp"
#include "ttpudr/ttmap.hpp"

#include <cstdint>
#include <vector>

namespace ttpudr {

struct TrainConfig {
    std::vector<Index> ranks;       // R_1 ... R_{n-1}
    Index target_dim = 2;           // R_n
    int neighbors = 4;              // k of the kNN graph
    double kernel_width = 1.0;      // heat-kernel t
    double epsilon = 1e-8;          // reweighting denominator guard
    int max_outer_iters = 15;       // Iter
    double outer_tolerance = 1e-6;  // relative objective change for convergence
    stiefel::SolverSettings solver;
    std::uint64_t seed = 1;
    Index chain_element_cap = 10'000'000;

    /// Throws ConfigError on infeasible ranks; rank > mode size only warns
    /// (reference configurations use e.g. rank 7 over mode size 4).
    void validate(const std::vector<Index>& mode_sizes) const;
};

struct TrainTrace {
    double initial_objective = 0.0;
    std::vector<double> objective;              // unsquared objective, per outer iteration
    std::vector<double> surrogate;              // reweighted squared objective
    std::vector<double> defect;                 // chain orthonormality defect
    std::vector<double> seconds;                // wall clock per outer iteration
    std::vector<std::vector<int>> inner_iters;  // per outer iteration, per core
    bool converged = false;
};

struct FitResult {
    TTMap map;
    TrainTrace trace;
};

/// Prefix chain U_1 x ... x U_count with the leading singleton squeezed:
/// shape I_1 x ... x I_count x R_count. Requires 1 <= count <= n-1.
DenseTensor prefix_chain(const TTMap& map, Index count);

/// Suffix chain U_{n-count+1} x ... x U_n: shape R_{n-count} x I_{n-count+1}
/// x ... x I_n x R_n. Requires 1 <= count <= n-1.
DenseTensor suffix_chain(const TTMap& map, Index count);

/// Partially transformed data for core k (0-based): every mode except mode k
/// of each sample is contracted with the prefix/suffix chains around core k.
/// Output mode order:
///   k == 0:        [R_1, R_n, I_1, N]
///   0 < k < n-1:   [R_k, R_{k+1}, R_n, I_{k+1}, N]   (1-based rank labels)
///   k == n-1:      [R_{n-1}, I_n, N]
/// Built by streaming over samples so intermediates stay sample-sized.
DenseTensor transformed_data(const std::vector<DenseTensor>& samples, const TTMap& map, Index k);

/// Quadratic-form matrix of the core-k subproblem: sum over output
/// components of Y(r_n) L~ Y(r_n)^T, rows ordered to match the core's
/// vectorization (left rank fastest, then mode, then right rank). For the
/// last core there is no output sum and rows match the left unfolding.
/// Symmetrized before return.
Matrix assemble_H(const DenseTensor& yk, const Matrix& laplacian, const TTMap& map, Index k);

/// Unsquared objective: 1/2 sum_ij ||t_i - t_j||_2 * S_ij.
double objective_fnorm(const std::vector<DenseTensor>& samples, const TTMap& map, const Matrix& s);

/// Same double sum with squared distances against an arbitrary weight
/// matrix; with the reweighted S~ this is the surrogate being minimized.
double objective_squared(const std::vector<DenseTensor>& samples, const TTMap& map,
                         const Matrix& s);

/// Alternating optimization: refresh the reweighted graph, then sweep the
/// cores in order, solving each subproblem from the current core. Stops on
/// relative objective change below the outer tolerance or after
/// max_outer_iters.
FitResult fit(const std::vector<DenseTensor>& samples, const TrainConfig& config);

/// As above but reusing a prebuilt affinity graph on the same samples.
FitResult fit(const std::vector<DenseTensor>& samples, const AffinityGraph& graph,
              const TrainConfig& config);

}  // namespace ttpudr
