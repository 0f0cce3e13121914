#include "ttpudr/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <numeric>
#include <string>

namespace ttpudr {

void TrainConfig::validate(const std::vector<Index>& mode_sizes) const {
    const std::size_t n = mode_sizes.size();
    if (n == 0) {
        throw ConfigError("samples must have at least one mode");
    }
    if (ranks.size() != n - 1) {
        throw ConfigError("expected " + std::to_string(n - 1) + " internal ranks, got " +
                          std::to_string(ranks.size()));
    }
    Index left = 1;
    bool rank_over_mode = false;
    for (std::size_t k = 0; k < n; ++k) {
        const Index right = (k + 1 < n) ? ranks[k] : target_dim;
        if (right <= 0) {
            throw ConfigError("ranks and target_dim must be positive");
        }
        if (right > left * mode_sizes[k]) {
            throw ConfigError("rank " + std::to_string(right) + " at core " + std::to_string(k) +
                              " is infeasible: exceeds left_rank*mode_size = " +
                              std::to_string(left * mode_sizes[k]));
        }
        if (k + 1 < n && right >= mode_sizes[k]) {
            rank_over_mode = true;
        }
        left = right;
    }
    if (rank_over_mode) {
        std::cerr << "warning: an internal TT rank is >= its mode size; "
                     "this is allowed but enlarges the parameterization\n";
    }
    if (max_outer_iters < 1) {
        throw ConfigError("max_outer_iters must be at least 1");
    }
    if (neighbors < 1) {
        throw ConfigError("neighbor count must be at least 1");
    }
    if (!(kernel_width > 0.0)) {
        throw ConfigError("kernel width must be positive");
    }
    if (!(epsilon > 0.0)) {
        throw ConfigError("epsilon guard must be positive");
    }
    if (!(outer_tolerance >= 0.0)) {
        throw ConfigError("outer tolerance must be nonnegative");
    }
    solver.validate();
}

DenseTensor prefix_chain(const TTMap& map, Index count) {
    if (count < 1 || count >= map.order()) {
        throw ShapeError("prefix length must be in [1, n-1]");
    }
    DenseTensor chain = map.core(0).tensor();
    for (Index k = 1; k < count; ++k) {
        chain = contract(chain, map.core(k).tensor(), {chain.order() - 1}, {Index{0}});
    }
    std::vector<Index> shape(chain.shape().begin() + 1, chain.shape().end());
    return reshape(chain, std::move(shape));
}

DenseTensor suffix_chain(const TTMap& map, Index count) {
    const Index n = map.order();
    if (count < 1 || count >= n) {
        throw ShapeError("suffix length must be in [1, n-1]");
    }
    DenseTensor chain = map.core(n - count).tensor();
    for (Index k = n - count + 1; k < n; ++k) {
        chain = contract(chain, map.core(k).tensor(), {chain.order() - 1}, {Index{0}});
    }
    return chain;
}

namespace {

void check_samples(const std::vector<DenseTensor>& samples, const TTMap& map) {
    if (samples.empty()) {
        throw ShapeError("no samples");
    }
    const auto sizes = map.mode_sizes();
    for (const DenseTensor& x : samples) {
        if (x.shape() != sizes) {
            throw ShapeError("sample shape does not match the map's mode sizes");
        }
    }
}

std::vector<Index> iota_modes(Index count) {
    std::vector<Index> modes(static_cast<std::size_t>(count));
    std::iota(modes.begin(), modes.end(), Index{0});
    return modes;
}

/// Projections of all samples as columns of a target_dim x N matrix.
Matrix project_all(const std::vector<DenseTensor>& samples, const TTMap& map) {
    Matrix proj(map.target_dim(), static_cast<Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        proj.col(static_cast<Index>(i)) = apply(map, samples[i]);
    }
    return proj;
}

}  // namespace

DenseTensor transformed_data(const std::vector<DenseTensor>& samples, const TTMap& map, Index k) {
    check_samples(samples, map);
    const Index n = map.order();
    if (k < 0 || k >= n) {
        throw ShapeError("core index out of range");
    }
    const auto count = static_cast<Index>(samples.size());
    const TTCore& core = map.core(k);
    const Index rl = core.left_rank();
    const Index rr = core.right_rank();
    const Index mode = core.mode_size();
    const Index rn = map.target_dim();

    if (n == 1) {
        DenseTensor y({1, mode, count});
        for (Index i = 0; i < count; ++i) {
            std::copy(samples[static_cast<std::size_t>(i)].data().begin(),
                      samples[static_cast<std::size_t>(i)].data().end(),
                      y.data().begin() + mode * i);
        }
        return y;
    }

    if (k == n - 1) {
        const DenseTensor prefix = prefix_chain(map, n - 1);
        const auto modes = iota_modes(n - 1);
        DenseTensor y({rl, mode, count});
        const Index slab = rl * mode;
        for (Index i = 0; i < count; ++i) {
            // [I_n, R_{n-1}] -> [R_{n-1}, I_n]
            DenseTensor a = contract(samples[static_cast<std::size_t>(i)], prefix, modes, modes);
            const DenseTensor p = permute(a, std::vector<Index>{1, 0});
            std::copy(p.data().begin(), p.data().end(), y.data().begin() + slab * i);
        }
        return y;
    }

    if (k == 0) {
        const DenseTensor suffix = suffix_chain(map, n - 1);
        std::vector<Index> modes_x(static_cast<std::size_t>(n - 1));
        std::iota(modes_x.begin(), modes_x.end(), Index{1});
        DenseTensor y({rr, rn, mode, count});
        const Index slab = rr * rn * mode;
        for (Index i = 0; i < count; ++i) {
            // [I_1, R_1, R_n] -> [R_1, R_n, I_1]
            DenseTensor b =
                contract(samples[static_cast<std::size_t>(i)], suffix, modes_x, modes_x);
            const DenseTensor p = permute(b, std::vector<Index>{1, 2, 0});
            std::copy(p.data().begin(), p.data().end(), y.data().begin() + slab * i);
        }
        return y;
    }

    const DenseTensor prefix = prefix_chain(map, k);
    const DenseTensor suffix = suffix_chain(map, n - 1 - k);
    const auto front = iota_modes(k);
    std::vector<Index> back(static_cast<std::size_t>(n - 1 - k));
    std::iota(back.begin(), back.end(), Index{1});

    DenseTensor y({rl, rr, rn, mode, count});
    const Index slab = rl * rr * rn * mode;
    for (Index i = 0; i < count; ++i) {
        // contract the leading modes: survivors [I_{k+1}, ..., I_n, R_k]
        DenseTensor a = contract(samples[static_cast<std::size_t>(i)], prefix, front, front);
        // contract the trailing original modes: survivors [I_{k+1}, R_k, R_{k+1}, R_n]
        DenseTensor b = contract(a, suffix, back, back);
        const DenseTensor p = permute(b, std::vector<Index>{1, 2, 3, 0});
        std::copy(p.data().begin(), p.data().end(), y.data().begin() + slab * i);
    }
    return y;
}

Matrix assemble_H(const DenseTensor& yk, const Matrix& laplacian, const TTMap& map, Index k) {
    const Index n = map.order();
    if (k < 0 || k >= n) {
        throw ShapeError("core index out of range");
    }
    const TTCore& core = map.core(k);
    const Index rl = core.left_rank();
    const Index rr = core.right_rank();
    const Index mode = core.mode_size();
    const Index rn = map.target_dim();
    const Index count = yk.shape().back();
    if (laplacian.rows() != count || laplacian.cols() != count) {
        throw ShapeError("Laplacian size does not match the sample count of Y");
    }

    if (k == n - 1) {
        if (yk.shape() != std::vector<Index>{rl, mode, count}) {
            throw ShapeError("transformed tensor shape does not match the last core");
        }
        Eigen::Map<const Matrix> m(yk.data().data(), rl * mode, count);
        Matrix h = m * laplacian * m.transpose();
        return 0.5 * (h + h.transpose());
    }

    DenseTensor y5 = yk;
    if (k == 0) {
        if (yk.shape() != std::vector<Index>{rr, rn, mode, count}) {
            throw ShapeError("transformed tensor shape does not match the first core");
        }
        y5 = reshape(yk, {1, rr, rn, mode, count});
    } else if (yk.shape() != std::vector<Index>{rl, rr, rn, mode, count}) {
        throw ShapeError("transformed tensor shape does not match core " + std::to_string(k));
    }

    // reorder so rows linearize as the core vectorization (rl, mode, rr)
    const DenseTensor yp = permute(y5, std::vector<Index>{0, 3, 1, 2, 4});
    const Index rows = rl * mode * rr;
    Matrix h = Matrix::Zero(rows, rows);
    for (Index r = 0; r < rn; ++r) {
        Eigen::Map<const Matrix, 0, Eigen::OuterStride<>> slice(
            yp.data().data() + rows * r, rows, count, Eigen::OuterStride<>(rows * rn));
        h.noalias() += slice * laplacian * slice.transpose();
    }
    return 0.5 * (h + h.transpose());
}

double objective_fnorm(const std::vector<DenseTensor>& samples, const TTMap& map,
                       const Matrix& s) {
    check_samples(samples, map);
    const Matrix proj = project_all(samples, map);
    const Index n = proj.cols();
    if (s.rows() != n || s.cols() != n) {
        throw ShapeError("affinity size does not match the sample count");
    }
    double total = 0.0;
    for (Index j = 0; j < n; ++j) {
        for (Index i = j + 1; i < n; ++i) {
            if (s(i, j) != 0.0) {
                total += (proj.col(i) - proj.col(j)).norm() * s(i, j);
            }
        }
    }
    return total;
}

double objective_squared(const std::vector<DenseTensor>& samples, const TTMap& map,
                         const Matrix& s) {
    check_samples(samples, map);
    const Matrix proj = project_all(samples, map);
    const Index n = proj.cols();
    if (s.rows() != n || s.cols() != n) {
        throw ShapeError("affinity size does not match the sample count");
    }
    double total = 0.0;
    for (Index j = 0; j < n; ++j) {
        for (Index i = j + 1; i < n; ++i) {
            if (s(i, j) != 0.0) {
                total += (proj.col(i) - proj.col(j)).squaredNorm() * s(i, j);
            }
        }
    }
    return total;
}

FitResult fit(const std::vector<DenseTensor>& samples, const AffinityGraph& graph,
              const TrainConfig& config) {
    if (samples.size() < 2) {
        throw ConfigError("training needs at least 2 samples");
    }
    const auto& mode_sizes = samples.front().shape();
    for (const DenseTensor& x : samples) {
        if (x.shape() != mode_sizes) {
            throw ShapeError("samples must share one shape");
        }
    }
    config.validate(mode_sizes);
    if (graph.sample_count() != static_cast<Index>(samples.size())) {
        throw ShapeError("graph size does not match the sample count");
    }

    rng::Stream stream = rng::derive(config.seed, {0x7474696e69ULL});
    TTMap map = TTMap::random(mode_sizes, config.ranks, config.target_dim, stream);
    const Index n = map.order();

    TrainTrace trace;
    trace.initial_objective = objective_fnorm(samples, map, graph.S);
    double prev = trace.initial_objective;

    for (int outer = 0; outer < config.max_outer_iters; ++outer) {
        const auto t0 = std::chrono::steady_clock::now();
        const ReweightedGraph rw = reweight(graph, map, samples, config.epsilon);

        std::vector<int> inner(static_cast<std::size_t>(n), 0);
        if (config.solver.max_inner_iters > 0) {
            for (Index k = 0; k < n; ++k) {
                const TTCore& core = map.core(k);
                try {
                    const DenseTensor yk = transformed_data(samples, map, k);
                    const Matrix hk = assemble_H(yk, rw.L, map, k);
                    if (k < n - 1) {
                        const stiefel::StiefelPoint init(core.left_unfolding());
                        const auto res = stiefel::min_quadratic_on_stiefel(hk, init, config.solver);
                        map = map.with_core(
                            k, TTCore(refold(res.point.matrix(),
                                             {core.left_rank(), core.mode_size(), core.right_rank()})));
                        inner[static_cast<std::size_t>(k)] = res.iterations;
                    } else {
                        const Matrix m = stiefel::min_trace_on_stiefel(hk, config.target_dim);
                        map = map.with_core(
                            k, TTCore(refold(m, {core.left_rank(), core.mode_size(),
                                                 config.target_dim})));
                        inner[static_cast<std::size_t>(k)] = 1;
                    }
                } catch (const NumericalError& e) {
                    throw NumericalError("core " + std::to_string(k) + ": " + e.what());
                }
            }
        }

        const double obj = objective_fnorm(samples, map, graph.S);
        const auto t1 = std::chrono::steady_clock::now();
        trace.objective.push_back(obj);
        trace.surrogate.push_back(objective_squared(samples, map, rw.S));
        trace.defect.push_back(orthonormality_defect(map));
        trace.seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
        trace.inner_iters.push_back(std::move(inner));

        const double rel = std::abs(obj - prev) / std::max(prev, 1e-300);
        prev = obj;
        if (rel < config.outer_tolerance) {
            trace.converged = true;
            break;
        }
    }
    return FitResult{std::move(map), std::move(trace)};
}

FitResult fit(const std::vector<DenseTensor>& samples, const TrainConfig& config) {
    const AffinityGraph graph = build_affinity(samples, config.neighbors, config.kernel_width);
    return fit(samples, graph, config);
}

}  // namespace ttpudr
