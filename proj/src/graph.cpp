#include "ttpudr/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ttpudr {

namespace {

AffinityGraph build_from_sqdist(const Matrix& sqdist, int k, double t) {
    const Index n = sqdist.rows();
    if (n < 2) {
        throw ConfigError("need at least 2 samples to build an affinity graph");
    }
    if (k < 1 || k >= n) {
        throw ConfigError("neighbor count k must satisfy 1 <= k < N");
    }
    if (!(t > 0.0)) {
        throw ConfigError("heat-kernel width t must be positive");
    }

    // neighbor[j] = indices of the k nearest samples to j (self excluded),
    // ties toward the smaller index
    Matrix s = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        std::vector<Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Index{0});
        order.erase(order.begin() + j);
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
            return sqdist(a, j) < sqdist(b, j);
        });
        order.resize(static_cast<std::size_t>(k));
        for (Index i : order) {
            const double w = std::exp(-sqdist(i, j) / t);
            s(i, j) = w;
            s(j, i) = w;
        }
    }
    s.diagonal().setZero();

    AffinityGraph g;
    g.S = std::move(s);
    g.degrees = g.S.rowwise().sum();
    g.L = Matrix(g.degrees.asDiagonal()) - g.S;
    g.k = k;
    g.t = t;
    return g;
}

Matrix pairwise_sqdist(const Matrix& columns) {
    const Index n = columns.cols();
    Matrix sq(n, n);
    for (Index j = 0; j < n; ++j) {
        sq(j, j) = 0.0;
        for (Index i = j + 1; i < n; ++i) {
            const double d = (columns.col(i) - columns.col(j)).squaredNorm();
            sq(i, j) = d;
            sq(j, i) = d;
        }
    }
    return sq;
}

}  // namespace

AffinityGraph build_affinity(const Matrix& columns, int k, double t) {
    return build_from_sqdist(pairwise_sqdist(columns), k, t);
}

AffinityGraph build_affinity(const std::vector<DenseTensor>& samples, int k, double t) {
    const auto n = static_cast<Index>(samples.size());
    if (n < 2) {
        throw ConfigError("need at least 2 samples to build an affinity graph");
    }
    Matrix columns(samples.front().size(), n);
    for (Index i = 0; i < n; ++i) {
        if (!samples[static_cast<std::size_t>(i)].same_shape(samples.front())) {
            throw ShapeError("samples must share one shape");
        }
        columns.col(i) = vectorize(samples[static_cast<std::size_t>(i)]);
    }
    return build_from_sqdist(pairwise_sqdist(columns), k, t);
}

ReweightedGraph reweight_projected(const AffinityGraph& graph, const Matrix& projections,
                                   double epsilon) {
    if (!(epsilon > 0.0)) {
        throw ConfigError("epsilon guard must be positive");
    }
    const Index n = graph.S.rows();
    if (projections.cols() != n) {
        throw ShapeError("projection count does not match graph size");
    }
    Matrix s = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = j + 1; i < n; ++i) {
            if (graph.S(i, j) == 0.0) {
                continue;
            }
            const double d = (projections.col(i) - projections.col(j)).norm();
            const double w = graph.S(i, j) / std::max(d, epsilon);
            s(i, j) = w;
            s(j, i) = w;
        }
    }
    ReweightedGraph g;
    g.S = std::move(s);
    g.degrees = g.S.rowwise().sum();
    g.L = Matrix(g.degrees.asDiagonal()) - g.S;
    g.epsilon = epsilon;
    return g;
}

ReweightedGraph reweight(const AffinityGraph& graph, const TTMap& map,
                         const std::vector<DenseTensor>& samples, double epsilon) {
    const auto n = static_cast<Index>(samples.size());
    if (n != graph.S.rows()) {
        throw ShapeError("sample count does not match graph size");
    }
    Matrix proj(map.target_dim(), n);
    for (Index i = 0; i < n; ++i) {
        proj.col(i) = apply(map, samples[static_cast<std::size_t>(i)]);
    }
    return reweight_projected(graph, proj, epsilon);
}

}  // namespace ttpudr
