#pragma once

#include "ttpudr/common.hpp"

#include <cstdint>

namespace ttpudr::stiefel {

/// A matrix with orthonormal columns, validated at construction.
class StiefelPoint {
public:
    static constexpr double kDefectTolerance = 1e-8;

    explicit StiefelPoint(Matrix m);

    /// Project an arbitrary full-column-rank matrix onto the manifold via
    /// thin QR with a sign-fixed triangular factor.
    static StiefelPoint orthonormalized(const Matrix& m);

    const Matrix& matrix() const { return m_; }
    Index rows() const { return m_.rows(); }
    Index cols() const { return m_.cols(); }
    double defect() const;

private:
    Matrix m_;
};

struct SolverSettings {
    int max_inner_iters = 200;
    double gradient_tolerance = 1e-6;
    double initial_step = 1.0;
    double backtracking_factor = 0.5;
    double sufficient_decrease = 1e-4;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SolveResult {
    StiefelPoint point;
    double objective = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
};

/// Tangent-space projection of a Euclidean gradient at M:
/// G - M * sym(M^T G) with sym(A) = (A + A^T)/2.
Matrix riemannian_grad(const StiefelPoint& m, const Matrix& euclid_grad);

/// QR retraction of M + step * tangent, sign-fixed so step = 0 returns M
/// exactly. Throws NumericalError on rank deficiency (step too large).
StiefelPoint retract(const StiefelPoint& m, const Matrix& tangent, double step);

/// Minimize vec(M)^T H vec(M) over the Stiefel manifold by Riemannian
/// gradient descent with Armijo backtracking. vec() is column-major, so for
/// a TT core this is exactly V(U)^T H V(U) with M the left unfolding.
/// Accepted steps never increase the objective.
SolveResult min_quadratic_on_stiefel(const Matrix& h, const StiefelPoint& init,
                                     const SolverSettings& settings);

/// Minimize trace(M^T H M) over m x r orthonormal M: the eigenvectors of H
/// for the r algebraically smallest eigenvalues, each column sign-fixed
/// (first component over 1e-12 in magnitude made positive).
Matrix min_trace_on_stiefel(const Matrix& h, Index r);

}  // namespace ttpudr::stiefel
