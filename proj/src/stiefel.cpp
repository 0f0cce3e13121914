#include "ttpudr/stiefel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <string>

namespace ttpudr::stiefel {

StiefelPoint::StiefelPoint(Matrix m) : m_(std::move(m)) {
    if (m_.rows() < m_.cols()) {
        throw ShapeError("a Stiefel point needs rows >= cols");
    }
    const double d = defect();
    if (!(d <= kDefectTolerance)) {
        throw NumericalError("matrix is not orthonormal (defect " + std::to_string(d) + ")");
    }
}

double StiefelPoint::defect() const {
    return (m_.transpose() * m_ - Matrix::Identity(m_.cols(), m_.cols())).norm();
}

StiefelPoint StiefelPoint::orthonormalized(const Matrix& m) {
    Eigen::HouseholderQR<Matrix> qr(m);
    Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
    const Matrix r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
    for (Index c = 0; c < m.cols(); ++c) {
        if (std::abs(r(c, c)) < 1e-12) {
            throw NumericalError("rank-deficient matrix cannot be retracted");
        }
        if (r(c, c) < 0.0) {
            q.col(c) = -q.col(c);
        }
    }
    return StiefelPoint(std::move(q));
}

void SolverSettings::validate() const {
    if (max_inner_iters < 0) {
        throw ConfigError("max_inner_iters must be nonnegative");
    }
    if (!(gradient_tolerance > 0.0) || !(initial_step > 0.0) || !(sufficient_decrease > 0.0)) {
        throw ConfigError("solver tolerances and step sizes must be positive");
    }
    if (!(backtracking_factor > 0.0 && backtracking_factor < 1.0)) {
        throw ConfigError("backtracking factor must lie in (0, 1)");
    }
}

Matrix riemannian_grad(const StiefelPoint& m, const Matrix& euclid_grad) {
    if (euclid_grad.rows() != m.rows() || euclid_grad.cols() != m.cols()) {
        throw ShapeError("gradient shape does not match the Stiefel point");
    }
    const Matrix mtg = m.matrix().transpose() * euclid_grad;
    const Matrix sym = 0.5 * (mtg + mtg.transpose());
    return euclid_grad - m.matrix() * sym;
}

StiefelPoint retract(const StiefelPoint& m, const Matrix& tangent, double step) {
    if (step == 0.0) {
        return m;
    }
    return StiefelPoint::orthonormalized(m.matrix() + step * tangent);
}

SolveResult min_quadratic_on_stiefel(const Matrix& h, const StiefelPoint& init,
                                     const SolverSettings& settings) {
    settings.validate();
    const Index dim = init.rows() * init.cols();
    if (h.rows() != dim || h.cols() != dim) {
        throw ShapeError("H must be square of size rows*cols of the variable");
    }
    const Matrix hs = 0.5 * (h + h.transpose());

    const auto objective = [&](const Matrix& m) {
        Eigen::Map<const Vector> v(m.data(), dim);
        return v.dot(hs * v);
    };
    const auto euclid_grad = [&](const Matrix& m) {
        Eigen::Map<const Vector> v(m.data(), dim);
        const Vector g = 2.0 * (hs * v);
        return Matrix(Eigen::Map<const Matrix>(g.data(), init.rows(), init.cols()));
    };

    StiefelPoint point = init;
    double f = objective(point.matrix());
    int iters = 0;
    double grad_norm = 0.0;
    while (iters < settings.max_inner_iters) {
        const Matrix grad = riemannian_grad(point, euclid_grad(point.matrix()));
        grad_norm = grad.norm();
        if (grad_norm <= settings.gradient_tolerance) {
            break;
        }
        const double descent = grad_norm * grad_norm;
        double step = settings.initial_step;
        bool accepted = false;
        while (step > 1e-20) {
            StiefelPoint trial = point;
            try {
                trial = retract(point, -grad, step);
            } catch (const NumericalError&) {
                step *= settings.backtracking_factor;
                continue;
            }
            const double ft = objective(trial.matrix());
            if (ft <= f - settings.sufficient_decrease * step * descent) {
                point = std::move(trial);
                f = ft;
                accepted = true;
                break;
            }
            step *= settings.backtracking_factor;
        }
        ++iters;
        if (!accepted) {
            break;  // line search exhausted; current point is as good as it gets
        }
    }
    return SolveResult{std::move(point), f, grad_norm, iters};
}

Matrix min_trace_on_stiefel(const Matrix& h, Index r) {
    if (h.rows() != h.cols()) {
        throw ShapeError("H must be square");
    }
    if (r < 1 || r > h.rows()) {
        throw ShapeError("target column count out of range");
    }
    const Matrix hs = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(hs);
    if (eig.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition failed");
    }
    Matrix m = eig.eigenvectors().leftCols(r);  // ascending eigenvalues
    for (Index c = 0; c < r; ++c) {
        for (Index i = 0; i < m.rows(); ++i) {
            if (std::abs(m(i, c)) > 1e-12) {
                if (m(i, c) < 0.0) {
                    m.col(c) = -m.col(c);
                }
                break;
            }
        }
    }
    return m;
}

}  // namespace ttpudr::stiefel
