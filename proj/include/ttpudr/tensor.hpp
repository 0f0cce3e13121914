#pragma once

#include "ttpudr/common.hpp"

#include <span>
#include <vector>

namespace ttpudr {

/// Dense n-order real tensor. The flat buffer is linearized with the FIRST
/// mode varying fastest: offset(i_0,...,i_{n-1}) = i_0 + I_0*(i_1 + I_1*(...)).
/// A 0-mode tensor (empty shape) is a scalar holding one value. All mode and
/// element indices are 0-based; out-of-range access throws, never wraps.
class DenseTensor {
public:
    DenseTensor() : shape_(), data_(1, 0.0) {}

    explicit DenseTensor(std::vector<Index> shape);
    DenseTensor(std::vector<Index> shape, std::vector<double> data);

    static DenseTensor scalar(double value);

    Index order() const { return static_cast<Index>(shape_.size()); }
    const std::vector<Index>& shape() const { return shape_; }
    Index dim(Index mode) const;
    Index size() const { return static_cast<Index>(data_.size()); }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    double at(std::span<const Index> indices) const;
    double& at(std::span<const Index> indices);

    double operator()(std::initializer_list<Index> indices) const {
        return at(std::span<const Index>(indices.begin(), indices.size()));
    }
    double& operator()(std::initializer_list<Index> indices) {
        return at(std::span<const Index>(indices.begin(), indices.size()));
    }

    /// Flat offset of a multi-index (bounds-checked).
    Index offset(std::span<const Index> indices) const;

    bool same_shape(const DenseTensor& other) const { return shape_ == other.shape_; }

private:
    std::vector<Index> shape_;
    std::vector<double> data_;
};

/// Tensor contraction: sums products over the paired modes (modes_x[p] of x
/// against modes_y[p] of y). The result carries the surviving modes of x in
/// order, then the surviving modes of y in order. Evaluated by permuting both
/// operands so the contracted modes are adjacent and running one GEMM.
DenseTensor contract(const DenseTensor& x, const DenseTensor& y,
                     std::span<const Index> modes_x, std::span<const Index> modes_y);

DenseTensor contract(const DenseTensor& x, const DenseTensor& y,
                     std::initializer_list<Index> modes_x, std::initializer_list<Index> modes_y);

/// Reorder modes: result mode a is input mode perm[a].
DenseTensor permute(const DenseTensor& x, std::span<const Index> perm);

/// Reinterpret the flat buffer under a new shape (element count must match).
DenseTensor reshape(const DenseTensor& x, std::vector<Index> new_shape);

/// All modes but the last as rows, the last mode as columns. With the
/// first-fastest linearization this is exactly the flat buffer viewed
/// column-major, so unfold/refold are bijections by construction.
Matrix left_unfold(const DenseTensor& x);

/// First mode as rows, all remaining modes as columns.
Matrix right_unfold(const DenseTensor& x);

/// Flat buffer as a vector, in linearization order.
Vector vectorize(const DenseTensor& x);

/// Inverse of vectorize/unfold: wrap a matrix's column-major data in a shape.
DenseTensor refold(const Matrix& m, std::vector<Index> shape);
DenseTensor refold(const Vector& v, std::vector<Index> shape);

/// sqrt of the sum of squared entries (l2 norm of the vectorization).
double fro_norm(const DenseTensor& x);

/// Sum of absolute entries. Defined for completeness; nothing depends on it.
double l1_norm(const DenseTensor& x);

}  // namespace ttpudr
