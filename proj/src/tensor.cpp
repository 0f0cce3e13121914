#include "ttpudr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ttpudr {

namespace {

Index checked_product(const std::vector<Index>& shape) {
    Index n = 1;
    for (Index s : shape) {
        if (s <= 0) {
            throw ShapeError("mode sizes must be positive");
        }
        n *= s;
    }
    return n;
}

std::string shape_string(const std::vector<Index>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        os << (i ? "," : "") << shape[i];
    }
    os << "]";
    return os.str();
}

}  // namespace

DenseTensor::DenseTensor(std::vector<Index> shape)
    : shape_(std::move(shape)), data_(static_cast<std::size_t>(checked_product(shape_)), 0.0) {}

DenseTensor::DenseTensor(std::vector<Index> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_product(shape_) != static_cast<Index>(data_.size())) {
        throw ShapeError("data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string(shape_));
    }
}

DenseTensor DenseTensor::scalar(double value) {
    DenseTensor t;
    t.data_[0] = value;
    return t;
}

Index DenseTensor::dim(Index mode) const {
    if (mode < 0 || mode >= order()) {
        throw ShapeError("mode " + std::to_string(mode) + " out of range for order " +
                         std::to_string(order()));
    }
    return shape_[static_cast<std::size_t>(mode)];
}

Index DenseTensor::offset(std::span<const Index> indices) const {
    if (static_cast<Index>(indices.size()) != order()) {
        throw ShapeError("expected " + std::to_string(order()) + " indices, got " +
                         std::to_string(indices.size()));
    }
    Index off = 0;
    Index stride = 1;
    for (std::size_t m = 0; m < shape_.size(); ++m) {
        const Index i = indices[m];
        if (i < 0 || i >= shape_[m]) {
            throw ShapeError("index " + std::to_string(i) + " out of range for mode " +
                             std::to_string(m) + " of size " + std::to_string(shape_[m]));
        }
        off += i * stride;
        stride *= shape_[m];
    }
    return off;
}

double DenseTensor::at(std::span<const Index> indices) const {
    return data_[static_cast<std::size_t>(offset(indices))];
}

double& DenseTensor::at(std::span<const Index> indices) {
    return data_[static_cast<std::size_t>(offset(indices))];
}

DenseTensor permute(const DenseTensor& x, std::span<const Index> perm) {
    const Index n = x.order();
    if (static_cast<Index>(perm.size()) != n) {
        throw ShapeError("permutation length does not match tensor order");
    }
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::vector<Index> new_shape(static_cast<std::size_t>(n));
    for (Index a = 0; a < n; ++a) {
        const Index src = perm[static_cast<std::size_t>(a)];
        if (src < 0 || src >= n || seen[static_cast<std::size_t>(src)]) {
            throw ShapeError("invalid permutation");
        }
        seen[static_cast<std::size_t>(src)] = true;
        new_shape[static_cast<std::size_t>(a)] = x.shape()[static_cast<std::size_t>(src)];
    }
    DenseTensor out(new_shape);
    if (n == 0) {
        out.data()[0] = x.data()[0];
        return out;
    }

    // Source strides, reordered so stride[a] walks the source buffer when
    // destination mode a advances.
    std::vector<Index> src_stride(static_cast<std::size_t>(n), 1);
    for (Index m = 1; m < n; ++m) {
        src_stride[static_cast<std::size_t>(m)] =
            src_stride[static_cast<std::size_t>(m - 1)] * x.shape()[static_cast<std::size_t>(m - 1)];
    }
    std::vector<Index> walk(static_cast<std::size_t>(n));
    for (Index a = 0; a < n; ++a) {
        walk[static_cast<std::size_t>(a)] = src_stride[static_cast<std::size_t>(perm[static_cast<std::size_t>(a)])];
    }

    std::vector<Index> idx(static_cast<std::size_t>(n), 0);
    Index src_off = 0;
    const Index total = out.size();
    for (Index flat = 0; flat < total; ++flat) {
        out.data()[static_cast<std::size_t>(flat)] = x.data()[static_cast<std::size_t>(src_off)];
        for (Index a = 0; a < n; ++a) {
            auto ua = static_cast<std::size_t>(a);
            ++idx[ua];
            src_off += walk[ua];
            if (idx[ua] < new_shape[ua]) {
                break;
            }
            src_off -= walk[ua] * new_shape[ua];
            idx[ua] = 0;
        }
    }
    return out;
}

DenseTensor reshape(const DenseTensor& x, std::vector<Index> new_shape) {
    return DenseTensor(std::move(new_shape), x.data());
}

DenseTensor contract(const DenseTensor& x, const DenseTensor& y,
                     std::span<const Index> modes_x, std::span<const Index> modes_y) {
    if (modes_x.size() != modes_y.size()) {
        throw ShapeError("contraction index sets must have equal length");
    }
    auto validate = [](const DenseTensor& t, std::span<const Index> modes, const char* which) {
        std::vector<bool> used(static_cast<std::size_t>(t.order()), false);
        for (Index m : modes) {
            if (m < 0 || m >= t.order()) {
                throw ShapeError(std::string("contraction mode out of range for ") + which);
            }
            if (used[static_cast<std::size_t>(m)]) {
                throw ShapeError(std::string("duplicate contraction mode in ") + which);
            }
            used[static_cast<std::size_t>(m)] = true;
        }
        return used;
    };
    const auto used_x = validate(x, modes_x, "x");
    const auto used_y = validate(y, modes_y, "y");
    for (std::size_t p = 0; p < modes_x.size(); ++p) {
        const Index sx = x.shape()[static_cast<std::size_t>(modes_x[p])];
        const Index sy = y.shape()[static_cast<std::size_t>(modes_y[p])];
        if (sx != sy) {
            throw ShapeError("contracted mode sizes disagree: " + std::to_string(sx) + " vs " +
                             std::to_string(sy));
        }
    }

    // x -> [surviving..., contracted...], y -> [contracted..., surviving...]
    std::vector<Index> perm_x;
    std::vector<Index> out_shape;
    for (Index m = 0; m < x.order(); ++m) {
        if (!used_x[static_cast<std::size_t>(m)]) {
            perm_x.push_back(m);
            out_shape.push_back(x.shape()[static_cast<std::size_t>(m)]);
        }
    }
    const Index rows = std::accumulate(out_shape.begin(), out_shape.end(), Index{1}, std::multiplies<>());
    perm_x.insert(perm_x.end(), modes_x.begin(), modes_x.end());

    std::vector<Index> perm_y(modes_y.begin(), modes_y.end());
    std::vector<Index> surv_y_shape;
    for (Index m = 0; m < y.order(); ++m) {
        if (!used_y[static_cast<std::size_t>(m)]) {
            perm_y.push_back(m);
            surv_y_shape.push_back(y.shape()[static_cast<std::size_t>(m)]);
        }
    }
    const Index cols =
        std::accumulate(surv_y_shape.begin(), surv_y_shape.end(), Index{1}, std::multiplies<>());
    const Index inner = x.size() / rows;

    const DenseTensor px = permute(x, perm_x);
    const DenseTensor py = permute(y, perm_y);

    out_shape.insert(out_shape.end(), surv_y_shape.begin(), surv_y_shape.end());
    DenseTensor out(out_shape);

    // Grouped reshape of a first-fastest tensor is a column-major matrix view.
    Eigen::Map<const Matrix> mx(px.data().data(), rows, inner);
    Eigen::Map<const Matrix> my(py.data().data(), inner, cols);
    Eigen::Map<Matrix> mo(out.data().data(), rows, cols);
    mo.noalias() = mx * my;
    return out;
}

DenseTensor contract(const DenseTensor& x, const DenseTensor& y,
                     std::initializer_list<Index> modes_x, std::initializer_list<Index> modes_y) {
    return contract(x, y, std::span<const Index>(modes_x.begin(), modes_x.size()),
                    std::span<const Index>(modes_y.begin(), modes_y.size()));
}

Matrix left_unfold(const DenseTensor& x) {
    if (x.order() < 2) {
        throw ShapeError("left_unfold requires at least 2 modes");
    }
    const Index cols = x.shape().back();
    const Index rows = x.size() / cols;
    return Eigen::Map<const Matrix>(x.data().data(), rows, cols);
}

Matrix right_unfold(const DenseTensor& x) {
    if (x.order() < 2) {
        throw ShapeError("right_unfold requires at least 2 modes");
    }
    const Index rows = x.shape().front();
    const Index cols = x.size() / rows;
    return Eigen::Map<const Matrix>(x.data().data(), rows, cols);
}

Vector vectorize(const DenseTensor& x) {
    return Eigen::Map<const Vector>(x.data().data(), x.size());
}

DenseTensor refold(const Matrix& m, std::vector<Index> shape) {
    std::vector<double> data(m.data(), m.data() + m.size());
    return DenseTensor(std::move(shape), std::move(data));
}

DenseTensor refold(const Vector& v, std::vector<Index> shape) {
    std::vector<double> data(v.data(), v.data() + v.size());
    return DenseTensor(std::move(shape), std::move(data));
}

double fro_norm(const DenseTensor& x) {
    return Eigen::Map<const Vector>(x.data().data(), x.size()).norm();
}

double l1_norm(const DenseTensor& x) {
    return Eigen::Map<const Vector>(x.data().data(), x.size()).lpNorm<1>();
}

}  // namespace ttpudr
