#include "ttpudr/ttmap.hpp"

#include <Eigen/QR>

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace ttpudr {

namespace {

/// R_{k-1} x R_k slice U(:, i, :) of a core tensor.
Eigen::Map<const Matrix, 0, Eigen::OuterStride<>> core_slice(const DenseTensor& t, Index i) {
    const Index rl = t.shape()[0];
    const Index mode = t.shape()[1];
    const Index rr = t.shape()[2];
    return {t.data().data() + rl * i, rl, rr, Eigen::OuterStride<>(rl * mode)};
}

}  // namespace

TTCore::TTCore(Index left_rank, Index mode_size, Index right_rank)
    : tensor_(std::vector<Index>{left_rank, mode_size, right_rank}) {}

TTCore::TTCore(DenseTensor tensor) : tensor_(std::move(tensor)) {
    if (tensor_.order() != 3) {
        throw ShapeError("a TT core must be a 3-order tensor");
    }
}

double TTCore::gram_defect() const {
    const Matrix l = left_unfolding();
    const Matrix gram = l.transpose() * l;
    return (gram - Matrix::Identity(right_rank(), right_rank())).norm();
}

TTMap::TTMap(std::vector<TTCore> cores) : cores_(std::move(cores)) {
    if (cores_.empty()) {
        throw ShapeError("a TT map needs at least one core");
    }
    if (cores_.front().left_rank() != 1) {
        throw ShapeError("the first core must have left rank 1");
    }
    for (std::size_t k = 0; k + 1 < cores_.size(); ++k) {
        if (cores_[k].right_rank() != cores_[k + 1].left_rank()) {
            throw ShapeError("rank mismatch between cores " + std::to_string(k) + " and " +
                             std::to_string(k + 1));
        }
    }
}

TTMap TTMap::random(const std::vector<Index>& mode_sizes, const std::vector<Index>& ranks,
                    Index target_dim, rng::Stream& stream) {
    const std::size_t n = mode_sizes.size();
    if (n == 0) {
        throw ConfigError("at least one mode required");
    }
    if (ranks.size() != n - 1) {
        throw ConfigError("expected " + std::to_string(n - 1) + " internal ranks, got " +
                          std::to_string(ranks.size()));
    }
    std::vector<TTCore> cores;
    cores.reserve(n);
    Index left = 1;
    for (std::size_t k = 0; k < n; ++k) {
        const Index right = (k + 1 < n) ? ranks[k] : target_dim;
        if (right <= 0) {
            throw ConfigError("ranks must be positive");
        }
        const Index rows = left * mode_sizes[k];
        if (right > rows) {
            throw ConfigError("rank " + std::to_string(right) + " at core " + std::to_string(k) +
                              " exceeds left_rank*mode_size = " + std::to_string(rows) +
                              "; no orthonormal left unfolding exists");
        }
        Matrix g(rows, right);
        for (Index c = 0; c < right; ++c) {
            for (Index r = 0; r < rows; ++r) {
                g(r, c) = stream.next_normal();
            }
        }
        Eigen::HouseholderQR<Matrix> qr(g);
        Matrix q = qr.householderQ() * Matrix::Identity(rows, right);
        const Matrix r_factor = qr.matrixQR().topRows(right).triangularView<Eigen::Upper>();
        for (Index c = 0; c < right; ++c) {
            if (r_factor(c, c) < 0.0) {
                q.col(c) = -q.col(c);
            }
        }
        cores.emplace_back(refold(q, {left, mode_sizes[k], right}));
        left = right;
    }
    return TTMap(std::move(cores));
}

TTMap TTMap::with_core(Index k, TTCore replacement) const {
    if (k < 0 || k >= order()) {
        throw ShapeError("core index out of range");
    }
    std::vector<TTCore> cores = cores_;
    cores[static_cast<std::size_t>(k)] = std::move(replacement);
    return TTMap(std::move(cores));
}

std::vector<Index> TTMap::mode_sizes() const {
    std::vector<Index> sizes;
    sizes.reserve(cores_.size());
    for (const TTCore& c : cores_) {
        sizes.push_back(c.mode_size());
    }
    return sizes;
}

Index TTMap::input_size() const {
    Index d = 1;
    for (const TTCore& c : cores_) {
        d *= c.mode_size();
    }
    return d;
}

Index TTMap::param_count() const {
    Index count = 0;
    for (const TTCore& c : cores_) {
        count += c.left_rank() * c.mode_size() * c.right_rank();
    }
    return count;
}

DenseTensor full_chain(const TTMap& map, Index element_cap) {
    DenseTensor chain = map.core(0).tensor();
    for (Index k = 1; k < map.order(); ++k) {
        const Index next_size =
            (chain.size() / chain.shape().back()) * map.core(k).tensor().size() /
            map.core(k).left_rank();
        if (next_size > element_cap) {
            throw ElementCapError("full chain would hold " + std::to_string(next_size) +
                                  " elements, cap is " + std::to_string(element_cap));
        }
        chain = contract(chain, map.core(k).tensor(), {chain.order() - 1}, {Index{0}});
    }
    // drop the leading singleton rank mode
    std::vector<Index> shape(chain.shape().begin() + 1, chain.shape().end());
    return reshape(chain, std::move(shape));
}

Vector apply(const TTMap& map, const DenseTensor& x) {
    const auto sizes = map.mode_sizes();
    if (x.shape() != sizes) {
        throw ShapeError("sample shape does not match the map's mode sizes");
    }
    Index rest = x.size() / sizes[0];
    Matrix cur = Eigen::Map<const Matrix>(x.data().data(), sizes[0], rest);
    for (Index k = 0; k < map.order(); ++k) {
        const TTCore& core = map.core(k);
        Matrix next = core.left_unfolding().transpose() * cur;
        if (k + 1 < map.order()) {
            const Index mode = map.core(k + 1).mode_size();
            rest /= mode;
            cur = Eigen::Map<const Matrix>(next.data(), next.rows() * mode, rest);
        } else {
            cur = std::move(next);
        }
    }
    return cur.col(0);
}

double orthonormality_defect(const TTMap& map, bool via_gram, Index element_cap) {
    const Index target = map.target_dim();
    if (via_gram) {
        Matrix gram = Matrix::Identity(1, 1);
        for (const TTCore& core : map.cores()) {
            Matrix next = Matrix::Zero(core.right_rank(), core.right_rank());
            for (Index i = 0; i < core.mode_size(); ++i) {
                const auto slice = core_slice(core.tensor(), i);
                next.noalias() += slice.transpose() * gram * slice;
            }
            gram = std::move(next);
        }
        return (gram - Matrix::Identity(target, target)).norm();
    }
    const Matrix e = left_unfold(full_chain(map, element_cap));
    return (e.transpose() * e - Matrix::Identity(target, target)).norm();
}

namespace {

constexpr char kMagic[4] = {'T', 'T', 'M', 'P'};
constexpr std::uint8_t kVersion = 1;

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) {
        buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) {
        throw DataError("unexpected end of TT model stream");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    }
    return v;
}

void write_f64(std::ostream& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    write_u64(out, bits);
}

double read_f64(std::istream& in) {
    const std::uint64_t bits = read_u64(in);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

}  // namespace

void save_ttmap(const TTMap& map, std::ostream& out) {
    out.write(kMagic, 4);
    out.put(static_cast<char>(kVersion));
    write_u64(out, static_cast<std::uint64_t>(map.order()));
    for (const TTCore& c : map.cores()) {
        write_u64(out, static_cast<std::uint64_t>(c.left_rank()));
        write_u64(out, static_cast<std::uint64_t>(c.mode_size()));
        write_u64(out, static_cast<std::uint64_t>(c.right_rank()));
    }
    for (const TTCore& c : map.cores()) {
        for (double d : c.tensor().data()) {
            write_f64(out, d);
        }
    }
    if (!out) {
        throw DataError("failed to write TT model");
    }
}

TTMap load_ttmap(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw DataError("not a TT model file (bad magic)");
    }
    const int version = in.get();
    if (version != kVersion) {
        throw DataError("unsupported TT model version " + std::to_string(version));
    }
    const auto n = static_cast<Index>(read_u64(in));
    if (n <= 0 || n > 64) {
        throw DataError("implausible core count " + std::to_string(n));
    }
    std::vector<std::vector<Index>> shapes;
    shapes.reserve(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) {
        std::vector<Index> s(3);
        for (auto& v : s) {
            v = static_cast<Index>(read_u64(in));
            if (v <= 0) {
                throw DataError("nonpositive dimension in TT model header");
            }
        }
        shapes.push_back(std::move(s));
    }
    std::vector<TTCore> cores;
    cores.reserve(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) {
        const auto& s = shapes[static_cast<std::size_t>(k)];
        std::vector<double> data(static_cast<std::size_t>(s[0] * s[1] * s[2]));
        for (double& d : data) {
            d = read_f64(in);
        }
        cores.emplace_back(DenseTensor(s, std::move(data)));
    }
    return TTMap(std::move(cores));
}

void save_ttmap_file(const TTMap& map, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot open " + path + " for writing");
    }
    save_ttmap(map, out);
}

TTMap load_ttmap_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    return load_ttmap(in);
}

}  // namespace ttpudr
