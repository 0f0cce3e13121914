#pragma once

#include "ttpudr/rng.hpp"
#include "ttpudr/tensor.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ttpudr {

/// One 3-order tensor-train core of shape left_rank x mode_size x right_rank.
class TTCore {
public:
    TTCore(Index left_rank, Index mode_size, Index right_rank);
    explicit TTCore(DenseTensor tensor);

    Index left_rank() const { return tensor_.shape()[0]; }
    Index mode_size() const { return tensor_.shape()[1]; }
    Index right_rank() const { return tensor_.shape()[2]; }

    const DenseTensor& tensor() const { return tensor_; }

    /// (left_rank * mode_size) x right_rank matrix.
    Matrix left_unfolding() const { return left_unfold(tensor_); }

    /// ||L^T L - I||_F of the left unfolding.
    double gram_defect() const;

private:
    DenseTensor tensor_;
};

/// Ordered chain of cores U_1 ... U_n defining the reduction mapping
/// x -> L^T(U_1 x ... x U_n) V(x). The first left rank is 1; adjacent ranks
/// must match. Immutable after construction; training builds new maps.
class TTMap {
public:
    explicit TTMap(std::vector<TTCore> cores);

    /// Standard-normal cores, each left-orthonormalized by thin QR of its
    /// left unfolding. Satisfies every chain constraint at iteration 0.
    static TTMap random(const std::vector<Index>& mode_sizes, const std::vector<Index>& ranks,
                        Index target_dim, rng::Stream& stream);

    Index order() const { return static_cast<Index>(cores_.size()); }
    const std::vector<TTCore>& cores() const { return cores_; }
    const TTCore& core(Index k) const { return cores_[static_cast<std::size_t>(k)]; }

    /// Replace core k, revalidating rank consistency.
    TTMap with_core(Index k, TTCore replacement) const;

    std::vector<Index> mode_sizes() const;
    Index target_dim() const { return cores_.back().right_rank(); }

    /// Input dimension I_1 * ... * I_n.
    Index input_size() const;

    Index param_count() const;

private:
    std::vector<TTCore> cores_;
};

/// Materialize the full chain as an I_1 x ... x I_n x R_n tensor. Guarded by
/// an element cap; intended for oracles and small maps only.
DenseTensor full_chain(const TTMap& map, Index element_cap = 10'000'000);

/// Project one sample: contracts cores against x mode by mode, keeping the
/// intermediate at R_k x (remaining modes). Never materializes the chain.
Vector apply(const TTMap& map, const DenseTensor& x);

/// ||E^T E - I||_F for E = left_unfold(full_chain). Computed by Gram
/// accumulation through the chain by default, which never materializes E;
/// with via_gram = false the chain is materialized (subject to the cap).
double orthonormality_defect(const TTMap& map, bool via_gram = true,
                             Index element_cap = 10'000'000);

/// Versioned binary model format: magic "TTMP", version byte, core count,
/// per-core shape triple, then core data in order as little-endian float64.
void save_ttmap(const TTMap& map, std::ostream& out);
TTMap load_ttmap(std::istream& in);
void save_ttmap_file(const TTMap& map, const std::string& path);
TTMap load_ttmap_file(const std::string& path);

}  // namespace ttpudr
