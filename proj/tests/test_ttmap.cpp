#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ttpudr/rng.hpp"
#include "ttpudr/ttmap.hpp"

#include <cmath>
#include <sstream>
#include <vector>

using namespace ttpudr;

namespace {

DenseTensor random_tensor(std::vector<Index> shape, rng::Stream& stream) {
    DenseTensor t(std::move(shape));
    for (double& v : t.data()) {
        v = stream.next_normal();
    }
    return t;
}

/// Per-element chain evaluation: the product of core slices U_1(:,i_1,:)
/// ... U_n(:,i_n,:) read off entry by entry.
double chain_entry_oracle(const TTMap& map, const std::vector<Index>& modes, Index rn) {
    Matrix acc = Matrix::Identity(1, 1);
    for (Index k = 0; k < map.order(); ++k) {
        const TTCore& core = map.core(k);
        Matrix slice(core.left_rank(), core.right_rank());
        for (Index r = 0; r < core.left_rank(); ++r) {
            for (Index s = 0; s < core.right_rank(); ++s) {
                slice(r, s) = core.tensor().at(
                    std::vector<Index>{r, modes[static_cast<std::size_t>(k)], s});
            }
        }
        acc = acc * slice;
    }
    return acc(0, rn);
}

TTCore identity_core(Index rank, Index mode) {
    DenseTensor t({rank, mode, rank});
    for (Index i = 0; i < mode; ++i) {
        for (Index r = 0; r < rank; ++r) {
            t({r, i, r}) = 1.0;
        }
    }
    return TTCore(std::move(t));
}

}  // namespace

TEST_CASE("TTCore and TTMap validation") {
    CHECK_THROWS_AS(TTCore(DenseTensor({2, 2})), ShapeError);
    rng::Stream stream(1);
    std::vector<TTCore> cores;
    cores.emplace_back(random_tensor({1, 3, 2}, stream));
    cores.emplace_back(random_tensor({3, 4, 2}, stream));  // left rank 3 != 2
    CHECK_THROWS_AS(TTMap(std::move(cores)), ShapeError);

    std::vector<TTCore> bad_first;
    bad_first.emplace_back(random_tensor({2, 3, 2}, stream));
    CHECK_THROWS_AS(TTMap(std::move(bad_first)), ShapeError);
}

TEST_CASE("full_chain of a single core is the core itself") {
    rng::Stream stream(2);
    const DenseTensor core = random_tensor({1, 4, 3}, stream);
    TTMap map({TTCore(core)});
    const DenseTensor chain = full_chain(map);
    REQUIRE(chain.shape() == std::vector<Index>{4, 3});
    CHECK(chain.data() == core.data());
}

TEST_CASE("full_chain of two cores matches the per-element slice product") {
    rng::Stream stream(3);
    std::vector<TTCore> cores;
    cores.emplace_back(random_tensor({1, 2, 2}, stream));
    cores.emplace_back(random_tensor({2, 3, 1}, stream));
    TTMap map(std::move(cores));
    const DenseTensor chain = full_chain(map);
    REQUIRE(chain.shape() == std::vector<Index>{2, 3, 1});
    for (Index i1 = 0; i1 < 2; ++i1) {
        for (Index i2 = 0; i2 < 3; ++i2) {
            CHECK(chain({i1, i2, 0}) ==
                  doctest::Approx(chain_entry_oracle(map, {i1, i2}, 0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("full_chain of identity-slice cores is an indicator pattern") {
    TTMap map({identity_core(1, 2), identity_core(1, 3)});
    const DenseTensor chain = full_chain(map);
    REQUIRE(chain.shape() == std::vector<Index>{2, 3, 1});
    for (Index i1 = 0; i1 < 2; ++i1) {
        for (Index i2 = 0; i2 < 3; ++i2) {
            CHECK(chain({i1, i2, 0}) == 1.0);
        }
    }
}

TEST_CASE("full_chain respects the element cap") {
    rng::Stream stream(4);
    TTMap map = TTMap::random({8, 8, 8}, {4, 4}, 4, stream);
    CHECK_THROWS_AS(full_chain(map, 100), ElementCapError);
    CHECK_THROWS_AS(orthonormality_defect(map, false, 100), ElementCapError);
    CHECK(orthonormality_defect(map, true, 100) <= 1e-8);  // Gram path avoids the cap
}

TEST_CASE("apply: zeros map to the zero vector") {
    rng::Stream stream(5);
    TTMap map = TTMap::random({3, 4, 2}, {2, 3}, 2, stream);
    const Vector t = apply(map, DenseTensor({3, 4, 2}));
    CHECK(t.size() == 2);
    CHECK(t.norm() == 0.0);
}

TEST_CASE("apply equals the explicit unfolded-chain matrix") {
    rng::Stream stream(6);
    TTMap map = TTMap::random({3, 4, 2}, {2, 3}, 2, stream);
    const DenseTensor x = random_tensor({3, 4, 2}, stream);
    const Vector via_chain = left_unfold(full_chain(map)).transpose() * vectorize(x);
    const Vector direct = apply(map, x);
    CHECK((via_chain - direct).norm() <= 1e-10 * std::max(1.0, via_chain.norm()));

    CHECK_THROWS_AS(apply(map, DenseTensor({3, 4})), ShapeError);
}

TEST_CASE("apply with a full-rank identity chain permutes the vectorization") {
    // U1(0,i1,r1) = [i1 == r1], U2(r1,i2,rn) = [rn == r1 + 2*i2]
    DenseTensor u1({1, 2, 2});
    u1({0, 0, 0}) = 1.0;
    u1({0, 1, 1}) = 1.0;
    DenseTensor u2({2, 2, 4});
    for (Index r1 = 0; r1 < 2; ++r1) {
        for (Index i2 = 0; i2 < 2; ++i2) {
            u2({r1, i2, r1 + 2 * i2}) = 1.0;
        }
    }
    TTMap map({TTCore(u1), TTCore(u2)});
    rng::Stream stream(7);
    const DenseTensor x = random_tensor({2, 2}, stream);
    const Vector t = apply(map, x);
    CHECK((t - vectorize(x)).norm() == 0.0);
}

TEST_CASE("apply is linear") {
    rng::Stream stream(8);
    TTMap map = TTMap::random({3, 2, 2}, {2, 2}, 3, stream);
    const DenseTensor x = random_tensor({3, 2, 2}, stream);
    const DenseTensor y = random_tensor({3, 2, 2}, stream);
    const double a = stream.next_normal();
    const double b = stream.next_normal();
    DenseTensor combo({3, 2, 2});
    for (Index i = 0; i < combo.size(); ++i) {
        combo.data()[static_cast<std::size_t>(i)] =
            a * x.data()[static_cast<std::size_t>(i)] + b * y.data()[static_cast<std::size_t>(i)];
    }
    const Vector lhs = apply(map, combo);
    const Vector rhs = a * apply(map, x) + b * apply(map, y);
    CHECK((lhs - rhs).norm() <= 1e-10 * std::max(1.0, rhs.norm()));
}

TEST_CASE("param_count matches the reference configurations") {
    rng::Stream stream(9);
    const auto count = [&](Index rn) {
        return TTMap::random({4, 8, 4, 8}, {4, 7, 4}, rn, stream).param_count();
    };
    CHECK(count(2) == 416);
    CHECK(count(30) == 1312);

    const auto count_indiana = [&](Index rn) {
        return TTMap::random({4, 5, 10}, {3, 4}, rn, stream).param_count();
    };
    CHECK(count_indiana(2) == 152);
    CHECK(count_indiana(30) == 1272);

    // degenerate single-core chain equals a dense linear map
    CHECK(TTMap::random({12}, {}, 5, stream).param_count() == 12 * 5);

    // compression: strictly below the dense D x Rn map for the whole sweep
    for (Index rn = 2; rn <= 30; ++rn) {
        CHECK(TTMap::random({4, 8, 4, 8}, {4, 7, 4}, rn, stream).param_count() < 1024 * rn);
        CHECK(TTMap::random({4, 5, 10}, {3, 4}, rn, stream).param_count() < 200 * rn);
    }
}

TEST_CASE("random maps are left-orthonormal core by core and overall") {
    rng::Stream stream(10);
    TTMap map = TTMap::random({3, 4, 2}, {3, 4}, 5, stream);
    for (const TTCore& core : map.cores()) {
        CHECK(core.gram_defect() <= 1e-8);
    }
    CHECK(orthonormality_defect(map) <= 1e-8);

    // Gram accumulation agrees with the explicit unfolded chain
    const double via_gram = orthonormality_defect(map, true);
    const double via_chain = orthonormality_defect(map, false);
    CHECK(via_gram == doctest::Approx(via_chain).epsilon(1e-10));

    CHECK_THROWS_AS(TTMap::random({2, 2}, {2}, 5, stream), ConfigError);  // 5 > 2*2
}

TEST_CASE("orthonormality defect detects a scaled core") {
    rng::Stream stream(11);
    TTMap map = TTMap::random({3, 2, 2}, {2, 2}, 2, stream);
    DenseTensor scaled = map.core(1).tensor();
    for (double& v : scaled.data()) {
        v *= 2.0;
    }
    const TTMap off = map.with_core(1, TTCore(std::move(scaled)));
    const Matrix e = left_unfold(full_chain(off));
    const double expected =
        (e.transpose() * e - Matrix::Identity(e.cols(), e.cols())).norm();
    CHECK(expected > 0.1);
    CHECK(orthonormality_defect(off) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("unit-norm chain with target dimension 1") {
    rng::Stream stream(12);
    TTMap map = TTMap::random({3, 2}, {2}, 1, stream);
    const Matrix e = left_unfold(full_chain(map));
    CHECK(std::abs(e.squaredNorm() - 1.0) <= 1e-10);
    CHECK(orthonormality_defect(map) <= 1e-10);
}

TEST_CASE("apply and the Gram defect scale to chains too large to materialize") {
    // 11 modes of size 4: the full map would hold 4^11 * R_n entries, past
    // the cap, yet applying the chain stays cheap
    rng::Stream stream(14);
    const std::vector<Index> modes(11, 4);
    const std::vector<Index> ranks(10, 3);
    TTMap map = TTMap::random(modes, ranks, 3, stream);
    CHECK(map.input_size() == 4194304);
    CHECK_THROWS_AS(full_chain(map), ElementCapError);

    DenseTensor x(modes);
    for (double& v : x.data()) {
        v = stream.next_normal();
    }
    const Vector t = apply(map, x);
    CHECK(t.size() == 3);
    CHECK(std::isfinite(t.norm()));
    CHECK(t.norm() <= fro_norm(x) * (1.0 + 1e-10));  // orthonormal maps contract norms
    CHECK(orthonormality_defect(map) <= 1e-8);
}

TEST_CASE("model serialization round trip") {
    rng::Stream stream(13);
    TTMap map = TTMap::random({4, 8, 4, 8}, {4, 7, 4}, 6, stream);
    std::stringstream buffer;
    save_ttmap(map, buffer);
    const TTMap loaded = load_ttmap(buffer);
    REQUIRE(loaded.order() == map.order());
    for (Index k = 0; k < map.order(); ++k) {
        CHECK(loaded.core(k).tensor().shape() == map.core(k).tensor().shape());
        CHECK(loaded.core(k).tensor().data() == map.core(k).tensor().data());
    }

    std::stringstream bad("nonsense");
    CHECK_THROWS_AS(load_ttmap(bad), DataError);
}
