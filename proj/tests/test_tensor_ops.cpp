#include <doctest.h>

#include "support.hpp"
#include "ttkm/error.hpp"
#include "ttkm/tensor_ops.hpp"

using namespace ttkm;
using ttkm::testing::Gen;

TEST_CASE("flatten matches nested-loop enumeration") {
    MultiIndexMap map({2, 3, 4});
    CHECK(map.total_size() == 24);
    const std::size_t zero[] = {0, 0, 0};
    const std::size_t one[] = {1, 0, 0};
    const std::size_t last[] = {1, 2, 3};
    CHECK(map.flatten(zero) == 0);
    CHECK(map.flatten(one) == 1);
    CHECK(map.flatten(last) == 23);

    std::size_t position = 0;
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t i = 0; i < 2; ++i) {
                const std::size_t idx[] = {i, j, k};
                CHECK(map.flatten(idx) == position);
                ++position;
            }
}

TEST_CASE("flatten rejects out-of-range indices") {
    MultiIndexMap map({2, 3});
    const std::size_t bad[] = {2, 0};
    const std::size_t short_idx[] = {1};
    CHECK_THROWS_AS(map.flatten(bad), Error);
    CHECK_THROWS_AS(map.flatten(short_idx), Error);
    CHECK_THROWS_AS(map.unflatten(6), Error);
}

TEST_CASE("multi-index map is a bijection on small grids") {
    Gen gen(11);
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<std::size_t> sizes(static_cast<std::size_t>(gen.integer(1, 4)));
        for (auto& s : sizes) s = static_cast<std::size_t>(gen.integer(1, 4));
        MultiIndexMap map(sizes);
        std::vector<int> seen(map.total_size(), 0);
        for (std::size_t lin = 0; lin < map.total_size(); ++lin) {
            const auto idx = map.unflatten(lin);
            REQUIRE(idx.size() == sizes.size());
            const auto back = map.flatten(idx);
            CHECK(back == lin);
            ++seen[back];
        }
        for (int s : seen) CHECK(s == 1);
    }
}

TEST_CASE("kron puts the left operand on the slow index") {
    Vector one(1), a(2), e0(2), b(2), c(2);
    one << 1;
    a << 5, 7;
    e0 << 1, 0;
    b << 2, 3;
    c << 3, 4;
    CHECK(kron(one, a).isApprox(a));
    Vector expected(4);
    expected << 2, 3, 0, 0;
    CHECK(kron(e0, b) == expected);

    Vector left(2);
    left << 1, 2;
    expected << 3, 4, 6, 8;
    CHECK(kron(left, c) == expected);
}

TEST_CASE("kron matches the elementwise definition and is associative") {
    Gen gen(12);
    for (int trial = 0; trial < 30; ++trial) {
        const Vector a = gen.vector(gen.integer(1, 4));
        const Vector b = gen.vector(gen.integer(1, 4));
        const Vector c = gen.vector(gen.integer(1, 3));
        const Vector k = kron(b, a);
        for (Index j = 0; j < b.size(); ++j)
            for (Index i = 0; i < a.size(); ++i) CHECK(k[i + j * a.size()] == a[i] * b[j]);
        CHECK((kron(c, kron(b, a)) - kron(kron(c, b), a)).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("row-wise Khatri-Rao product") {
    Matrix b(1, 2), a(1, 2);
    b << 1, 0;
    a << 2, 3;
    Matrix expected(1, 4);
    expected << 2, 3, 0, 0;
    CHECK(khatri_rao_rows(b, a) == expected);

    Gen gen(13);
    const Matrix any = gen.matrix(5, 3);
    CHECK(khatri_rao_rows(Matrix::Ones(5, 1), any) == any);

    const Matrix x = gen.matrix(3, 2), y = gen.matrix(3, 2);
    const Matrix kr = khatri_rao_rows(x, y);
    for (Index n = 0; n < 3; ++n) {
        const Vector row = kron(x.row(n).transpose(), y.row(n).transpose());
        CHECK((kr.row(n).transpose() - row).norm() == doctest::Approx(0.0));
    }
    CHECK_THROWS_AS(khatri_rao_rows(gen.matrix(2, 2), gen.matrix(3, 2)), Error);
}

TEST_CASE("TT containers enforce boundary and chained ranks") {
    CHECK_THROWS_AS(TTWeights({TTCore(2, 3, 1)}), Error);
    CHECK_THROWS_AS(TTWeights({TTCore(1, 3, 2), TTCore(3, 3, 1)}), Error);
    CHECK_THROWS_AS(TTCore(1, 2, 1, Vector::Zero(3)), Error);
    TTWeights w({TTCore(1, 3, 2), TTCore(2, 3, 4), TTCore(4, 3, 1)});
    CHECK(w.ranks() == std::vector<Index>{2, 4});
    CHECK(w.parameter_count() == 3 * (2 + 8 + 4));
}

TEST_CASE("core storage orders the left rank fastest") {
    TTCore core(2, 3, 2);
    Vector entries(12);
    for (Index k = 0; k < 12; ++k) entries[k] = static_cast<double>(k);
    core.set_entries(entries);
    MultiIndexMap map({2, 3, 2});
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t a = 0; a < 2; ++a) {
                const std::size_t idx[] = {a, i, b};
                CHECK(core(static_cast<Index>(a), static_cast<Index>(i), static_cast<Index>(b)) ==
                      static_cast<double>(map.flatten(idx)));
            }
}

TEST_CASE("full vector of scalar chains and single cores") {
    Vector c1(1), c2(1), c3(1);
    c1 << 2.0;
    c2 << -3.0;
    c3 << 0.5;
    TTWeights scalars({TTCore(1, 1, 1, c1), TTCore(1, 1, 1, c2), TTCore(1, 1, 1, c3)});
    CHECK(tt_full_vector(scalars)[0] == doctest::Approx(-3.0));

    Vector fiber(4);
    fiber << 1, -2, 3, -4;
    TTWeights single({TTCore(1, 4, 1, fiber)});
    CHECK(tt_full_vector(single) == fiber);
}

TEST_CASE("full vector matches the slice-product oracle") {
    Gen gen(14);
    const TTWeights w = gen.weights({2, 2}, 2);
    const Vector full = tt_full_vector(w);
    REQUIRE(full.size() == 8);
    CHECK((full - ttkm::testing::chain_oracle(w)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("expansion cap is enforced") {
    Gen gen(15);
    const TTWeights w = gen.weights({2, 2, 2}, 4);
    CHECK_THROWS_AS(tt_full_vector(w, 100), Error);
    try {
        tt_full_vector(w, 100);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ExpansionTooLarge);
    }
    CHECK(tt_full_vector(w, 256).size() == 256);
}

TEST_CASE("feature contraction simple cases") {
    Vector e0(3);
    e0 << 1, 0, 0;
    TTWeights w({TTCore(1, 3, 1, e0), TTCore(1, 3, 1, e0)});
    std::vector<Matrix> phi{Matrix::Zero(1, 3), Matrix::Zero(1, 3)};
    phi[0](0, 0) = 1;
    phi[1](0, 0) = 1;
    CHECK(tt_dot_features(w, phi)[0] == doctest::Approx(1.0));

    TTWeights zero({TTCore(1, 3, 2), TTCore(2, 3, 1)});
    Gen gen(16);
    const auto f = gen.features(2, 5, 3);
    CHECK(tt_dot_features(zero, f).isZero());
    CHECK_THROWS_AS(tt_dot_features(zero, std::vector<Matrix>{gen.matrix(5, 3)}), Error);
    CHECK_THROWS_AS(tt_dot_features(zero, std::vector<Matrix>{gen.matrix(5, 3), gen.matrix(4, 3)}), Error);
}

TEST_CASE("feature contraction equals the dense product on random instances") {
    Gen gen(17);
    for (int trial = 0; trial < 200; ++trial) {
        const auto dims = static_cast<std::size_t>(gen.integer(1, 4));
        const Index basis = gen.integer(1, 3);
        std::vector<Index> ranks(dims - 1);
        for (auto& r : ranks) r = gen.integer(1, 3);
        const Index rows = gen.integer(1, 20);
        const TTWeights w = gen.weights(ranks, basis);
        const auto phi = gen.features(dims, rows, basis);
        const Vector dense = ttkm::testing::dense_features(phi) * tt_full_vector(w);
        CHECK((tt_dot_features(w, phi) - dense).cwiseAbs().maxCoeff() <= 1e-10);
    }
}
