#include <doctest.h>

#include "qcv/tensor.hpp"

using namespace qcv;

namespace {

struct Ctx {
    VarTable t;
    VarId q, z;
    Ctx() {
        q = t.add("q", VarKind::Parameter, 2);
        z = t.add("z", VarKind::Spectral);
    }
    RatFun zero() const { return RatFun::zero(t); }
    RatFun one() const { return RatFun::one(t); }
    RatFun qp(std::int64_t k) const {
        return RatFun::from_monomial(t, Monomial::var(t, q, k));
    }
    RingMatrix<RatFun> unit(int n, int i, int j) const {
        RingMatrix<RatFun> m(n, zero());
        m.at(i - 1, j - 1) = one();
        return m;
    }
};

bool req(const RatFun& a, const RatFun& b) { return rf_eq(a, b); }

} // namespace

TEST_CASE("kron places matrix units per the flattening convention") {
    Ctx c;
    auto E11 = c.unit(2, 1, 1), E22 = c.unit(2, 2, 2);
    auto E12 = c.unit(2, 1, 2), E21 = c.unit(2, 2, 1);
    auto K = kron(E11, E22, c.zero());
    // single 1 at flattened row/col 1 (0-based), i.e. position (2,2) 1-based
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(rf_eq(K.at(i, j), (i == 1 && j == 1) ? c.one() : c.zero()));

    auto I2 = RingMatrix<RatFun>::identity(2, c.zero(), c.one());
    auto I4 = kron(I2, I2, c.zero());
    CHECK(mat_eq(I4, RingMatrix<RatFun>::identity(4, c.zero(), c.one()), req));

    // E12 (x) E21 maps |2,1> to |1,2>: entry at row (1,2), col (2,1)
    auto K2 = kron(E12, E21, c.zero());
    CHECK(rf_eq(K2.at(1, 2), c.one()));

    // E_ij (x) E_ji with i<j sits above the diagonal in this flattening
    CHECK(is_unit_upper(
        K2 + I4, [](const RatFun& x) { return x.is_zero(); },
        [&](const RatFun& x) { return rf_eq(x, c.one()); }));
}

TEST_CASE("embed") {
    Ctx c;
    auto E12 = c.unit(2, 1, 2), E21 = c.unit(2, 2, 1);
    auto R = kron(E12, E21, c.zero());
    auto I2 = RingMatrix<RatFun>::identity(2, c.zero(), c.one());

    CHECK(mat_eq(embed(R, 2, 1, 2, 3, c.zero(), c.one()), kron(R, I2, c.zero()), req));
    CHECK(mat_eq(embed(R, 2, 2, 3, 3, c.zero(), c.one()), kron(I2, R, c.zero()), req));

    // embed on legs (1,3) agrees with conjugating embed on (1,2) by the (2 3)
    // leg permutation
    RingMatrix<RatFun> P23(8, c.zero());
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int d = 0; d < 2; ++d)
                P23.at(a * 4 + b * 2 + d, a * 4 + d * 2 + b) = c.one();
    auto lhs = embed(R, 2, 1, 3, 3, c.zero(), c.one());
    auto rhs =
        P23.mul(embed(R, 2, 1, 2, 3, c.zero(), c.one()), c.zero()).mul(P23, c.zero());
    CHECK(mat_eq(lhs, rhs, req));

    CHECK_THROWS_AS(embed(R, 2, 2, 2, 3, c.zero(), c.one()), QcvError);
}

TEST_CASE("swap_legs") {
    Ctx c;
    auto E12 = c.unit(2, 1, 2), E21 = c.unit(2, 2, 1);
    RatFun a = c.qp(2) / (c.one() - c.qp(2));
    auto M = kron(E12, E21, c.zero()).scale(a);
    auto S = swap_legs(M, 2);
    CHECK(rf_eq(S.at(2, 1), a));
    CHECK(rf_eq(S.at(1, 2), c.zero()));
    CHECK(mat_eq(swap_legs(S, 2), M, req));

    // involution and multiplicativity
    auto A = kron(E12 + E21, E21, c.zero());
    auto B = kron(E21, E12 + E21, c.zero());
    auto lhs = swap_legs(A.mul(B, c.zero()), 2);
    auto rhs = swap_legs(A, 2).mul(swap_legs(B, 2), c.zero());
    CHECK(mat_eq(lhs, rhs, req));
}

TEST_CASE("gauss decomposition round trips") {
    Ctx c;
    auto inv = [](const RatFun& x) {
        if (x.is_zero()) throw SingularPivot("ratfun");
        return x.inverse();
    };

    SUBCASE("identity") {
        auto I = RingMatrix<RatFun>::identity(3, c.zero(), c.one());
        auto G = gauss_decompose(I, GaussOrder::LDU, c.zero(), c.one(), inv);
        CHECK(mat_eq(G.recombine(c.zero()), I, req));
        CHECK(mat_eq(G.lower, I, req));
        CHECK(mat_eq(G.diag, I, req));
        CHECK(mat_eq(G.upper, I, req));
    }
    SUBCASE("dense 3x3 over the function field, both orders") {
        RingMatrix<RatFun> M(3, c.zero());
        RatFun zz = RatFun::var(c.t, c.z);
        M.at(0, 0) = c.one() + zz;
        M.at(0, 1) = c.qp(2);
        M.at(0, 2) = zz;
        M.at(1, 0) = c.one();
        M.at(1, 1) = c.one() - c.qp(2) * zz;
        M.at(1, 2) = c.qp(-2);
        M.at(2, 0) = zz * zz;
        M.at(2, 1) = c.one();
        M.at(2, 2) = c.one() + c.qp(4) * zz;
        for (auto order : {GaussOrder::LDU, GaussOrder::UDL}) {
            auto G = gauss_decompose(M, order, c.zero(), c.one(), inv);
            CHECK(mat_eq(G.recombine(c.zero()), M, req));
            auto isz = [](const RatFun& x) { return x.is_zero(); };
            auto iso = [&](const RatFun& x) { return rf_eq(x, c.one()); };
            CHECK(is_unit_lower(G.lower, isz, iso));
            CHECK(is_unit_upper(G.upper, isz, iso));
            CHECK(is_diagonal(G.diag, isz));
        }
    }
    SUBCASE("zero pivot is singular") {
        RingMatrix<RatFun> M(2, c.zero());
        M.at(0, 1) = c.one();
        M.at(1, 0) = c.one();
        CHECK_THROWS_AS(gauss_decompose(M, GaussOrder::LDU, c.zero(), c.one(), inv),
                        SingularPivot);
    }
}
